// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <sstream>

#include "dmgr/eval/evaluate.hpp"
#include "fixtures.hpp"

using namespace dmgr;
using namespace dmgr::eval;
using dmgr::testing::World;

namespace {

EvalReport fake_report(std::string id, std::vector<double> mean) {
  EvalReport r;
  r.config_id = std::move(id);
  r.horizon = mean.size();
  r.episodes = 10;
  r.seed = 1;
  r.std.assign(mean.size(), 0.1);
  r.mean = std::move(mean);
  return r;
}

}  // namespace

TEST(Evaluate, OracleScoresOneEveryTurn) {
  World w(240, 16);
  manager::OraclePolicy oracle(w.bank);
  EvalOptions opts;
  opts.episodes = 50;
  const auto r = evaluate(oracle, w.test, w.sim, opts, "oracle");
  ASSERT_EQ(r.mean.size(), 5u);
  for (std::size_t t = 0; t < 5; ++t) {
    EXPECT_EQ(r.mean[t], 1.0);
    EXPECT_EQ(r.std[t], 0.0);
  }
}

TEST(Evaluate, RandomStateScoresHalf) {
  World w(1200, 64);
  manager::RandomStatePolicy random(64);
  const auto r = evaluate(random, w.test, w.sim, EvalOptions{}, "random");
  EXPECT_EQ(r.episodes, 500u);
  EXPECT_NEAR(r.mean[0], 0.5, 0.05);
}

TEST(Evaluate, SameSeedSameReport) {
  World w(240, 16);
  manager::ManagerModel model(w.model_config());
  const auto p = model.init_params<float>(1);
  manager::ManagerPolicy policy(model, p, w.bank);
  EvalOptions opts;
  opts.episodes = 40;
  opts.seed = 9;
  EXPECT_EQ(evaluate(policy, w.test, w.sim, opts, "a"), evaluate(policy, w.test, w.sim, opts, "a"));
  opts.seed = 10;
  const auto other = evaluate(policy, w.test, w.sim, opts, "a");
  opts.seed = 9;
  EXPECT_NE(other.mean, evaluate(policy, w.test, w.sim, opts, "a").mean);
}

TEST(Evaluate, PlansArePairedAcrossPolicies) {
  World w(240, 16);
  EvalOptions opts;
  opts.episodes = 30;
  const auto plan = plan_episodes(w.test, opts);
  std::vector<manager::EpisodeTrace> a, b;
  manager::OraclePolicy oracle(w.bank);
  manager::RandomStatePolicy random(16);
  evaluate(oracle, w.test, w.sim, opts, "o", &a);
  evaluate(random, w.test, w.sim, opts, "r", &b);
  for (std::size_t i = 0; i < plan.size(); ++i) {
    EXPECT_EQ(a[i].target, plan[i].target);
    EXPECT_EQ(b[i].target, plan[i].target);
    EXPECT_EQ(b[i].seed, plan[i].episode_seed);
    EXPECT_TRUE(w.test.contains(plan[i].target));
  }
}

TEST(Evaluate, RejectsEmptyRuns) {
  World w(120, 8);
  manager::OraclePolicy oracle(w.bank);
  EvalOptions opts;
  opts.episodes = 0;
  EXPECT_THROW(evaluate(oracle, w.test, w.sim, opts, "x"), ValidationError);
}

TEST(Report, JsonRoundTrip) {
  const auto r = fake_report("sl-nl", {0.5, 0.6, 0.7});
  EXPECT_EQ(report_from_json(report_to_json(r)), r);
  EXPECT_THROW(report_from_json("{\"config\": \"x\"}"), ValidationError);
  EXPECT_THROW(report_from_json("not json"), ParseError);
  auto bad = r;
  bad.mean[1] = 1.5;
  EXPECT_THROW(report_from_json(report_to_json(bad)), ValidationError);
}

TEST(Compare, GoldenHeaderAndRowCount) {
  const std::vector<CompareEntry> entries{
      {"sl-nl", "sl", "nl", fake_report("sl-nl", {0.5, 0.6, 0.7})},
      {"mbpi-nl", "mbpi", "nl", fake_report("mbpi-nl", {0.55, 0.65, 0.8})},
  };
  const auto csv = compare(entries);
  EXPECT_EQ(csv.substr(0, csv.find('\n')),
            "config,method,channel,turn,mean,std,episodes,diff_vs_reference");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 1 + 2 * 3);
  EXPECT_NE(csv.find("mbpi-nl,mbpi,nl,3,0.800000,0.100000,10,0.100000\n"), std::string::npos);
  EXPECT_EQ(csv, compare(entries));
}

TEST(Compare, IdenticalRunsHaveZeroDiff) {
  const auto r = fake_report("a", {0.3, 0.4});
  const auto csv = compare({{"a", "sl", "nl", r}, {"b", "sl", "nl", r}});
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);
  while (std::getline(in, line)) {
    EXPECT_EQ(line.substr(line.rfind(',') + 1), "0.000000") << line;
  }
}

TEST(Compare, MismatchedHorizonsRejected) {
  EXPECT_THROW(compare({{"a", "sl", "nl", fake_report("a", {0.3, 0.4})},
                        {"b", "sl", "nl", fake_report("b", {0.3, 0.4, 0.5})}}),
               ValidationError);
  EXPECT_THROW(compare({}), ValidationError);
}

TEST(TurnCurve, MonotoneFlagAndRoundTrip) {
  const auto up = fake_report("up", {0.5, 0.6, 0.6, 0.9});
  const auto csv = turn_curve_export(up);
  EXPECT_NE(csv.find("# monotone=true"), std::string::npos);
  const auto curve = parse_turn_curve(csv);
  EXPECT_TRUE(curve.monotone);
  EXPECT_EQ(curve.turn, (std::vector<std::size_t>{1, 2, 3, 4}));
  for (std::size_t t = 0; t < 4; ++t) EXPECT_NEAR(curve.mean[t], up.mean[t], 1e-6);

  const auto down = fake_report("down", {0.5, 0.4});
  EXPECT_FALSE(parse_turn_curve(turn_curve_export(down)).monotone);
  EXPECT_THROW(parse_turn_curve("turn,mean\n"), ParseError);
  EXPECT_THROW(parse_turn_curve("turn,mean,std\n1,0.5,0.1\n"), ParseError);
}

TEST(TurnCurve, OracleIsFlatAtOne) {
  World w(240, 16);
  manager::OraclePolicy oracle(w.bank);
  EvalOptions opts;
  opts.episodes = 20;
  const auto curve = parse_turn_curve(turn_curve_export(evaluate(oracle, w.test, w.sim, opts, "o")));
  EXPECT_TRUE(curve.monotone);
  for (double m : curve.mean) EXPECT_EQ(m, 1.0);
}
