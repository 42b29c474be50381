// SPDX-License-Identifier: Apache-2.0
// Acceptance suite. Prints one PASS/FAIL line per criterion; details are
// indented underneath. Exit status is non-zero when any criterion fails.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <memory>
#include <random>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "dmgr/eval/evaluate.hpp"
#include "dmgr/nn/checkpoint.hpp"
#include "dmgr/nn/grad_check.hpp"
#include "dmgr/run/workspace.hpp"
#include "dmgr/service/session.hpp"
#include "dmgr/training/trainer.hpp"
#include "fixtures.hpp"

namespace fs = std::filesystem;
using namespace dmgr;
using corpus::ItemId;
using dmgr::testing::World;

namespace {

// ---- pinned thresholds ----
constexpr double kGradTolerance = 1e-4;
constexpr std::size_t kGradSeeds = 20;
constexpr std::size_t kGradDim = 8;
constexpr float kProbTolerance = 1e-6f;
constexpr double kActionValueTolerance = 1e-6;
constexpr double kRandomR1 = 0.5;
constexpr double kRandomR1Band = 0.05;
constexpr double kSlFloor = 0.65;
constexpr double kMethodGap = 0.02;
constexpr double kMonotoneSlack = 0.01;
constexpr double kChannelGap = 0.05;

struct Outcome {
  bool pass = false;
  std::vector<std::string> details;

  void note(const std::string& line) { details.push_back(line); }
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::string curve_text(const std::vector<double>& m) {
  std::string s;
  for (std::size_t t = 0; t < m.size(); ++t) s += (t ? " " : "") + fmt("%.4f", m[t]);
  return s;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void randomize(nn::ParamSetD& p, std::uint64_t seed, double scale) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-scale, scale);
  p.for_each([&](const std::string&, nn::TensorD& v, nn::TensorD&) {
    for (auto& x : v.data()) x = u(rng);
  });
}

std::vector<double> gaussian(std::size_t n, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  std::vector<double> v(n);
  for (auto& x : v) x = g(rng);
  return v;
}

// ---- gradient integrity ----

struct GradResult {
  std::string name;
  double worst = 0.0;
  std::string where;
};

template <typename MakeCase>
GradResult over_seeds(const std::string& name, MakeCase make) {
  GradResult r{name};
  for (std::uint64_t seed = 0; seed < kGradSeeds; ++seed) {
    const auto rep = make(seed);
    if (rep.max_relative_error >= r.worst) {
      r.worst = rep.max_relative_error;
      r.where = "seed " + std::to_string(seed) + " " + rep.worst_parameter + "[" +
                std::to_string(rep.worst_index) + "]";
    }
  }
  return r;
}

Outcome gradient_integrity() {
  Outcome out;
  std::vector<GradResult> results;
  constexpr std::size_t D = kGradDim;

  results.push_back(over_seeds("text encoder", [&](std::uint64_t seed) {
    nn::TextCnnConfig cfg;
    cfg.vocab_size = 20;
    cfg.embed_dim = 6;
    cfg.filters = 4;
    cfg.out_dim = D;
    nn::TextCnn cnn("txt", cfg);
    nn::ParamSetD p;
    cnn.declare(p);
    randomize(p, seed, 0.5);
    std::mt19937_64 rng(seed + 7);
    std::uniform_int_distribution<nn::TokenId> tok(3, 19);
    std::vector<nn::TokenId> tokens(7);
    for (auto& t : tokens) t = tok(rng);
    tokens.push_back(2);
    const auto goal = gaussian(D, rng);
    auto loss = [&](const nn::ParamSetD& q) {
      const auto y = cnn.forward(q, std::span<const nn::TokenId>(tokens));
      double l = 0;
      for (std::size_t i = 0; i < D; ++i) l += 0.5 * (y[i] - goal[i]) * (y[i] - goal[i]);
      return l;
    };
    auto grad = [&](nn::ParamSetD& q) {
      nn::TextCnnCache<double> c;
      const auto y = cnn.forward(q, std::span<const nn::TokenId>(tokens), &c);
      std::vector<double> dy(D);
      for (std::size_t i = 0; i < D; ++i) dy[i] = y[i] - goal[i];
      cnn.backward(q, c, std::span<const double>(dy));
    };
    return nn::grad_check(loss, grad, p, 1e-6);
  }));

  World w(60, D);
  manager::ManagerModel model(w.model_config(6));

  results.push_back(over_seeds("response encoder", [&](std::uint64_t seed) {
    auto p = model.init_params<double>(seed);
    std::mt19937_64 pick(seed + 3);
    const ItemId a = manager::draw_item(w.train, pick);
    const ItemId b = manager::draw_item(w.train, pick);
    const auto tokens = w.sim.respond(a, b).tokens;
    const auto tok = std::span<const nn::TokenId>(tokens);
    const auto goal = w.bank.row(a);
    auto loss = [&](const nn::ParamSetD& q) {
      const auto x = model.encode_response(q, w.bank.row(b), tok);
      return nn::l2_distance(std::span<const double>(x), goal);
    };
    auto grad = [&](nn::ParamSetD& q) {
      manager::TurnCache<double> c;
      const auto x = model.encode_response(q, w.bank.row(b), tok, &c);
      const double d = nn::l2_distance(std::span<const double>(x), goal);
      std::vector<double> dx(D);
      for (std::size_t i = 0; i < D; ++i) dx[i] = (x[i] - goal[i]) / d;
      model.encode_response_backward(q, c, std::span<const double>(dx));
    };
    return nn::grad_check(loss, grad, p, 1e-5);
  }));

  results.push_back(over_seeds("GRU tracker", [&](std::uint64_t seed) {
    nn::GruCell cell("g", D, D);
    nn::ParamSetD p;
    cell.declare(p);
    randomize(p, seed, 0.5);
    std::mt19937_64 rng(seed + 100);
    const auto x1 = gaussian(D, rng), x2 = gaussian(D, rng), goal = gaussian(D, rng);
    auto loss = [&](const nn::ParamSetD& q) {
      const std::vector<double> h0(D, 0.0);
      const auto c1 = cell.forward(q, std::span<const double>(x1), std::span<const double>(h0));
      const auto c2 = cell.forward(q, std::span<const double>(x2), std::span<const double>(c1.h));
      double l = 0;
      for (std::size_t i = 0; i < D; ++i) l += 0.5 * (c2.h[i] - goal[i]) * (c2.h[i] - goal[i]);
      return l;
    };
    auto grad = [&](nn::ParamSetD& q) {
      const std::vector<double> h0(D, 0.0);
      const auto c1 = cell.forward(q, std::span<const double>(x1), std::span<const double>(h0));
      const auto c2 = cell.forward(q, std::span<const double>(x2), std::span<const double>(c1.h));
      std::vector<double> dh(D), dx(D, 0.0), dh1(D), dh0(D);
      for (std::size_t i = 0; i < D; ++i) dh[i] = c2.h[i] - goal[i];
      cell.backward(q, c2, std::span<const double>(dh), std::span<double>(dx), std::span<double>(dh1));
      std::fill(dx.begin(), dx.end(), 0.0);
      cell.backward(q, c1, std::span<const double>(dh1), std::span<double>(dx), std::span<double>(dh0));
    };
    return nn::grad_check(loss, grad, p, 1e-5);
  }));

  auto episode_case = [&](std::uint64_t seed, bool triplets) {
    auto p = model.init_params<double>(seed + 100);
    if (triplets) randomize(p, seed, 0.4);
    std::mt19937_64 pick(seed + (triplets ? 4 : 12));
    training::EpisodeRecord rec;
    rec.target = manager::draw_item(w.train, pick);
    for (std::size_t t = 0; t < 3; ++t) {
      const ItemId c = manager::draw_item(w.train, pick);
      rec.shown.push_back(c);
      rec.tokens.push_back(w.sim.respond(rec.target, c).tokens);
      if (triplets) {
        rec.triplets.push_back({t, rec.target, manager::draw_item(w.train, pick)});
      } else {
        std::vector<ItemId> cands;
        for (int k = 0; k < 3; ++k) cands.push_back(manager::draw_item(w.train, pick));
        std::sort(cands.begin(), cands.end());
        cands.erase(std::unique(cands.begin(), cands.end()), cands.end());
        rec.policy.push_back({t, cands, cands.back(), 0.37});
      }
    }
    const double margin = triplets ? 1.0 : 0.1;
    auto loss = [&](const nn::ParamSetD& q) {
      auto copy = q;
      return training::episode_loss<double>(model, copy, w.bank, rec, margin);
    };
    auto grad = [&](nn::ParamSetD& q) {
      training::episode_loss<double>(model, q, w.bank, rec, margin, 1.0);
    };
    if (triplets && !(loss(p) > 0.0)) {
      nn::GradCheckReport bad;
      bad.max_relative_error = INFINITY;
      bad.worst_parameter = "(no active triplet term)";
      return bad;
    }
    return nn::grad_check(loss, grad, p, 1e-5);
  };
  results.push_back(over_seeds("triplet loss (full pipeline)",
                               [&](std::uint64_t s) { return episode_case(s, true); }));
  results.push_back(over_seeds("SCST surrogate (full pipeline)",
                               [&](std::uint64_t s) { return episode_case(s, false); }));

  out.pass = true;
  for (const auto& r : results) {
    out.pass = out.pass && r.worst < kGradTolerance;
    out.note(r.name + ": max rel err " + fmt("%.2e", r.worst) + " (" + r.where + ")");
  }
  out.note(std::to_string(kGradSeeds) + " seeds each, D=" + std::to_string(D) + ", threshold " +
           fmt("%.0e", kGradTolerance));
  return out;
}

// ---- oracle equivalence ----

manager::CandidateDistribution sort_oracle(std::span<const float> s, const corpus::FeatureBank& bank,
                                           std::size_t k, const std::set<ItemId>& excluded) {
  std::vector<std::pair<float, ItemId>> all;
  for (ItemId id = 0; id < bank.size(); ++id) {
    if (excluded.contains(id)) continue;
    all.emplace_back(nn::l2_distance(s, bank.row(id)), id);
  }
  std::sort(all.begin(), all.end());
  manager::CandidateDistribution out;
  double z = 0.0;
  std::vector<double> e;
  for (std::size_t j = 0; j < k; ++j) {
    out.ids.push_back(all[j].second);
    out.distances.push_back(all[j].first);
    e.push_back(std::exp(-static_cast<double>(all[j].first - all[0].first)));
    z += e.back();
  }
  for (double v : e) out.probs.push_back(static_cast<float>(v / z));
  return out;
}

double percentile_oracle(std::span<const float> s, const corpus::FeatureBank& bank,
                         const std::vector<ItemId>& ids, ItemId target) {
  std::vector<std::pair<float, ItemId>> all;
  for (auto id : ids) {
    all.emplace_back(nn::l2_distance(s, bank.row(id)), id);
  }
  std::sort(all.begin(), all.end());
  std::size_t rank = 0;
  while (all[rank].second != target) ++rank;
  return static_cast<double>(ids.size() - 1 - rank) / static_cast<double>(ids.size() - 1);
}

struct RolloutOracle {
  const manager::ManagerModel& model;
  const nn::ParamSet& params;
  const feedback::FeedbackSource& feedback;
  const corpus::FeatureBank& bank;
  std::vector<ItemId> ids;
  std::size_t horizon;

  double q(ItemId target, std::vector<float> h, std::vector<ItemId> shown, ItemId action) const {
    const auto u = feedback.respond(target, action);
    if (h.empty()) h.assign(model.dim(), 0.0f);
    const auto next = model.turn(params, bank.row(action), std::span<const nn::TokenId>(u.tokens),
                                 std::span<const float>(h));
    shown.push_back(action);
    const double r = percentile_oracle(std::span<const float>(next.s), bank, ids, target);
    if (shown.size() == horizon) return r;
    std::set<ItemId> ex(shown.begin(), shown.end());
    std::vector<std::pair<float, ItemId>> all;
    for (auto id : ids) {
      if (ex.contains(id)) continue;
      all.emplace_back(nn::l2_distance(std::span<const float>(next.s), bank.row(id)), id);
    }
    const ItemId best = std::min_element(all.begin(), all.end())->second;
    return r + q(target, next.h, shown, best);
  }
};

Outcome oracle_equivalence() {
  Outcome out;
  // candidate_distribution
  {
    const auto bank = testing::random_bank(500, 8, 3);
    const corpus::RetrievalSet set(bank, testing::iota_ids(500));
    std::mt19937_64 rng(11);
    std::size_t id_mismatch = 0;
    float worst_prob = 0.0f;
    const std::size_t trials = 500;
    for (std::size_t trial = 0; trial < trials; ++trial) {
      std::vector<float> s(8);
      for (auto& x : s) x = static_cast<float>(gaussian(1, rng)[0]);
      std::set<ItemId> ex;
      for (int j = 0; j < static_cast<int>(trial % 5); ++j) ex.insert(static_cast<ItemId>(rng() % 500));
      const std::vector<ItemId> exv(ex.begin(), ex.end());
      const std::size_t k = 1 + trial % 5;
      const auto got = manager::candidate_distribution(std::span<const float>(s), set, k,
                                                       std::span<const ItemId>(exv));
      const auto want = sort_oracle(std::span<const float>(s), bank, k, ex);
      if (got.ids != want.ids || got.distances != want.distances) ++id_mismatch;
      for (std::size_t j = 0; j < k && j < got.probs.size(); ++j) {
        worst_prob = std::max(worst_prob, std::fabs(got.probs[j] - want.probs[j]));
      }
    }
    out.note("candidate_distribution: " + std::to_string(id_mismatch) + "/" +
             std::to_string(trials) + " id/distance mismatches, max |dp| " +
             fmt("%.1e", worst_prob));
    out.pass = id_mismatch == 0 && worst_prob <= kProbTolerance;
  }
  // ranking_percentile
  {
    World w(1200, 64);
    std::mt19937_64 rng(5);
    std::size_t mismatch = 0;
    const std::size_t trials = 300;
    for (std::size_t trial = 0; trial < trials; ++trial) {
      std::vector<float> s(64);
      for (auto& x : s) x = static_cast<float>(gaussian(1, rng)[0]) * 0.5f;
      const ItemId target = manager::draw_item(w.test, rng);
      if (trial % 3 == 0) {  // state exactly on an item: exercises ties at distance 0
        const auto row = w.bank.row(target);
        s.assign(row.begin(), row.end());
      }
      const double got = training::ranking_percentile(std::span<const float>(s), w.test, target);
      if (got != percentile_oracle(std::span<const float>(s), w.bank, w.test.ids(), target)) ++mismatch;
    }
    out.note("ranking_percentile: " + std::to_string(mismatch) + "/" + std::to_string(trials) +
             " mismatches (exact comparison)");
    out.pass = out.pass && mismatch == 0;
  }
  // estimate_action_value on N=12, K=2, T=3
  {
    World w(60, 8);
    const corpus::RetrievalSet set(w.bank, std::vector<ItemId>(w.corpus.train.begin(),
                                                               w.corpus.train.begin() + 12));
    manager::ManagerModel model(w.model_config());
    const auto params = model.init_params<float>(3);
    training::TrainingEnv env{model, set, w.sim};
    auto cfg = training::TrainConfig::defaults(training::Phase::mbpi);
    cfg.top_k = 2;
    cfg.reward.horizon = 3;
    const RolloutOracle oracle{model, params, w.sim, w.bank, set.ids(), 3};
    double worst = 0.0;
    std::size_t cases = 0;
    for (ItemId target : set.ids()) {
      manager::DialogState st;
      std::mt19937_64 rng(target);
      auto step = [&] {
        ItemId c;
        do {
          c = manager::draw_item(set, rng);
        } while (std::find(st.shown.begin(), st.shown.end(), c) != st.shown.end());
        const auto u = w.sim.respond(target, c);
        manager::advance(model, params, w.bank, st, c, std::span<const nn::TokenId>(u.tokens));
      };
      step();
      while (st.shown.size() < 3) {
        for (ItemId a : set.ids()) {
          if (std::find(st.shown.begin(), st.shown.end(), a) != st.shown.end()) continue;
          const double got = training::estimate_action_value(env, params, target, st, a, cfg);
          worst = std::max(worst, std::fabs(got - oracle.q(target, st.h, st.shown, a)));
          ++cases;
        }
        step();
      }
    }
    out.note("estimate_action_value: max |dQ| " + fmt("%.1e", worst) + " over " +
             std::to_string(cases) + " (target, state, action) cases");
    out.pass = out.pass && worst <= kActionValueTolerance;
  }
  return out;
}

// ---- hyperparameter fidelity ----

Outcome hyperparameter_fidelity() {
  Outcome out;
  std::vector<std::pair<std::string, bool>> checks;
  const auto sl = training::TrainConfig::defaults(training::Phase::sl);
  const auto mbpi = training::TrainConfig::defaults(training::Phase::mbpi);
  const auto scst = training::TrainConfig::defaults(training::Phase::scst);
  const run::RunConfig rc;
  const auto rc_sl = rc.train_config(training::Phase::sl);
  const auto rc_rl = rc.train_config(training::Phase::mbpi);
  checks.emplace_back("margin m = 0.1", sl.margin == 0.1 && rc_sl.margin == 0.1);
  checks.emplace_back("gamma = 1", sl.reward.gamma == 1.0 && mbpi.reward.gamma == 1.0 &&
                                       rc_rl.reward.gamma == 1.0);
  checks.emplace_back("K = 3", sl.top_k == 3 && mbpi.top_k == 3 && rc_sl.top_k == 3 &&
                                   manager::ManagerConfig{}.top_k == 3 && eval::EvalOptions{}.top_k == 3);
  checks.emplace_back("SL optimizer Adam lr 1e-3",
                      sl.adam.learning_rate == 1e-3f && rc_sl.adam.learning_rate == 1e-3f);
  checks.emplace_back("RL optimizer RMSprop lr 1e-5",
                      mbpi.rmsprop.learning_rate == 1e-5f && scst.rmsprop.learning_rate == 1e-5f &&
                          rc_rl.rmsprop.learning_rate == 1e-5f);
  checks.emplace_back("T = 5", sl.reward.horizon == 5 && rc_rl.reward.horizon == 5 &&
                                   eval::EvalOptions{}.horizon == 5);
  checks.emplace_back("batch size 16", sl.batch_size == 16 && mbpi.batch_size == 16);
  checks.emplace_back("eval episodes 500", eval::EvalOptions{}.episodes == 500);
  bool d256 = false;
  try {
    const auto cfg = run::parse_run_config(R"({"corpus": {"n": 120}, "model": {"feature_dim": 256}})");
    run::Workspace ws(cfg);
    const auto p = ws.init_params();
    const auto u = ws.simulator().respond(ws.test_set().ids()[0], ws.test_set().ids()[1]);
    const std::vector<float> h(256, 0.0f);
    const auto next = ws.model().turn(p, ws.bank().row(ws.test_set().ids()[1]),
                                      std::span<const nn::TokenId>(u.tokens),
                                      std::span<const float>(h));
    d256 = ws.bank().dim() == 256 && next.s.size() == 256;
  } catch (const std::exception& e) {
    out.note(std::string("D=256 failed: ") + e.what());
  }
  checks.emplace_back("D configurable (256 builds and runs)", d256);
  out.pass = true;
  for (const auto& [name, ok] : checks) {
    out.pass = out.pass && ok;
    out.note((ok ? "ok   " : "FAIL ") + name);
  }
  return out;
}

// ---- determinism ----

Outcome determinism(const fs::path& work) {
  Outcome out;
  run::RunConfig cfg;
  cfg.model.feature_dim = 32;
  cfg.model.embed_dim = 16;
  cfg.model.filters = 16;
  cfg.train.episodes_per_epoch = 64;
  cfg.eval.episodes = 100;
  run::Workspace ws(cfg);

  auto train_into = [&](const fs::path& dir, training::Phase phase, const nn::ParamSet& init) {
    fs::remove_all(dir);
    fs::create_directories(dir);
    auto tc = cfg.train_config(phase);
    tc.epochs = 2;
    return training::train(ws.training_env(), init, tc, training::TrainOutput{dir}).params;
  };
  bool metrics_ok = true;
  nn::ParamSet sl_params;
  for (auto phase : {training::Phase::sl, training::Phase::mbpi, training::Phase::scst}) {
    const std::string name = training::phase_name(phase);
    const auto init = phase == training::Phase::sl ? ws.init_params() : sl_params;
    const auto a = train_into(work / "det-a" / name, phase, init);
    const auto b = train_into(work / "det-b" / name, phase, init);
    if (phase == training::Phase::sl) sl_params = a;
    const bool same = slurp(work / "det-a" / name / "metrics.csv") ==
                          slurp(work / "det-b" / name / "metrics.csv") &&
                      slurp(work / "det-a" / name / (name + ".ckpt")) ==
                          slurp(work / "det-b" / name / (name + ".ckpt"));
    metrics_ok = metrics_ok && same;
    out.note(name + " metrics.csv and checkpoint byte-identical: " + (same ? "yes" : "NO"));
  }

  manager::ManagerPolicy policy(ws.model(), sl_params, ws.bank());
  const auto r1 = eval::report_to_json(eval::evaluate(policy, ws.test_set(), ws.simulator(), cfg.eval, "det"));
  const auto r2 = eval::report_to_json(eval::evaluate(policy, ws.test_set(), ws.simulator(), cfg.eval, "det"));
  const bool reports_ok = r1 == r2;
  out.note(std::string("eval report byte-identical: ") + (reports_ok ? "yes" : "NO"));

  // A second workspace built from the same config answers identically.
  run::Workspace twin(cfg);
  bool sim_ok = true;
  std::mt19937_64 rng(1);
  for (int i = 0; i < 2000; ++i) {
    const ItemId t = static_cast<ItemId>(rng() % ws.corpus().size());
    const ItemId c = static_cast<ItemId>(rng() % ws.corpus().size());
    sim_ok = sim_ok && ws.simulator().respond(t, c) == twin.simulator().respond(t, c) &&
             ws.simulator().respond(t, c) == ws.simulator().respond(t, c);
  }
  out.note(std::string("simulator replay (2000 pairs, two instances): ") + (sim_ok ? "yes" : "NO"));

  bool episodes_ok = true;
  for (const auto& p : eval::plan_episodes(ws.test_set(), cfg.eval)) {
    const auto a = manager::run_episode(policy, ws.test_set(), ws.simulator(), p.target, {}, p.episode_seed);
    const auto b = manager::run_episode(policy, ws.test_set(), ws.simulator(), p.target, {}, p.episode_seed);
    const auto line = manager::trace_to_json_line(a);
    episodes_ok = episodes_ok && line == manager::trace_to_json_line(b) &&
                  manager::trace_to_json_line(manager::trace_from_json_line(line)) == line;
  }
  out.note(std::string("greedy episode replay (100 episodes): ") + (episodes_ok ? "yes" : "NO"));

  // Logged service sessions replay to the same candidate sequences.
  const auto log = work / "det-sessions.jsonl";
  fs::remove(log);
  service::SessionEngine engine(ws.model(), sl_params, ws.corpus(), ws.test_set(), ws.simulator());
  service::SessionService svc(engine, {"", "", log});
  for (int i = 0; i < 10; ++i) {
    const auto mode = i % 2 ? "simulated" : "study";
    const auto created = svc.handle("POST", "/api/sessions",
                                    std::string("{\"mode\": \"") + mode + "\", \"seed\": " + std::to_string(i) + "}");
    char id[32];
    std::snprintf(id, sizeof id, "sess-%06d", i + 1);
    for (int t = 0; t < 5; ++t) {
      svc.handle("POST", std::string("/api/sessions/") + id + "/feedback", R"({"text": "is more formal and has a buckle"})");
    }
    (void)created;
  }
  std::ifstream in(log);
  const auto replays = service::replay_log(engine, in);
  bool sessions_ok = replays.size() == 10;
  for (const auto& r : replays) sessions_ok = sessions_ok && r.matches() && r.logged.size() == 5;
  out.note(std::string("service session log replay (10 sessions): ") + (sessions_ok ? "yes" : "NO"));

  out.pass = metrics_ok && reports_ok && sim_ok && episodes_ok && sessions_ok;
  return out;
}

// ---- trained configurations (pre-registered: library defaults) ----

struct Trained {
  std::map<std::string, eval::EvalReport> reports;  // by config id
  std::string log;
};

class Lab {
 public:
  explicit Lab(fs::path work) : work_(std::move(work)) {}

  /// SL from fresh init on `preset`, then optional RL phases from the SL checkpoint.
  eval::EvalReport run(const std::string& preset, training::Phase phase) {
    const std::string id = std::string(training::phase_name(phase)) + "-" + preset;
    if (auto it = reports_.find(id); it != reports_.end()) return it->second;
    run::RunConfig cfg;
    cfg.feedback.preset = preset;
    auto& ws = workspace(preset);
    const auto dir = work_ / id;
    fs::create_directories(dir);
    const auto t0 = std::chrono::steady_clock::now();
    nn::ParamSet init = phase == training::Phase::sl ? ws.init_params() : params("sl-" + preset, preset);
    auto result = training::train(ws.training_env(), init, cfg.train_config(phase),
                                  training::TrainOutput{dir, false});
    params_[id] = result.params;
    manager::ManagerPolicy policy(ws.model(), params_[id], ws.bank());
    auto report = eval::evaluate(policy, ws.test_set(), ws.simulator(), cfg.eval, id);
    eval::save_report(report, dir / "report.json");
    std::ofstream(dir / "curve.csv", std::ios::binary) << eval::turn_curve_export(report);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::cerr << "  [trained " << id << " in " << fmt("%.0f", secs) << " s; final "
              << fmt("%.4f", report.final_mean()) << "]\n";
    reports_[id] = report;
    return report;
  }

  eval::EvalReport baseline(const std::string& preset, const manager::Policy& policy, const std::string& id) {
    run::RunConfig cfg;
    auto& ws = workspace(preset);
    return eval::evaluate(policy, ws.test_set(), ws.simulator(), cfg.eval, id);
  }

  run::Workspace& workspace(const std::string& preset) {
    auto it = spaces_.find(preset);
    if (it == spaces_.end()) {
      run::RunConfig cfg;
      cfg.feedback.preset = preset;
      it = spaces_.emplace(preset, std::make_unique<run::Workspace>(cfg)).first;
    }
    return *it->second;
  }

  const fs::path& work() const { return work_; }

 private:
  const nn::ParamSet& params(const std::string& id, const std::string& preset) {
    if (!params_.contains(id)) run(preset, training::Phase::sl);
    return params_.at(id);
  }

  fs::path work_;
  std::map<std::string, std::unique_ptr<run::Workspace>> spaces_;
  std::map<std::string, nn::ParamSet> params_;
  std::map<std::string, eval::EvalReport> reports_;
};

Outcome baselines(Lab& lab) {
  Outcome out;
  auto& ws = lab.workspace("nl");
  const auto random_params = ws.init_params();
  manager::ManagerPolicy random_policy(ws.model(), random_params, ws.bank());
  const auto random = lab.baseline("nl", random_policy, "random-nl");
  const bool r1_ok = std::fabs(random.mean[0] - kRandomR1) <= kRandomR1Band;
  out.note("random-weight policy r_1 = " + fmt("%.4f", random.mean[0]) + " (want " +
           fmt("%.2f", kRandomR1) + " +/- " + fmt("%.2f", kRandomR1Band) + ", " +
           std::to_string(random.episodes) + " episodes)");
  const auto sl = lab.run("nl", training::Phase::sl);
  const bool sl_ok = sl.final_mean() > kSlFloor;
  out.note("SL final-turn mean = " + fmt("%.4f", sl.final_mean()) + " (floor " +
           fmt("%.2f", kSlFloor) + ")");
  out.pass = r1_ok && sl_ok;
  return out;
}

bool near_monotone(const std::vector<double>& m, std::string& why) {
  std::size_t drops = 0;
  double worst = 0.0;
  for (std::size_t t = 1; t < m.size(); ++t) {
    if (m[t] <= m[t - 1]) {
      ++drops;
      worst = std::max(worst, m[t - 1] - m[t]);
    }
  }
  why = std::to_string(drops) + " non-increasing step(s), largest drop " + fmt("%.4f", worst);
  return drops == 0 || (drops == 1 && worst <= kMonotoneSlack);
}

Outcome method_ordering(Lab& lab) {
  Outcome out;
  const auto sl = lab.run("nl", training::Phase::sl);
  const auto scst = lab.run("nl", training::Phase::scst);
  const auto mbpi = lab.run("nl", training::Phase::mbpi);
  const double s = sl.final_mean(), r = scst.final_mean(), m = mbpi.final_mean();
  const bool order = m >= r && r >= s;
  const bool gap = m - s >= kMethodGap;
  out.note("final-turn means: MBPI " + fmt("%.4f", m) + ", SCST " + fmt("%.4f", r) + ", SL " +
           fmt("%.4f", s));
  out.note(std::string("MBPI >= SCST >= SL: ") + (order ? "yes" : "NO"));
  out.note("MBPI - SL = " + fmt("%+.4f", m - s) + " (need >= " + fmt("%.2f", kMethodGap) + ")" +
           (gap ? "" : "  NO"));
  bool curves = true;
  for (const auto* rep : {&sl, &scst, &mbpi}) {
    std::string why;
    const bool ok = near_monotone(rep->mean, why);
    curves = curves && ok;
    out.note(rep->config_id + " curve " + curve_text(rep->mean) + ": " + why + (ok ? "" : "  NO"));
  }
  std::vector<eval::CompareEntry> entries{{"sl-nl", "sl", "nl", sl},
                                          {"scst-nl", "scst", "nl", scst},
                                          {"mbpi-nl", "mbpi", "nl", mbpi}};
  std::ofstream(lab.work() / "methods.csv", std::ios::binary) << eval::compare(entries);
  out.pass = order && gap && curves;
  return out;
}

Outcome channel_ordering(Lab& lab) {
  Outcome out;
  const std::vector<std::string> presets{"nl", "attr10_deep", "attr3", "attr1"};
  std::vector<eval::EvalReport> reps;
  std::vector<eval::CompareEntry> entries;
  for (const auto& p : presets) {
    reps.push_back(lab.run(p, training::Phase::sl));
    entries.push_back({reps.back().config_id, "sl", p, reps.back()});
  }
  std::ofstream(lab.work() / "channels.csv", std::ios::binary) << eval::compare(entries);
  bool order = true;
  for (std::size_t i = 0; i < reps.size(); ++i) {
    out.note(presets[i] + " final-turn mean " + fmt("%.4f", reps[i].final_mean()) + "  curve " +
             curve_text(reps[i].mean));
    if (i > 0) order = order && reps[i - 1].final_mean() >= reps[i].final_mean();
  }
  const double gap = reps.front().final_mean() - reps.back().final_mean();
  out.note(std::string("NL >= Attr10(deep) >= Attr3 >= Attr1: ") + (order ? "yes" : "NO"));
  out.note("NL - Attr1 = " + fmt("%+.4f", gap) + " (need >= " + fmt("%.2f", kChannelGap) + ")");
  out.pass = order && gap >= kChannelGap;
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  fs::path work = "acceptance-work";
  std::set<std::string> only;
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--work-dir" && i + 1 < argc) {
      work = argv[++i];
    } else if (a == "--only" && i + 1 < argc) {
      only.insert(argv[++i]);
    } else {
      std::cerr << "usage: dmgr_acceptance [--work-dir DIR] [--only NAME]...\n";
      return 2;
    }
  }
  fs::create_directories(work);
  Lab lab(work);

  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"gradient-integrity", [] { return gradient_integrity(); }},
      {"oracle-equivalence", [] { return oracle_equivalence(); }},
      {"hyperparameter-fidelity", [] { return hyperparameter_fidelity(); }},
      {"determinism", [&] { return determinism(work); }},
      {"baselines-and-floors", [&] { return baselines(lab); }},
      {"channel-ordering", [&] { return channel_ordering(lab); }},
      {"method-ordering", [&] { return method_ordering(lab); }},
  };

  std::size_t failed = 0, ran = 0;
  std::ostringstream summary;
  for (const auto& [name, fn] : criteria) {
    if (!only.empty() && !only.contains(name)) continue;
    ++ran;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o.pass = false;
      o.note(std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::ostringstream block;
    block << (o.pass ? "PASS " : "FAIL ") << name << "  (" << fmt("%.1f", secs) << " s)\n";
    for (const auto& d : o.details) block << "    " << d << "\n";
    std::cout << block.str() << std::flush;
    summary << block.str();
    failed += o.pass ? 0 : 1;
  }
  summary << (ran - failed) << "/" << ran << " criteria passed\n";
  std::cout << (ran - failed) << "/" << ran << " criteria passed\n";
  std::ofstream(work / "acceptance.txt") << summary.str();
  return failed == 0 ? 0 : 1;
}
