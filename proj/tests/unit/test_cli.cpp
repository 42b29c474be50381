// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "cli.hpp"
#include "dmgr/eval/evaluate.hpp"

namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result dmgr_run(std::vector<std::string> args) {
  args.insert(args.begin(), "dmgr");
  std::ostringstream out, err;
  const int code = dmgr::cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

fs::path scratch(const std::string& name) {
  auto dir = fs::temp_directory_path() / ("dmgr-cli-" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST(Cli, GenCorpusIsByteStable) {
  const auto dir = scratch("gen");
  const auto a = (dir / "a.json").string(), b = (dir / "b.json").string();
  ASSERT_EQ(dmgr_run({"gen-corpus", "--seed", "0", "--n", "1200", "--out", a}).code, 0);
  ASSERT_EQ(dmgr_run({"gen-corpus", "--seed", "0", "--n", "1200", "--out", b}).code, 0);
  EXPECT_EQ(slurp(a), slurp(b));
  ASSERT_EQ(dmgr_run({"gen-corpus", "--seed", "1", "--n", "1200", "--out", b}).code, 0);
  EXPECT_NE(slurp(a), slurp(b));
}

TEST(Cli, ConfigErrorsExitTwo) {
  const auto dir = scratch("cfg");
  const auto missing = dmgr_run({"train", "--phase", "sl", "--config", (dir / "missing.json").string()});
  EXPECT_EQ(missing.code, 2);
  EXPECT_NE(missing.err.find("not found"), std::string::npos);

  std::ofstream(dir / "bad.json") << R"({"train": {"learning_rate": 1}})";
  EXPECT_EQ(dmgr_run({"eval", "--config", (dir / "bad.json").string()}).code, 2);
  std::ofstream(dir / "broken.json") << R"({"train": )";
  EXPECT_EQ(dmgr_run({"eval", "--config", (dir / "broken.json").string()}).code, 2);
  EXPECT_EQ(dmgr_run({"gen-corpus", "--n", "3", "--out", (dir / "c.json").string()}).code, 2);
}

TEST(Cli, UnknownFlagPrintsUsageAndExitsTwo) {
  const auto r = dmgr_run({"train", "--bogus"});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("Usage"), std::string::npos);
  EXPECT_TRUE(r.out.empty());
  EXPECT_EQ(dmgr_run({"train", "--phase", "ppo"}).code, 2);
  EXPECT_EQ(dmgr_run({}).code, 2);
  EXPECT_EQ(dmgr_run({"frobnicate"}).code, 2);
  const auto help = dmgr_run({"--help"});
  EXPECT_EQ(help.code, 0);
  EXPECT_NE(help.out.find("gen-corpus"), std::string::npos);
}

TEST(Cli, RuntimeErrorsExitOne) {
  const auto dir = scratch("rt");
  EXPECT_EQ(dmgr_run({"eval", "--corpus", (dir / "nope.json").string()}).code, 1);
  EXPECT_EQ(dmgr_run({"curve", (dir / "nope.json").string()}).code, 1);
}

TEST(Cli, EndToEndSmoke) {
  const auto dir = scratch("e2e");
  const auto corpus = (dir / "corpus.json").string();
  const auto cfg = (dir / "run.json").string();
  std::ofstream(cfg) << R"({"model": {"feature_dim": 16, "embed_dim": 8, "filters": 8},
    "train": {"sl_epochs": 1, "rl_epochs": 1, "episodes_per_epoch": 32, "batch_size": 8},
    "eval": {"episodes": 40}, "out_dir": ")" << (dir / "run").string() << "\"}";
  ASSERT_EQ(dmgr_run({"gen-corpus", "--seed", "0", "--n", "240", "--out", corpus}).code, 0);

  const auto sl = dmgr_run({"train", "--phase", "sl", "--config", cfg, "--corpus", corpus});
  ASSERT_EQ(sl.code, 0) << sl.err;
  const auto ckpt = dir / "run" / "sl" / "sl.ckpt";
  ASSERT_TRUE(fs::exists(ckpt));
  EXPECT_TRUE(fs::exists(dir / "run" / "sl" / "metrics.csv"));
  EXPECT_TRUE(fs::exists(dir / "run" / "sl" / "manifest.json"));
  const auto metrics = slurp(dir / "run" / "sl" / "metrics.csv");

  const auto scst = dmgr_run({"train", "--phase", "scst", "--config", cfg, "--corpus", corpus,
                              "--init", ckpt.string()});
  ASSERT_EQ(scst.code, 0) << scst.err;

  const auto r1 = (dir / "sl.json").string(), r2 = (dir / "scst.json").string();
  ASSERT_EQ(dmgr_run({"eval", "--config", cfg, "--corpus", corpus, "--checkpoint", ckpt.string(),
                      "--out", r1})
                .code,
            0);
  ASSERT_EQ(dmgr_run({"eval", "--config", cfg, "--corpus", corpus, "--method", "scst",
                      "--checkpoint", (dir / "run" / "scst" / "scst.ckpt").string(), "--out", r2})
                .code,
            0);
  EXPECT_EQ(dmgr::eval::load_report(r1).config_id, "sl-nl");

  const auto table = (dir / "table.csv").string();
  ASSERT_EQ(dmgr_run({"compare", r1, r2, "--out", table}).code, 0);
  const auto csv = slurp(table);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 1 + 2 * 5);
  EXPECT_NE(csv.find("scst-nl,scst,nl,5,"), std::string::npos);

  const auto curve = dmgr_run({"curve", r1});
  EXPECT_EQ(curve.code, 0);
  EXPECT_NE(curve.out.find("# monotone="), std::string::npos);

  const auto traces = (dir / "traces.jsonl").string();
  ASSERT_EQ(dmgr_run({"simulate", "--config", cfg, "--corpus", corpus, "--episodes", "3",
                      "--out", traces})
                .code,
            0);
  const auto t = slurp(traces);
  EXPECT_EQ(std::count(t.begin(), t.end(), '\n'), 3);

  // Same inputs, same bytes.
  ASSERT_EQ(dmgr_run({"train", "--phase", "sl", "--config", cfg, "--corpus", corpus}).code, 0);
  EXPECT_EQ(slurp(dir / "run" / "sl" / "metrics.csv"), metrics);
  const auto r3 = (dir / "sl-again.json").string();
  ASSERT_EQ(dmgr_run({"eval", "--config", cfg, "--corpus", corpus, "--checkpoint", ckpt.string(),
                      "--out", r3})
                .code,
            0);
  EXPECT_EQ(slurp(r1), slurp(r3));
}
