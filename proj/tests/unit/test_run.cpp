// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "dmgr/nn/checkpoint.hpp"
#include "dmgr/run/workspace.hpp"

using namespace dmgr;
using namespace dmgr::run;

namespace {

std::filesystem::path scratch(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("dmgr-run-" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

RunConfig small() {
  RunConfig cfg;
  cfg.corpus.n = 120;
  cfg.model.feature_dim = 16;
  cfg.model.embed_dim = 8;
  cfg.model.filters = 8;
  return cfg;
}

}  // namespace

TEST(RunConfig, EmptyObjectGivesDefaults) {
  const auto cfg = parse_run_config("{}");
  EXPECT_EQ(cfg.corpus.n, 1200u);
  EXPECT_EQ(cfg.model.feature_dim, 64u);
  EXPECT_EQ(cfg.train.batch_size, 16u);
  EXPECT_EQ(cfg.train.top_k, 3u);
  EXPECT_EQ(cfg.train.horizon, 5u);
  EXPECT_FLOAT_EQ(cfg.train.sl_learning_rate, 1e-3f);
  EXPECT_FLOAT_EQ(cfg.train.rl_learning_rate, 1e-5f);
  EXPECT_EQ(cfg.eval.episodes, 500u);
  EXPECT_EQ(cfg.feedback.preset, "nl");
}

TEST(RunConfig, ReadsNestedValues) {
  const auto cfg = parse_run_config(R"({"corpus": {"n": 300, "seed": 4},
    "feedback": {"preset": "attr3"}, "train": {"sl_epochs": 2, "exploration": 0.5},
    "eval": {"episodes": 7}, "out_dir": "x"})");
  EXPECT_EQ(cfg.corpus.n, 300u);
  EXPECT_EQ(cfg.corpus.seed, 4u);
  EXPECT_EQ(cfg.feedback.resolve().name(), "attr3");
  EXPECT_EQ(cfg.train_config(training::Phase::sl).epochs, 2u);
  EXPECT_EQ(cfg.train_config(training::Phase::mbpi).epochs, 10u);
  EXPECT_DOUBLE_EQ(cfg.train_config(training::Phase::mbpi).exploration, 0.5);
  EXPECT_EQ(cfg.eval.episodes, 7u);
  EXPECT_EQ(cfg.out_dir, "x");
}

TEST(RunConfig, RoundTrip) {
  auto cfg = small();
  cfg.train.margin = 0.25;
  cfg.eval.seed = 77;
  const auto text = run_config_to_json(cfg);
  EXPECT_EQ(run_config_to_json(parse_run_config(text)), text);
}

TEST(RunConfig, RejectsUnknownKeysAndBadValues) {
  EXPECT_THROW(parse_run_config(R"({"bogus": 1})"), ConfigError);
  EXPECT_THROW(parse_run_config(R"({"train": {"lr": 1}})"), ConfigError);
  EXPECT_THROW(parse_run_config(R"({"train": {"batch_size": "16"}})"), ConfigError);
  EXPECT_THROW(parse_run_config(R"({"train": {"batch_size": -1}})"), ConfigError);
  EXPECT_THROW(parse_run_config(R"({"train": {"batch_size": 0}})"), ConfigError);
  EXPECT_THROW(parse_run_config(R"({"train": {"gamma": 2}})"), ConfigError);
  EXPECT_THROW(parse_run_config(R"({"feedback": {"preset": "morse"}})"), ConfigError);
  EXPECT_THROW(parse_run_config(R"({"corpus": {"train_fraction": 1.0}})"), ConfigError);
  EXPECT_THROW(parse_run_config(R"({"model": 3})"), ConfigError);
  EXPECT_THROW(parse_run_config("[]"), ConfigError);
  EXPECT_THROW(parse_run_config("{\"corpus\": "), ParseError);
}

TEST(RunConfig, MissingFileIsConfigError) {
  EXPECT_THROW(load_run_config("/nonexistent/run.json"), ConfigError);
}

TEST(Workspace, BuildsConsistentPieces) {
  Workspace ws(small());
  EXPECT_EQ(ws.corpus().size(), 120u);
  EXPECT_EQ(ws.bank().dim(), 16u);
  EXPECT_EQ(ws.train_set().size() + ws.test_set().size(), 120u);
  EXPECT_EQ(ws.train_set().size(), 100u);
  EXPECT_EQ(ws.model().config().vocab_size, ws.simulator().vocab().size());
}

TEST(Workspace, LoadsCorpusFileAndCheckpoints) {
  const auto dir = scratch("ws");
  auto cfg = small();
  Workspace a(cfg);
  corpus::save_corpus(a.corpus(), dir / "corpus.json");
  nn::save_checkpoint(a.init_params(), dir / "init.ckpt");

  cfg.corpus.file = (dir / "corpus.json").string();
  cfg.corpus.seed = 99;  // ignored when a file is given
  Workspace b(cfg);
  EXPECT_EQ(b.corpus(), a.corpus());
  EXPECT_TRUE(b.load_params(dir / "init.ckpt").same_values(a.init_params()));

  cfg.model.embed_dim = 4;
  Workspace c(cfg);
  EXPECT_THROW(c.load_params(dir / "init.ckpt"), nn::CheckpointError);
}

TEST(Manifest, RecordsSeedsAndArtifacts) {
  const auto cfg = small();
  const auto text = manifest_json(cfg, {"train", "sl", "sl.ckpt", "", "", "metrics.csv"});
  EXPECT_NE(text.find("\"kind\": \"train\""), std::string::npos);
  EXPECT_NE(text.find("\"checkpoint\": \"sl.ckpt\""), std::string::npos);
  EXPECT_NE(text.find("\"seeds\""), std::string::npos);
  EXPECT_EQ(text, manifest_json(cfg, {"train", "sl", "sl.ckpt", "", "", "metrics.csv"}));
}
