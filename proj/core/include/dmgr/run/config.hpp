// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "dmgr/corpus/feature_bank.hpp"
#include "dmgr/eval/evaluate.hpp"
#include "dmgr/feedback/simulator.hpp"
#include "dmgr/manager/model.hpp"
#include "dmgr/training/trainer.hpp"

namespace dmgr::run {

struct CorpusSection {
  std::uint64_t seed = 0;
  std::size_t n = 1200;
  double train_fraction = 1000.0 / 1200.0;
  std::string file;  // load this corpus file instead of generating
  std::uint64_t projection_seed = corpus::ImageEncoder::kDefaultSeed;
};

struct ModelSection {
  std::size_t feature_dim = 64;
  std::size_t embed_dim = 32;
  std::size_t filters = 32;
  std::uint64_t init_seed = 1;
};

struct FeedbackSection {
  std::string preset = "nl";
  std::size_t max_phrases = 3;
  double dissimilarity_threshold = 0.6;
  std::uint64_t seed = 0;
  std::string grammar_file;  // empty: built-in grammar

  feedback::FeedbackConfig resolve() const;
};

struct TrainSection {
  std::size_t batch_size = 16;
  std::size_t sl_epochs = 30;
  std::size_t rl_epochs = 10;
  std::size_t episodes_per_epoch = 0;
  double margin = 0.1;
  double exploration = 0.2;
  float sl_learning_rate = 1e-3f;
  float rl_learning_rate = 1e-5f;
  double gamma = 1.0;
  std::size_t horizon = 5;
  std::size_t top_k = 3;
  std::uint64_t seed = 0;
};

/// Everything a run depends on. JSON form:
///   {"corpus": {...}, "model": {...}, "feedback": {...}, "train": {...},
///    "eval": {...}, "out_dir": "..."}
/// Every section and key is optional; unknown keys are rejected.
struct RunConfig {
  CorpusSection corpus;
  ModelSection model;
  FeedbackSection feedback;
  TrainSection train;
  eval::EvalOptions eval;
  std::string out_dir = "runs/default";

  training::TrainConfig train_config(training::Phase phase) const;
  manager::ManagerConfig manager_config(std::size_t vocab_size) const;
  void validate() const;
};

/// ConfigError on unknown keys, wrong types or invalid values; ParseError on
/// malformed JSON.
RunConfig parse_run_config(const std::string& json_text);
/// ConfigError when the file is missing.
RunConfig load_run_config(const std::filesystem::path& path);
std::string run_config_to_json(const RunConfig& cfg);

}  // namespace dmgr::run
