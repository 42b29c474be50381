// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "dmgr/run/config.hpp"

namespace dmgr::run {

/// Corpus, frozen features, simulator and model built from a RunConfig.
/// Not movable: the simulator and retrieval sets refer into it.
class Workspace {
 public:
  explicit Workspace(const RunConfig& cfg);
  Workspace(const Workspace&) = delete;
  Workspace& operator=(const Workspace&) = delete;

  const RunConfig& config() const noexcept { return cfg_; }
  const corpus::Corpus& corpus() const noexcept { return corpus_; }
  const corpus::FeatureBank& bank() const noexcept { return bank_; }
  const feedback::Simulator& simulator() const noexcept { return sim_; }
  const corpus::RetrievalSet& train_set() const noexcept { return train_; }
  const corpus::RetrievalSet& test_set() const noexcept { return test_; }
  const manager::ManagerModel& model() const noexcept { return model_; }

  training::TrainingEnv training_env() const { return {model_, train_, sim_}; }
  nn::ParamSet init_params() const { return model_.init_params<float>(cfg_.model.init_seed); }
  /// Loads a checkpoint and checks it against the model layout.
  nn::ParamSet load_params(const std::filesystem::path& checkpoint) const;

 private:
  RunConfig cfg_;
  corpus::Corpus corpus_;
  corpus::ImageEncoder encoder_;
  corpus::FeatureBank bank_;
  feedback::Simulator sim_;
  corpus::RetrievalSet train_;
  corpus::RetrievalSet test_;
  manager::ManagerModel model_;
};

/// Provenance record written next to checkpoints and reports.
struct Manifest {
  std::string kind;  // "train" or "eval"
  std::string phase;
  std::string checkpoint;
  std::string init_checkpoint;
  std::string report;
  std::string metrics;
};

/// {kind, phase, config, corpus_file, grammar_file, checkpoint, ..., seeds}
std::string manifest_json(const RunConfig& cfg, const Manifest& m);
void write_manifest(const std::filesystem::path& path, const RunConfig& cfg, const Manifest& m);

}  // namespace dmgr::run
