// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dmgr/feedback/simulator.hpp"
#include "dmgr/manager/episode.hpp"
#include "dmgr/nn/optimizer.hpp"
#include "dmgr/training/episode_loss.hpp"
#include "dmgr/training/reward.hpp"

namespace dmgr::training {

enum class Phase : std::uint8_t { sl, mbpi, scst };

const char* phase_name(Phase phase);
Phase parse_phase(std::string_view name);

struct TrainConfig {
  Phase phase = Phase::sl;
  std::size_t batch_size = 16;
  std::size_t epochs = 30;
  std::size_t episodes_per_epoch = 0;  // 0: one episode per retrieval-set item
  double margin = 0.1;                 // m
  double exploration = 0.2;            // ε for continuing MBPI episodes
  nn::AdamOptions adam{};              // SL
  nn::RmsPropOptions rmsprop{};        // MBPI and SCST
  RewardSpec reward{};
  std::size_t top_k = 3;
  bool exclude_shown = true;
  std::uint64_t seed = 0;

  void validate() const;
  /// 30 epochs for SL, 10 for the policy phases.
  static TrainConfig defaults(Phase phase);
};

/// What an episode runs against: the model, the searched split and the user.
struct TrainingEnv {
  const manager::ManagerModel& model;
  const RetrievalSet& set;
  const feedback::FeedbackSource& feedback;

  const corpus::FeatureBank& bank() const noexcept { return set.bank(); }
};

/// Q(h_t, a): from `state` (t turns done), show `action`, then follow the
/// greedy policy to the horizon; Σ γ^{t'−t} r_{t'} over that one rollout.
double estimate_action_value(const TrainingEnv& env, const nn::ParamSet& params, ItemId target,
                             const manager::DialogState& state, ItemId action,
                             const TrainConfig& cfg);

/// Stochastic rollout with one triplet term per turn (fresh uniform negative).
EpisodeRecord generate_sl_episode(const TrainingEnv& env, const nn::ParamSet& params,
                                  const TrainConfig& cfg, std::uint64_t seed);

/// Rollout whose decision turns carry a cross-entropy term toward
/// a* = argmax_a Q over the current top-K; continues with a* w.p. 1 − ε.
EpisodeRecord generate_mbpi_episode(const TrainingEnv& env, const nn::ParamSet& params,
                                    const TrainConfig& cfg, std::uint64_t seed);

/// Stochastic rollout weighted by u − û, û from the greedy rollout with the
/// same target and first candidate.
struct ScstEpisode {
  EpisodeRecord record;
  double sampled_return = 0.0;
  double greedy_return = 0.0;
};
ScstEpisode generate_scst_episode(const TrainingEnv& env, const nn::ParamSet& params,
                                  const TrainConfig& cfg, std::uint64_t seed);

/// Mean episode loss; with `accumulate` the mean's gradient is added to params.
double batch_loss(const TrainingEnv& env, nn::ParamSet& params,
                  std::span<const EpisodeRecord> batch, double margin, bool accumulate);

struct StepResult {
  double loss = 0.0;
  double mean_percentile = 0.0;
  std::vector<EpisodeRecord> batch;
};

/// One optimizer update from freshly generated episodes (one per seed).
StepResult sl_step(const TrainingEnv& env, nn::ParamSet& params, nn::Optimizer& opt,
                   const TrainConfig& cfg, std::span<const std::uint64_t> seeds);
StepResult policy_improvement_step(const TrainingEnv& env, nn::ParamSet& params,
                                   nn::Optimizer& opt, const TrainConfig& cfg,
                                   std::span<const std::uint64_t> seeds);
StepResult scst_step(const TrainingEnv& env, nn::ParamSet& params, nn::Optimizer& opt,
                     const TrainConfig& cfg, std::span<const std::uint64_t> seeds);

struct MetricsRow {
  Phase phase = Phase::sl;
  std::size_t epoch = 0;
  std::size_t batch = 0;
  double loss = 0.0;
  double mean_percentile = 0.0;
};

std::string metrics_csv_header();
std::string metrics_csv_line(const MetricsRow& row);

struct TrainResult {
  nn::ParamSet params;
  std::vector<MetricsRow> rows;
  std::vector<double> epoch_loss;        // episode-weighted mean per epoch
  std::vector<double> epoch_percentile;
};

/// Writes metrics.csv and <phase>-epoch-NNN.ckpt per epoch plus <phase>.ckpt
/// at the end. On a non-finite loss or gradient the parameters from before
/// the failing step go to last-good.ckpt and the NonFiniteError propagates.
struct TrainOutput {
  std::filesystem::path dir;
  bool checkpoints = true;
};

TrainResult train(const TrainingEnv& env, nn::ParamSet params, const TrainConfig& cfg,
                  const std::optional<TrainOutput>& out = std::nullopt);

/// Episode seeds used by train(): deterministic in (cfg.seed, phase, index).
std::uint64_t episode_seed(const TrainConfig& cfg, std::uint64_t index);

}  // namespace dmgr::training
