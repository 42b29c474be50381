// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "dmgr/corpus/feature_bank.hpp"
#include "dmgr/feedback/simulator.hpp"
#include "dmgr/manager/candidates.hpp"
#include "dmgr/manager/model.hpp"

namespace dmgr::manager {

/// Running dialog: GRU hidden state, latest history vector and the items
/// shown so far (|shown| == turn).
template <typename T>
struct BasicDialogState {
  std::vector<T> h;
  std::vector<T> s;
  std::size_t turn = 0;
  std::vector<ItemId> shown;

  std::span<const ItemId> excluded(bool exclude_shown) const {
    return exclude_shown ? std::span<const ItemId>(shown) : std::span<const ItemId>();
  }
};

using DialogState = BasicDialogState<float>;

/// One manager turn: consume (a_t, o_t), update h and s.
template <typename T>
void advance(const ManagerModel& model, const nn::BasicParamSet<T>& params,
             const corpus::FeatureBank& bank, BasicDialogState<T>& state, ItemId candidate,
             std::span<const TokenId> tokens, TurnCache<T>* cache = nullptr) {
  if (state.h.empty()) state.h.assign(model.dim(), T{0});
  auto next = model.turn(params, bank.row(candidate), tokens, std::span<const T>(state.h), cache);
  state.h = std::move(next.h);
  state.s = std::move(next.s);
  state.shown.push_back(candidate);
  ++state.turn;
}

/// Per-episode policy state. `observe` consumes one (a_t, o_t) and returns s_t.
class PolicyEpisode {
 public:
  virtual ~PolicyEpisode() = default;
  virtual std::vector<float> observe(ItemId candidate, const feedback::Utterance& utterance) = 0;
  /// Forces a_1 instead of the uniform draw.
  virtual std::optional<ItemId> opening() const { return std::nullopt; }
};

class Policy {
 public:
  virtual ~Policy() = default;
  virtual std::unique_ptr<PolicyEpisode> begin_episode(ItemId target,
                                                       std::uint64_t seed) const = 0;
};

/// The trained (or freshly initialised) dialog manager.
class ManagerPolicy final : public Policy {
 public:
  ManagerPolicy(const ManagerModel& model, const nn::ParamSet& params,
                const corpus::FeatureBank& bank)
      : model_(&model), params_(&params), bank_(&bank) {}
  std::unique_ptr<PolicyEpisode> begin_episode(ItemId target, std::uint64_t seed) const override;

 private:
  const ManagerModel* model_;
  const nn::ParamSet* params_;
  const corpus::FeatureBank* bank_;
};

/// Shows the target first and pins the state to its feature.
class OraclePolicy final : public Policy {
 public:
  explicit OraclePolicy(const corpus::FeatureBank& bank) : bank_(&bank) {}
  std::unique_ptr<PolicyEpisode> begin_episode(ItemId target, std::uint64_t seed) const override;

 private:
  const corpus::FeatureBank* bank_;
};

/// Ignores everything and emits a fresh Gaussian state every turn.
class RandomStatePolicy final : public Policy {
 public:
  explicit RandomStatePolicy(std::size_t dim) : dim_(dim) {}
  std::unique_ptr<PolicyEpisode> begin_episode(ItemId target, std::uint64_t seed) const override;

 private:
  std::size_t dim_;
};

struct EpisodeOptions {
  std::size_t horizon = 5;
  std::size_t top_k = 3;
  SelectMode mode = SelectMode::greedy;
  bool exclude_shown = true;
};

struct TurnRecord {
  ItemId candidate = 0;
  feedback::Utterance utterance;
  double reward = 0.0;
  CandidateDistribution next;  // distribution a_{t+1} was drawn from; empty at t = T
  std::optional<ItemId> chosen;
  double chosen_log_prob = 0.0;
};

struct EpisodeTrace {
  ItemId target = 0;
  SelectMode mode = SelectMode::greedy;
  std::uint64_t seed = 0;
  std::vector<TurnRecord> turns;

  std::vector<double> rewards() const;
  std::vector<ItemId> candidates() const;
};

/// a_1 uniform over the retrieval set, then T feedback/selection cycles.
EpisodeTrace run_episode(const Policy& policy, const RetrievalSet& set,
                         const feedback::FeedbackSource& feedback, ItemId target,
                         const EpisodeOptions& opts, std::uint64_t seed);

/// Uniform draw from the retrieval set.
ItemId draw_item(const RetrievalSet& set, std::mt19937_64& rng);

/// {target, turns:[{candidate, utterance, reward, topk:[{id, prob}]}], mode, seed}
std::string trace_to_json_line(const EpisodeTrace& trace);
EpisodeTrace trace_from_json_line(std::string_view line);

}  // namespace dmgr::manager
