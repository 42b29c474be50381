// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "dmgr/corpus/corpus.hpp"
#include "dmgr/feedback/grammar.hpp"
#include "dmgr/feedback/vocab.hpp"

namespace dmgr::feedback {

using corpus::ItemDescriptor;
using corpus::ItemId;

enum class Channel : std::uint8_t { natural_language, attribute };

inline constexpr double kAttributeNoise = 0.15;      // hand-crafted attribute estimates
inline constexpr double kDeepAttributeNoise = 0.05;  // learned attribute estimates

struct FeedbackConfig {
  Channel channel = Channel::natural_language;
  std::size_t max_phrases = 3;       // M
  std::size_t attribute_count = 3;   // n for the attribute channel
  double attribute_noise = 0.0;      // σ
  double dissimilarity_threshold = 0.6;  // τ
  std::uint64_t seed = 0;

  void validate() const;

  /// "nl", "attr<n>", "attr<n>_deep"; attr presets carry the matching noise level.
  static FeedbackConfig preset(std::string_view name);
  std::string name() const;
};

/// 7 categorical fields followed by the 10 coarse attributes.
inline constexpr std::size_t kFeatureCount = corpus::kFineFieldCount + corpus::kCoarseCount;

struct Discrepancy {
  std::array<double, kFeatureCount> value{};  // 0/1 for categorical, |Δ| for coarse
  std::array<double, kFeatureCount> score{};  // salience-weighted value
  double mean = 0.0;
};

/// Fixed salience weight per feature; categorical mismatches always outrank
/// coarse differences.
const std::array<double, kFeatureCount>& salience_weights();

Discrepancy discrepancy(const ItemDescriptor& target, const ItemDescriptor& candidate);

/// Features with positive score, highest first, ties by lower feature index.
std::vector<std::size_t> salience_order(const Discrepancy& d);

/// Deterministic per-pair verbosity in [1, M]: P(1) = 0.35, the remainder
/// spread evenly over 2..M.
std::size_t phrase_budget(const ItemDescriptor& target, const ItemDescriptor& candidate,
                          const FeedbackConfig& cfg);

struct CaptionDetail {
  std::string text;
  std::vector<std::size_t> features;  // features mentioned, in phrase order
  std::vector<bool> positional;       // phrase carries an "on <position>" modifier
  bool absolute = false;              // target described directly
};

CaptionDetail relative_caption_detail(const ItemDescriptor& target,
                                      const ItemDescriptor& candidate,
                                      const FeedbackConfig& cfg, const Grammar& grammar);

Utterance relative_caption(const ItemDescriptor& target, const ItemDescriptor& candidate,
                           const FeedbackConfig& cfg, const Grammar& grammar,
                           const Vocab& vocab);

/// Coarse vector as seen by an imperfect attribute predictor: Gaussian noise
/// seeded by (seed, item id), identical on every call.
std::array<float, corpus::kCoarseCount> noisy_coarse(const ItemDescriptor& item, double sigma,
                                                     std::uint64_t seed);

struct AttributeDetail {
  std::string text;
  std::vector<std::size_t> attributes;  // ascending attribute index
  std::vector<bool> more;
};

/// Rule-based relative-attribute feedback over the given (possibly noisy)
/// coarse views.
AttributeDetail attribute_feedback_detail(const ItemDescriptor& target,
                                          const std::array<float, corpus::kCoarseCount>& target_view,
                                          const ItemDescriptor& candidate,
                                          const std::array<float, corpus::kCoarseCount>& candidate_view,
                                          const FeedbackConfig& cfg, const Grammar& grammar);

Utterance attribute_feedback(const ItemDescriptor& target, const ItemDescriptor& candidate,
                             const FeedbackConfig& cfg, const Grammar& grammar,
                             const Vocab& vocab);

/// Anything that answers "how does the candidate differ from what you want?"
class FeedbackSource {
 public:
  virtual ~FeedbackSource() = default;
  virtual Utterance respond(ItemId target, ItemId candidate) const = 0;
};

/// User simulator over a corpus. Single-turn: output depends only on the
/// (target, candidate) pair and the configuration.
class Simulator final : public FeedbackSource {
 public:
  Simulator(const corpus::Corpus& corpus, Grammar grammar, FeedbackConfig cfg);

  Utterance respond(ItemId target, ItemId candidate) const override;
  std::string describe(ItemId target, ItemId candidate) const;

  const Vocab& vocab() const noexcept { return vocab_; }
  const Grammar& grammar() const noexcept { return grammar_; }
  const FeedbackConfig& config() const noexcept { return cfg_; }

 private:
  const corpus::Corpus* corpus_;
  Grammar grammar_;
  Vocab vocab_;
  FeedbackConfig cfg_;
  std::vector<std::array<float, corpus::kCoarseCount>> views_;  // frozen noisy views
};

}  // namespace dmgr::feedback
