// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "dmgr/corpus/corpus.hpp"
#include "dmgr/nn/tensor.hpp"

namespace dmgr::corpus {

/// One-hot per fine field (46 entries) followed by the 10 coarse values.
inline constexpr std::size_t kDescriptorWidth = 46 + kCoarseCount;

std::vector<float> descriptor_vector(const ItemDescriptor& item);

/// Frozen image encoder: tanh(P v) with P a seeded Gaussian projection from
/// the descriptor vector v to D dimensions. Never trained.
class ImageEncoder {
 public:
  static constexpr std::uint64_t kDefaultSeed = 0x1e5u;
  static constexpr float kProjectionScale = 0.25f;

  explicit ImageEncoder(std::size_t dim, std::uint64_t seed = kDefaultSeed);

  std::size_t dim() const noexcept { return dim_; }
  std::uint64_t seed() const noexcept { return seed_; }
  std::vector<float> encode(const ItemDescriptor& item) const;

 private:
  std::size_t dim_;
  std::uint64_t seed_;
  nn::Tensor projection_;  // dim x kDescriptorWidth
};

/// img_enc for a corpus item; invalid ids throw ValidationError.
std::vector<float> img_enc(const Corpus& corpus, const ImageEncoder& encoder, ItemId id);

/// N x D matrix whose row i is img_enc(i).
class FeatureBank {
 public:
  FeatureBank() = default;
  FeatureBank(nn::Tensor features, std::uint64_t projection_seed)
      : features_(std::move(features)), projection_seed_(projection_seed) {}

  std::size_t size() const noexcept { return features_.size() ? features_.rows() : 0; }
  std::size_t dim() const noexcept { return features_.size() ? features_.cols() : 0; }
  std::uint64_t projection_seed() const noexcept { return projection_seed_; }
  std::span<const float> row(ItemId id) const;
  const nn::Tensor& matrix() const noexcept { return features_; }

 private:
  nn::Tensor features_;
  std::uint64_t projection_seed_ = 0;
};

FeatureBank build_feature_bank(const Corpus& corpus, const ImageEncoder& encoder);

/// The subset of bank rows a dialog searches over (one split of the corpus).
class RetrievalSet {
 public:
  RetrievalSet(const FeatureBank& bank, std::vector<ItemId> ids);

  const FeatureBank& bank() const noexcept { return *bank_; }
  const std::vector<ItemId>& ids() const noexcept { return ids_; }
  std::size_t size() const noexcept { return ids_.size(); }
  bool contains(ItemId id) const;
  std::span<const float> feature(ItemId id) const { return bank_->row(id); }

 private:
  const FeatureBank* bank_;
  std::vector<ItemId> ids_;  // ascending
};

}  // namespace dmgr::corpus
