// SPDX-License-Identifier: Apache-2.0
#include "dmgr/corpus/feature_bank.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "dmgr/errors.hpp"

namespace dmgr::corpus {

std::vector<float> descriptor_vector(const ItemDescriptor& item) {
  std::vector<float> v(kDescriptorWidth, 0.0f);
  std::size_t offset = 0;
  for (std::size_t f = 0; f < kFineFieldCount; ++f) {
    v[offset + item.fine.get(static_cast<FineField>(f))] = 1.0f;
    offset += kFineFieldCardinality[f];
  }
  std::copy(item.coarse.begin(), item.coarse.end(), v.begin() + static_cast<std::ptrdiff_t>(offset));
  return v;
}

ImageEncoder::ImageEncoder(std::size_t dim, std::uint64_t seed)
    : dim_(dim), seed_(seed), projection_({dim, kDescriptorWidth}) {
  if (dim == 0) throw ValidationError("feature dimension must be positive");
  std::mt19937_64 rng(seed);
  std::normal_distribution<float> normal(0.0f, kProjectionScale);
  for (auto& w : projection_.data()) w = normal(rng);
}

std::vector<float> ImageEncoder::encode(const ItemDescriptor& item) const {
  const auto v = descriptor_vector(item);
  std::vector<float> out(dim_, 0.0f);
  for (std::size_t r = 0; r < dim_; ++r) {
    float acc = 0.0f;
    for (std::size_t c = 0; c < kDescriptorWidth; ++c) acc += projection_.at(r, c) * v[c];
    out[r] = std::tanh(acc);
  }
  return out;
}

std::vector<float> img_enc(const Corpus& corpus, const ImageEncoder& encoder, ItemId id) {
  return encoder.encode(corpus.item(id));
}

std::span<const float> FeatureBank::row(ItemId id) const {
  if (id >= size()) {
    throw ValidationError("feature bank has no row " + std::to_string(id));
  }
  return features_.row(id);
}

FeatureBank build_feature_bank(const Corpus& corpus, const ImageEncoder& encoder) {
  nn::Tensor features({corpus.size(), encoder.dim()});
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    const auto f = encoder.encode(corpus.items[i]);
    std::copy(f.begin(), f.end(), features.row(i).begin());
  }
  return FeatureBank(std::move(features), encoder.seed());
}

RetrievalSet::RetrievalSet(const FeatureBank& bank, std::vector<ItemId> ids)
    : bank_(&bank), ids_(std::move(ids)) {
  std::sort(ids_.begin(), ids_.end());
  if (std::adjacent_find(ids_.begin(), ids_.end()) != ids_.end()) {
    throw ValidationError("retrieval set ids must be unique");
  }
  for (auto id : ids_) {
    if (id >= bank.size()) throw ValidationError("retrieval set id outside bank");
  }
}

bool RetrievalSet::contains(ItemId id) const {
  return std::binary_search(ids_.begin(), ids_.end(), id);
}

}  // namespace dmgr::corpus
