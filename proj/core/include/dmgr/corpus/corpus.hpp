// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "dmgr/corpus/descriptor.hpp"

namespace dmgr::corpus {

inline constexpr int kCorpusFormatVersion = 1;
inline constexpr std::size_t kMinCorpusSize = 10;
inline constexpr float kCoarseJitter = 0.1f;

enum class Split : std::uint8_t { train, test };

struct Corpus {
  std::uint64_t seed = 0;
  std::vector<ItemDescriptor> items;  // items[i].id == i
  std::vector<ItemId> train;          // ascending
  std::vector<ItemId> test;           // ascending

  std::size_t size() const noexcept { return items.size(); }
  const ItemDescriptor& item(ItemId id) const;
  const std::vector<ItemId>& ids(Split s) const noexcept {
    return s == Split::train ? train : test;
  }
  bool in_split(ItemId id, Split s) const;

  friend bool operator==(const Corpus&, const Corpus&) = default;
};

/// Noise-free coarse attribute scores implied by the fine features.
std::array<float, kCoarseCount> coarse_base(const FineFeatures& fine);

/// Draws fine features uniformly per field, derives the coarse vector as
/// clamp(base + U(-0.1, 0.1)), and splits ids with a seeded shuffle.
/// round(n * train_fraction) ids go to the training split.
Corpus generate_corpus(std::uint64_t seed, std::size_t n, double train_fraction);

/// Throws ValidationError on any broken invariant (dense ids, coarse range,
/// split partition).
void validate(const Corpus& corpus);

std::string corpus_to_json(const Corpus& corpus);
/// Parses and validates; malformed JSON raises ParseError with line/offset.
Corpus corpus_from_json(const std::string& text);

void save_corpus(const Corpus& corpus, const std::filesystem::path& path);
Corpus load_corpus(const std::filesystem::path& path);

}  // namespace dmgr::corpus
