// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <random>
#include <span>
#include <string_view>
#include <vector>

#include "dmgr/corpus/feature_bank.hpp"
#include "dmgr/errors.hpp"
#include "dmgr/nn/linalg.hpp"

namespace dmgr::manager {

using corpus::ItemId;
using corpus::RetrievalSet;

enum class SelectMode : std::uint8_t { stochastic, greedy };

const char* mode_name(SelectMode mode);
SelectMode parse_mode(std::string_view name);

/// Softmax over the K nearest eligible rows: π(j) ∝ exp(−d_j).
template <typename T>
struct BasicCandidateDistribution {
  std::vector<ItemId> ids;   // nearest first, ties by lower id
  std::vector<T> distances;
  std::vector<T> probs;

  std::size_t size() const noexcept { return ids.size(); }
  /// Position of `id` in the candidate list, or size() when absent.
  std::size_t index_of(ItemId id) const {
    return static_cast<std::size_t>(std::find(ids.begin(), ids.end(), id) - ids.begin());
  }
  T log_prob(std::size_t k) const {
    const T shift = *std::min_element(distances.begin(), distances.end());
    T z{0};
    for (const T d : distances) z += std::exp(-(d - shift));
    return -(distances[k] - shift) - std::log(z);
  }
};

using CandidateDistribution = BasicCandidateDistribution<float>;

/// `excluded` is typically the handful of items already shown.
template <typename T>
BasicCandidateDistribution<T> candidate_distribution(std::span<const T> s,
                                                     const RetrievalSet& set, std::size_t k,
                                                     std::span<const ItemId> excluded) {
  if (k == 0) throw ValidationError("candidate count K must be at least 1");
  std::size_t blocked = 0;
  for (const ItemId id : excluded) blocked += set.contains(id) ? 1 : 0;
  if (set.size() < blocked + k) {
    throw ValidationError("only " + std::to_string(set.size() - blocked) +
                          " eligible items for K=" + std::to_string(k));
  }

  struct Hit {
    T d;
    ItemId id;
  };
  std::vector<Hit> best;  // sorted ascending by (d, id), at most k
  best.reserve(k + 1);
  for (const ItemId id : set.ids()) {
    if (std::find(excluded.begin(), excluded.end(), id) != excluded.end()) continue;
    const T d = nn::l2_distance(s, set.feature(id));
    if (best.size() == k && !(d < best.back().d)) continue;  // ids ascend: equal d loses
    auto pos = std::upper_bound(best.begin(), best.end(), d,
                                [](T v, const Hit& h) { return v < h.d; });
    best.insert(pos, Hit{d, id});
    if (best.size() > k) best.pop_back();
  }

  BasicCandidateDistribution<T> out;
  const T shift = best.front().d;
  T z{0};
  for (const Hit& h : best) {
    out.ids.push_back(h.id);
    out.distances.push_back(h.d);
    const T e = std::exp(-(h.d - shift));
    out.probs.push_back(e);
    z += e;
  }
  for (T& p : out.probs) p /= z;
  return out;
}

/// Greedy: highest probability, ties by lower id. Stochastic: one draw.
template <typename T>
ItemId select_candidate(const BasicCandidateDistribution<T>& dist, SelectMode mode,
                        std::mt19937_64& rng) {
  if (dist.size() == 0) throw ValidationError("empty candidate distribution");
  std::size_t pick = 0;
  if (mode == SelectMode::greedy) {
    for (std::size_t k = 1; k < dist.size(); ++k) {
      if (dist.probs[k] > dist.probs[pick] ||
          (dist.probs[k] == dist.probs[pick] && dist.ids[k] < dist.ids[pick])) {
        pick = k;
      }
    }
    return dist.ids[pick];
  }
  const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
  double acc = 0.0;
  pick = dist.size() - 1;
  for (std::size_t k = 0; k < dist.size(); ++k) {
    acc += static_cast<double>(dist.probs[k]);
    if (u < acc) {
      pick = k;
      break;
    }
  }
  return dist.ids[pick];
}

/// Softmax of −distance over a fixed candidate list, in the given order.
template <typename T>
BasicCandidateDistribution<T> distribution_over(std::span<const T> s,
                                                const corpus::FeatureBank& bank,
                                                std::span<const ItemId> ids) {
  if (ids.empty()) throw ValidationError("empty candidate list");
  BasicCandidateDistribution<T> out;
  out.ids.assign(ids.begin(), ids.end());
  for (const ItemId id : ids) out.distances.push_back(nn::l2_distance(s, bank.row(id)));
  const T shift = *std::min_element(out.distances.begin(), out.distances.end());
  T z{0};
  for (const T d : out.distances) {
    out.probs.push_back(std::exp(-(d - shift)));
    z += out.probs.back();
  }
  for (T& p : out.probs) p /= z;
  return out;
}

/// Adds scale · ∂(log π(ids[k]))/∂s into ds.
template <typename T>
void log_prob_grad(std::span<const T> s, const corpus::FeatureBank& bank,
                   const BasicCandidateDistribution<T>& dist, std::size_t k, T scale,
                   std::span<T> ds) {
  // ∂ log π_k/∂s = −∇d_k + Σ_j π_j ∇d_j,  ∇d_j = (s − x_j)/d_j
  for (std::size_t j = 0; j < dist.size(); ++j) {
    const T d = dist.distances[j];
    if (d == T{0}) continue;
    const T w = (dist.probs[j] - (j == k ? T{1} : T{0})) * scale / d;
    const auto x = bank.row(dist.ids[j]);
    for (std::size_t i = 0; i < s.size(); ++i) ds[i] += w * (s[i] - static_cast<T>(x[i]));
  }
}

}  // namespace dmgr::manager
