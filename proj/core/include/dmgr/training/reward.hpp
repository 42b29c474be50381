// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <span>
#include <vector>

#include "dmgr/corpus/feature_bank.hpp"
#include "dmgr/errors.hpp"
#include "dmgr/nn/linalg.hpp"

namespace dmgr::training {

using corpus::ItemId;
using corpus::RetrievalSet;

struct RewardSpec {
  double gamma = 1.0;
  std::size_t horizon = 5;

  void validate() const {
    if (!(gamma >= 0.0 && gamma <= 1.0)) throw ConfigError("gamma must lie in [0, 1]");
    if (horizon == 0) throw ConfigError("horizon must be at least 1");
  }
};

/// (N − rank)/(N − 1) for the target among `set` sorted by distance to s.
/// Rows tied with the target and a lower id rank ahead of it.
template <typename T>
double ranking_percentile(std::span<const T> s, const RetrievalSet& set, ItemId target) {
  const std::size_t n = set.size();
  if (n < 2) throw ValidationError("ranking needs at least two items");
  if (!set.contains(target)) {
    throw ValidationError("target " + std::to_string(target) + " not in retrieval set");
  }
  const T dt = nn::l2_distance(s, set.feature(target));
  std::size_t ahead = 0;
  for (const ItemId id : set.ids()) {
    if (id == target) continue;
    const T d = nn::l2_distance(s, set.feature(id));
    if (d < dt || (d == dt && id < target)) ++ahead;
  }
  return static_cast<double>(n - 1 - ahead) / static_cast<double>(n - 1);
}

/// max(0, ‖s − x⁺‖ − ‖s − x⁻‖ + m)
template <typename T, typename U>
T triplet_loss(std::span<const T> s, std::span<const U> pos, std::span<const U> neg, T margin) {
  const T v = nn::l2_distance(s, pos) - nn::l2_distance(s, neg) + margin;
  return std::max(T{0}, v);
}

/// Adds scale · ∂triplet/∂s into ds; returns the loss.
template <typename T, typename U>
T triplet_loss_grad(std::span<const T> s, std::span<const U> pos, std::span<const U> neg,
                    T margin, T scale, std::span<T> ds) {
  const T dp = nn::l2_distance(s, pos);
  const T dn = nn::l2_distance(s, neg);
  const T v = dp - dn + margin;
  if (v <= T{0}) return T{0};
  for (std::size_t i = 0; i < s.size(); ++i) {
    T g{0};
    if (dp > T{0}) g += (s[i] - static_cast<T>(pos[i])) / dp;
    if (dn > T{0}) g -= (s[i] - static_cast<T>(neg[i])) / dn;
    ds[i] += scale * g;
  }
  return v;
}

/// Σ_t γ^{t−1} r_t
inline double compute_return(std::span<const double> rewards, double gamma) {
  double u = 0.0;
  double w = 1.0;
  for (const double r : rewards) {
    u += w * r;
    w *= gamma;
  }
  return u;
}

}  // namespace dmgr::training
