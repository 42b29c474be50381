// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <random>

#include "dmgr/nn/tensor.hpp"

namespace dmgr::nn {

/// Uniform Glorot: U(-a, a) with a = sqrt(6 / (fan_in + fan_out)).
template <typename T>
void glorot_uniform(BasicTensor<T>& t, std::mt19937_64& rng) {
  const double fan_out = static_cast<double>(t.rows());
  const double fan_in = static_cast<double>(t.cols());
  const double a = std::sqrt(6.0 / (fan_in + fan_out));
  std::uniform_real_distribution<double> dist(-a, a);
  for (auto& v : t.data()) v = static_cast<T>(dist(rng));
}

}  // namespace dmgr::nn
