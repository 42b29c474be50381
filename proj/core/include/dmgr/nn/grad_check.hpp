// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "dmgr/nn/param_set.hpp"

namespace dmgr::nn {

struct GradCheckReport {
  /// max relative error for each parameter, in name order
  std::vector<std::pair<std::string, double>> per_parameter;
  double max_relative_error = 0.0;
  std::string worst_parameter;
  std::size_t worst_index = 0;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
};

/// Scalar loss evaluated at the given parameter values.
using LossFn = std::function<double(const ParamSetD&)>;
/// Writes d(loss)/d(params) into params.grad(...); gradients arrive zeroed.
using GradFn = std::function<void(ParamSetD&)>;

/// Compares the analytic gradient with central differences
///   (L(θ + ε e_i) − L(θ − ε e_i)) / 2ε
/// entry by entry, scoring |a − n| / max(|a|, |n|, floor). The floor keeps
/// entries far below the difference quotient's roundoff from dominating.
/// `max_entries_per_param` > 0 checks an evenly strided subset of each tensor.
inline constexpr double kGradCheckFloor = 1e-6;

GradCheckReport grad_check(const LossFn& loss, const GradFn& grad, ParamSetD params,
                           double epsilon, std::size_t max_entries_per_param = 0,
                           double floor = kGradCheckFloor);

}  // namespace dmgr::nn
