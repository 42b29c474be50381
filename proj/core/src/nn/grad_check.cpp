// SPDX-License-Identifier: Apache-2.0
#include "dmgr/nn/grad_check.hpp"

#include <algorithm>
#include <cmath>

namespace dmgr::nn {

namespace {

double finite_loss(const LossFn& loss, const ParamSetD& params) {
  const double v = loss(params);
  if (!std::isfinite(v)) throw NonFiniteError("grad_check: loss is not finite");
  return v;
}

}  // namespace

GradCheckReport grad_check(const LossFn& loss, const GradFn& grad, ParamSetD params,
                           double epsilon, std::size_t max_entries_per_param,
                           double floor) {
  if (!(epsilon > 0.0)) throw ValidationError("grad_check: epsilon must be positive");
  if (!(floor > 0.0)) throw ValidationError("grad_check: floor must be positive");
  finite_loss(loss, params);
  params.zero_grad();
  grad(params);

  GradCheckReport report;
  for (const auto& name : params.names()) {
    auto& value = params.value(name);
    const auto& analytic = params.grad(name);
    const std::size_t n = value.size();
    std::size_t stride = 1;
    if (max_entries_per_param > 0 && n > max_entries_per_param) {
      stride = (n + max_entries_per_param - 1) / max_entries_per_param;
    }
    double worst = 0.0;
    std::size_t worst_i = 0;
    double worst_a = 0.0;
    double worst_n = 0.0;
    for (std::size_t i = 0; i < n; i += stride) {
      const double saved = value[i];
      value[i] = saved + epsilon;
      const double up = finite_loss(loss, params);
      value[i] = saved - epsilon;
      const double down = finite_loss(loss, params);
      value[i] = saved;
      const double numeric = (up - down) / (2.0 * epsilon);
      const double a = analytic[i];
      const double denom = std::max({std::abs(a), std::abs(numeric), floor});
      const double err = std::abs(a - numeric) / denom;
      if (err > worst || i == 0) {
        worst = std::max(worst, err);
        worst_i = i;
        worst_a = a;
        worst_n = numeric;
      }
    }
    report.per_parameter.emplace_back(name, worst);
    if (worst >= report.max_relative_error) {
      if (worst > report.max_relative_error || report.worst_parameter.empty()) {
        report.worst_parameter = name;
        report.worst_index = worst_i;
        report.worst_analytic = worst_a;
        report.worst_numeric = worst_n;
      }
      report.max_relative_error = worst;
    }
  }
  return report;
}

}  // namespace dmgr::nn
