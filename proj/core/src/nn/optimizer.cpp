// SPDX-License-Identifier: Apache-2.0
#include "dmgr/nn/optimizer.hpp"

#include <cmath>

namespace dmgr::nn {

namespace {

std::map<std::string, Tensor> zeros_like(const ParamSet& params) {
  std::map<std::string, Tensor> out;
  params.for_each([&](const std::string& name, const Tensor& value, const Tensor&) {
    out.emplace(name, Tensor(value.dims()));
  });
  return out;
}

void check_buffers(const ParamSet& params, const std::map<std::string, Tensor>& buf) {
  params.for_each([&](const std::string& name, const Tensor& value, const Tensor&) {
    auto it = buf.find(name);
    if (it == buf.end() || !it->second.same_shape(value)) {
      throw ShapeError("optimizer state does not match parameter '" + name + "'");
    }
  });
}

}  // namespace

Adam::Adam(const ParamSet& params, AdamOptions opts)
    : opts_(opts), m_(zeros_like(params)), v_(zeros_like(params)) {}

void Adam::step(ParamSet& params) {
  check_buffers(params, m_);
  params.check_finite_grad();
  ++steps_;
  const double t = static_cast<double>(steps_);
  const float c1 = static_cast<float>(1.0 - std::pow(opts_.beta1, t));
  const float c2 = static_cast<float>(1.0 - std::pow(opts_.beta2, t));
  params.for_each([&](const std::string& name, Tensor& value, Tensor& grad) {
    auto& m = m_.at(name);
    auto& v = v_.at(name);
    for (std::size_t i = 0; i < value.size(); ++i) {
      const float g = grad[i];
      m[i] = opts_.beta1 * m[i] + (1.0f - opts_.beta1) * g;
      v[i] = opts_.beta2 * v[i] + (1.0f - opts_.beta2) * g * g;
      const float m_hat = m[i] / c1;
      const float v_hat = v[i] / c2;
      value[i] -= opts_.learning_rate * m_hat / (std::sqrt(v_hat) + opts_.epsilon);
    }
    grad.fill(0.0f);
  });
}

RmsProp::RmsProp(const ParamSet& params, RmsPropOptions opts)
    : opts_(opts), ms_(zeros_like(params)) {}

void RmsProp::step(ParamSet& params) {
  check_buffers(params, ms_);
  params.check_finite_grad();
  ++steps_;
  params.for_each([&](const std::string& name, Tensor& value, Tensor& grad) {
    auto& ms = ms_.at(name);
    for (std::size_t i = 0; i < value.size(); ++i) {
      const float g = grad[i];
      ms[i] = opts_.decay * ms[i] + (1.0f - opts_.decay) * g * g;
      value[i] -= opts_.learning_rate * g / (std::sqrt(ms[i]) + opts_.epsilon);
    }
    grad.fill(0.0f);
  });
}

}  // namespace dmgr::nn
