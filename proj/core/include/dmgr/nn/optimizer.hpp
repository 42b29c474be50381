// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <map>
#include <string>

#include "dmgr/nn/param_set.hpp"

namespace dmgr::nn {

struct AdamOptions {
  float learning_rate = 1e-3f;
  float beta1 = 0.9f;
  float beta2 = 0.999f;
  float epsilon = 1e-8f;
};

struct RmsPropOptions {
  float learning_rate = 1e-5f;
  float decay = 0.99f;
  float epsilon = 1e-8f;
};

/// Applies one update from the accumulated gradients, then zeroes them.
/// A NaN/Inf gradient aborts the step before any parameter is touched.
class Optimizer {
 public:
  virtual ~Optimizer() = default;

  virtual void step(ParamSet& params) = 0;

  std::uint64_t steps() const noexcept { return steps_; }
  virtual float learning_rate() const noexcept = 0;
  virtual void set_learning_rate(float lr) noexcept = 0;

 protected:
  std::uint64_t steps_ = 0;
};

class Adam final : public Optimizer {
 public:
  explicit Adam(const ParamSet& params, AdamOptions opts = {});

  void step(ParamSet& params) override;
  float learning_rate() const noexcept override { return opts_.learning_rate; }
  void set_learning_rate(float lr) noexcept override { opts_.learning_rate = lr; }
  const AdamOptions& options() const noexcept { return opts_; }
  const Tensor& first_moment(const std::string& name) const { return m_.at(name); }
  const Tensor& second_moment(const std::string& name) const { return v_.at(name); }

 private:
  AdamOptions opts_;
  std::map<std::string, Tensor> m_;
  std::map<std::string, Tensor> v_;
};

class RmsProp final : public Optimizer {
 public:
  explicit RmsProp(const ParamSet& params, RmsPropOptions opts = {});

  void step(ParamSet& params) override;
  float learning_rate() const noexcept override { return opts_.learning_rate; }
  void set_learning_rate(float lr) noexcept override { opts_.learning_rate = lr; }
  const RmsPropOptions& options() const noexcept { return opts_; }
  const Tensor& mean_square(const std::string& name) const { return ms_.at(name); }

 private:
  RmsPropOptions opts_;
  std::map<std::string, Tensor> ms_;
};

}  // namespace dmgr::nn
