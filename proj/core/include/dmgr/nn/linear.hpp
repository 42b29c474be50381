// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <span>
#include <string>
#include <vector>

#include "dmgr/nn/linalg.hpp"
#include "dmgr/nn/param_set.hpp"

namespace dmgr::nn {

/// y = W x (+ b)
class Linear {
 public:
  Linear(std::string prefix, std::size_t in, std::size_t out, bool bias)
      : prefix_(std::move(prefix)), in_(in), out_(out), bias_(bias) {}

  std::size_t in_size() const noexcept { return in_; }
  std::size_t out_size() const noexcept { return out_; }
  std::string weight_name() const { return prefix_ + ".weight"; }
  std::string bias_name() const { return prefix_ + ".bias"; }

  template <typename T>
  void declare(BasicParamSet<T>& params) const {
    params.add(weight_name(), {out_, in_});
    if (bias_) params.add(bias_name(), {out_});
  }

  template <typename T>
  std::vector<T> forward(const BasicParamSet<T>& p, std::span<const T> x) const {
    std::vector<T> y(out_, T{0});
    if (bias_) {
      const auto& b = p.value(bias_name());
      std::copy(b.data().begin(), b.data().end(), y.begin());
    }
    matvec_add(p.value(weight_name()), x, std::span<T>(y));
    return y;
  }

  /// Accumulates dW (and db); adds W^T dy into dx.
  template <typename T>
  void backward(BasicParamSet<T>& p, std::span<const T> x, std::span<const T> dy,
                std::span<T> dx) const {
    outer_add(p.grad(weight_name()), dy, x);
    if (bias_) {
      auto& db = p.grad(bias_name());
      for (std::size_t i = 0; i < out_; ++i) db[i] += dy[i];
    }
    matvec_t_add(p.value(weight_name()), dy, dx);
  }

 private:
  std::string prefix_;
  std::size_t in_;
  std::size_t out_;
  bool bias_;
};

}  // namespace dmgr::nn
