// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <span>
#include <string>
#include <vector>

#include "dmgr/nn/linalg.hpp"
#include "dmgr/nn/param_set.hpp"

namespace dmgr::nn {

/// Activations kept from a forward step for the backward pass.
template <typename T>
struct GruCache {
  std::vector<T> x;
  std::vector<T> h_prev;
  std::vector<T> z;          // update gate
  std::vector<T> r;          // reset gate
  std::vector<T> reset_h;    // r ⊙ h_prev
  std::vector<T> candidate;  // tanh branch
  std::vector<T> h;
};

/// Single-layer gated recurrent unit:
///   z = σ(W_z x + U_z h + b_z), r = σ(W_r x + U_r h + b_r)
///   ĥ = tanh(W_h x + U_h (r ⊙ h) + b_h), h' = (1 − z) ⊙ h + z ⊙ ĥ
/// The cell output equals the new hidden state.
class GruCell {
 public:
  GruCell(std::string prefix, std::size_t input, std::size_t hidden)
      : prefix_(std::move(prefix)), input_(input), hidden_(hidden) {}

  std::size_t input_size() const noexcept { return input_; }
  std::size_t hidden_size() const noexcept { return hidden_; }
  std::string name(const char* leaf) const { return prefix_ + "." + leaf; }

  template <typename T>
  void declare(BasicParamSet<T>& params) const {
    for (const char* gate : {"z", "r", "h"}) {
      params.add(prefix_ + ".W_" + gate, {hidden_, input_});
      params.add(prefix_ + ".U_" + gate, {hidden_, hidden_});
      params.add(prefix_ + ".b_" + gate, {hidden_});
    }
  }

  template <typename T>
  GruCache<T> forward(const BasicParamSet<T>& p, std::span<const T> x,
                      std::span<const T> h_prev) const {
    detail::require(x.size() == input_, "gru input", input_, x.size());
    detail::require(h_prev.size() == hidden_, "gru hidden", hidden_, h_prev.size());
    GruCache<T> c;
    c.x.assign(x.begin(), x.end());
    c.h_prev.assign(h_prev.begin(), h_prev.end());
    c.z = gate(p, "z", x, h_prev);
    c.r = gate(p, "r", x, h_prev);
    for (auto& v : c.z) v = sigmoid(v);
    for (auto& v : c.r) v = sigmoid(v);

    c.reset_h.resize(hidden_);
    for (std::size_t i = 0; i < hidden_; ++i) c.reset_h[i] = c.r[i] * h_prev[i];
    c.candidate = gate(p, "h", x, std::span<const T>(c.reset_h));
    for (auto& v : c.candidate) v = std::tanh(v);

    c.h.resize(hidden_);
    for (std::size_t i = 0; i < hidden_; ++i) {
      c.h[i] = (T{1} - c.z[i]) * h_prev[i] + c.z[i] * c.candidate[i];
    }
    return c;
  }

  /// Accumulates parameter gradients into p.grad(...); adds into dx and
  /// overwrites dh_prev.
  template <typename T>
  void backward(BasicParamSet<T>& p, const GruCache<T>& c, std::span<const T> dh,
                std::span<T> dx, std::span<T> dh_prev) const {
    detail::require(dh.size() == hidden_, "gru dh", hidden_, dh.size());
    detail::require(dh_prev.size() == hidden_, "gru dh_prev", hidden_, dh_prev.size());
    std::vector<T> da_h(hidden_), da_z(hidden_), da_r(hidden_), d_reset_h(hidden_, T{0});
    for (std::size_t i = 0; i < hidden_; ++i) {
      dh_prev[i] = dh[i] * (T{1} - c.z[i]);
      const T d_cand = dh[i] * c.z[i];
      const T dz = dh[i] * (c.candidate[i] - c.h_prev[i]);
      da_h[i] = d_cand * (T{1} - c.candidate[i] * c.candidate[i]);
      da_z[i] = dz * c.z[i] * (T{1} - c.z[i]);
    }

    std::span<const T> x(c.x), hp(c.h_prev), rh(c.reset_h);
    outer_add(p.grad(name("W_h")), std::span<const T>(da_h), x);
    outer_add(p.grad(name("U_h")), std::span<const T>(da_h), rh);
    add_to(p.grad(name("b_h")), da_h);
    matvec_t_add(p.value(name("W_h")), std::span<const T>(da_h), dx);
    matvec_t_add(p.value(name("U_h")), std::span<const T>(da_h), std::span<T>(d_reset_h));

    for (std::size_t i = 0; i < hidden_; ++i) {
      const T dr = d_reset_h[i] * c.h_prev[i];
      dh_prev[i] += d_reset_h[i] * c.r[i];
      da_r[i] = dr * c.r[i] * (T{1} - c.r[i]);
    }

    for (const auto& [leaf, da] :
         {std::pair<const char*, const std::vector<T>*>{"z", &da_z}, {"r", &da_r}}) {
      const std::string g(leaf);
      std::span<const T> d(*da);
      outer_add(p.grad(prefix_ + ".W_" + g), d, x);
      outer_add(p.grad(prefix_ + ".U_" + g), d, hp);
      add_to(p.grad(prefix_ + ".b_" + g), *da);
      matvec_t_add(p.value(prefix_ + ".W_" + g), d, dx);
      matvec_t_add(p.value(prefix_ + ".U_" + g), d, dh_prev);
    }
  }

 private:
  template <typename T>
  std::vector<T> gate(const BasicParamSet<T>& p, const std::string& g,
                      std::span<const T> x, std::span<const T> h) const {
    const auto& b = p.value(prefix_ + ".b_" + g);
    std::vector<T> a(b.data().begin(), b.data().end());
    matvec_add(p.value(prefix_ + ".W_" + g), x, std::span<T>(a));
    matvec_add(p.value(prefix_ + ".U_" + g), h, std::span<T>(a));
    return a;
  }

  template <typename T>
  static void add_to(BasicTensor<T>& dst, const std::vector<T>& src) {
    for (std::size_t i = 0; i < src.size(); ++i) dst[i] += src[i];
  }

  std::string prefix_;
  std::size_t input_;
  std::size_t hidden_;
};

}  // namespace dmgr::nn
