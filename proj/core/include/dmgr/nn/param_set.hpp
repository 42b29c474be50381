// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "dmgr/nn/tensor.hpp"

namespace dmgr::nn {

/// Named trainable tensors with a gradient accumulator of identical shape.
/// Names are ordered so iteration (and serialization) is deterministic.
template <typename T>
class BasicParamSet {
 public:
  struct Entry {
    BasicTensor<T> value;
    BasicTensor<T> grad;
  };

  BasicTensor<T>& add(const std::string& name, std::vector<std::size_t> dims) {
    if (entries_.contains(name)) {
      throw ValidationError("duplicate parameter '" + name + "'");
    }
    BasicTensor<T> value(dims);
    BasicTensor<T> grad(std::move(dims));
    auto [it, _] = entries_.emplace(name, Entry{std::move(value), std::move(grad)});
    return it->second.value;
  }

  BasicTensor<T>& add(const std::string& name, BasicTensor<T> value) {
    auto& slot = add(name, value.dims());
    slot = std::move(value);
    return slot;
  }

  bool contains(const std::string& name) const { return entries_.contains(name); }
  std::size_t count() const noexcept { return entries_.size(); }

  BasicTensor<T>& value(const std::string& name) { return entry(name).value; }
  const BasicTensor<T>& value(const std::string& name) const {
    return entry(name).value;
  }
  BasicTensor<T>& grad(const std::string& name) { return entry(name).grad; }
  const BasicTensor<T>& grad(const std::string& name) const {
    return entry(name).grad;
  }

  std::vector<std::string> names() const {
    std::vector<std::string> out;
    out.reserve(entries_.size());
    for (const auto& [name, _] : entries_) out.push_back(name);
    return out;
  }

  std::size_t scalar_count() const {
    std::size_t n = 0;
    for (const auto& [_, e] : entries_) n += e.value.size();
    return n;
  }

  void zero_grad() {
    for (auto& [_, e] : entries_) e.grad.fill(T{0});
  }

  /// f(name, value, grad)
  template <typename F>
  void for_each(F&& f) {
    for (auto& [name, e] : entries_) f(name, e.value, e.grad);
  }
  template <typename F>
  void for_each(F&& f) const {
    for (const auto& [name, e] : entries_) f(name, e.value, e.grad);
  }

  /// Adds other's gradients into this set's gradients, scaled by `scale`.
  void accumulate_grad(const BasicParamSet& other, T scale = T{1}) {
    for (auto& [name, e] : entries_) {
      const auto& g = other.grad(name);
      for (std::size_t i = 0; i < g.size(); ++i) e.grad[i] += scale * g[i];
    }
  }

  void scale_grad(T scale) {
    for (auto& [_, e] : entries_) {
      for (auto& g : e.grad.data()) g *= scale;
    }
  }

  /// Throws NonFiniteError naming the first parameter with a NaN/Inf gradient.
  void check_finite_grad() const {
    for (const auto& [name, e] : entries_) {
      for (const auto g : e.grad.data()) {
        if (!std::isfinite(g)) {
          throw NonFiniteError("non-finite gradient in parameter '" + name + "'");
        }
      }
    }
  }

  template <typename U>
  BasicParamSet<U> cast() const {
    BasicParamSet<U> out;
    for (const auto& [name, e] : entries_) {
      out.add(name, e.value.template cast<U>());
      out.grad(name) = e.grad.template cast<U>();
    }
    return out;
  }

  /// Values equal (names, shapes, and data); gradients are ignored.
  bool same_values(const BasicParamSet& other) const {
    if (entries_.size() != other.entries_.size()) return false;
    for (const auto& [name, e] : entries_) {
      if (!other.contains(name) || !(e.value == other.value(name))) return false;
    }
    return true;
  }

 private:
  Entry& entry(const std::string& name) {
    auto it = entries_.find(name);
    if (it == entries_.end()) throw ValidationError("unknown parameter '" + name + "'");
    return it->second;
  }
  const Entry& entry(const std::string& name) const {
    auto it = entries_.find(name);
    if (it == entries_.end()) throw ValidationError("unknown parameter '" + name + "'");
    return it->second;
  }

  std::map<std::string, Entry> entries_;
};

using ParamSet = BasicParamSet<float>;
using ParamSetD = BasicParamSet<double>;

}  // namespace dmgr::nn
