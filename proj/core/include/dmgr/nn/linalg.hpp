// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <span>
#include <string>

#include "dmgr/nn/tensor.hpp"

namespace dmgr::nn {

namespace detail {
inline void require(bool ok, const char* op, std::size_t want, std::size_t got) {
  if (!ok) {
    throw ShapeError(std::string(op) + ": expected length " + std::to_string(want) +
                     ", got " + std::to_string(got));
  }
}
}  // namespace detail

/// y += W x for a rank-2 W.
template <typename T>
void matvec_add(const BasicTensor<T>& w, std::span<const T> x, std::span<T> y) {
  const std::size_t rows = w.rows();
  const std::size_t cols = w.cols();
  detail::require(x.size() == cols, "matvec (x)", cols, x.size());
  detail::require(y.size() == rows, "matvec (y)", rows, y.size());
  const T* wp = w.ptr();
  for (std::size_t r = 0; r < rows; ++r) {
    const T* wr = wp + r * cols;
    T acc{0};
    for (std::size_t c = 0; c < cols; ++c) acc += wr[c] * x[c];
    y[r] += acc;
  }
}

/// dx += W^T dy
template <typename T>
void matvec_t_add(const BasicTensor<T>& w, std::span<const T> dy, std::span<T> dx) {
  const std::size_t rows = w.rows();
  const std::size_t cols = w.cols();
  detail::require(dy.size() == rows, "matvec_t (dy)", rows, dy.size());
  detail::require(dx.size() == cols, "matvec_t (dx)", cols, dx.size());
  const T* wp = w.ptr();
  for (std::size_t r = 0; r < rows; ++r) {
    const T g = dy[r];
    if (g == T{0}) continue;
    const T* wr = wp + r * cols;
    for (std::size_t c = 0; c < cols; ++c) dx[c] += wr[c] * g;
  }
}

/// dW += dy x^T
template <typename T>
void outer_add(BasicTensor<T>& dw, std::span<const T> dy, std::span<const T> x) {
  const std::size_t rows = dw.rows();
  const std::size_t cols = dw.cols();
  detail::require(dy.size() == rows, "outer (dy)", rows, dy.size());
  detail::require(x.size() == cols, "outer (x)", cols, x.size());
  T* wp = dw.ptr();
  for (std::size_t r = 0; r < rows; ++r) {
    const T g = dy[r];
    if (g == T{0}) continue;
    T* wr = wp + r * cols;
    for (std::size_t c = 0; c < cols; ++c) wr[c] += g * x[c];
  }
}

template <typename T, typename U>
T squared_distance(std::span<const T> a, std::span<const U> b) {
  detail::require(a.size() == b.size(), "distance", a.size(), b.size());
  T acc{0};
  for (std::size_t i = 0; i < a.size(); ++i) {
    const T d = a[i] - static_cast<T>(b[i]);
    acc += d * d;
  }
  return acc;
}

template <typename T, typename U>
T l2_distance(std::span<const T> a, std::span<const U> b) {
  return std::sqrt(squared_distance(a, b));
}

inline float sigmoid(float v) { return 1.0f / (1.0f + std::exp(-v)); }
inline double sigmoid(double v) { return 1.0 / (1.0 + std::exp(-v)); }

}  // namespace dmgr::nn
