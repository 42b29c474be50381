// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "dmgr/nn/linear.hpp"
#include "dmgr/nn/param_set.hpp"

namespace dmgr::nn {

using TokenId = std::uint32_t;

struct TextCnnConfig {
  std::size_t vocab_size = 0;
  std::size_t embed_dim = 32;
  std::size_t filters = 32;  // per width
  std::size_t out_dim = 64;
  std::size_t max_len = 16;
  std::vector<std::size_t> widths{2, 3, 4};
  TokenId pad_id = 0;
};

template <typename T>
struct TextCnnCache {
  std::vector<TokenId> tokens;          // padded to max_len
  std::vector<T> embedded;              // max_len x embed_dim
  std::vector<T> pooled;                // widths.size() * filters
  std::vector<std::size_t> argmax;      // time index of each pooled max
};

/// Sentence encoder: embedding lookup, 1-D convolutions of several widths
/// with rectified outputs, max-over-time pooling, and a linear map.
class TextCnn {
 public:
  TextCnn(std::string prefix, TextCnnConfig cfg)
      : prefix_(std::move(prefix)),
        cfg_(std::move(cfg)),
        proj_(prefix_ + ".proj", cfg_.widths.size() * cfg_.filters, cfg_.out_dim, true) {
    for (auto w : cfg_.widths) {
      if (w == 0 || w > cfg_.max_len) {
        throw ValidationError("text-cnn width must be in [1, max_len]");
      }
    }
  }

  const TextCnnConfig& config() const noexcept { return cfg_; }
  std::string embedding_name() const { return prefix_ + ".embedding"; }
  std::string conv_weight(std::size_t w) const {
    return prefix_ + ".conv" + std::to_string(w) + ".weight";
  }
  std::string conv_bias(std::size_t w) const {
    return prefix_ + ".conv" + std::to_string(w) + ".bias";
  }

  template <typename T>
  void declare(BasicParamSet<T>& params) const {
    params.add(embedding_name(), {cfg_.vocab_size, cfg_.embed_dim});
    for (auto w : cfg_.widths) {
      params.add(conv_weight(w), {cfg_.filters, w * cfg_.embed_dim});
      params.add(conv_bias(w), {cfg_.filters});
    }
    proj_.declare(params);
  }

  /// Pads with pad_id or truncates to max_len. Out-of-range ids throw.
  std::vector<TokenId> fit(std::span<const TokenId> tokens) const {
    std::vector<TokenId> out(cfg_.max_len, cfg_.pad_id);
    const std::size_t n = std::min(tokens.size(), cfg_.max_len);
    for (std::size_t i = 0; i < n; ++i) {
      if (tokens[i] >= cfg_.vocab_size) {
        throw ValidationError("token id " + std::to_string(tokens[i]) +
                              " outside vocabulary of size " +
                              std::to_string(cfg_.vocab_size));
      }
      out[i] = tokens[i];
    }
    return out;
  }

  template <typename T>
  std::vector<T> forward(const BasicParamSet<T>& p, std::span<const TokenId> tokens,
                         TextCnnCache<T>* cache = nullptr) const {
    const std::size_t L = cfg_.max_len;
    const std::size_t E = cfg_.embed_dim;
    const std::size_t F = cfg_.filters;

    TextCnnCache<T> local;
    TextCnnCache<T>& c = cache ? *cache : local;
    c.tokens = fit(tokens);
    c.embedded.assign(L * E, T{0});
    const auto& emb = p.value(embedding_name());
    for (std::size_t t = 0; t < L; ++t) {
      auto row = emb.row(c.tokens[t]);
      std::copy(row.begin(), row.end(), c.embedded.begin() + t * E);
    }

    c.pooled.assign(cfg_.widths.size() * F, T{0});
    c.argmax.assign(cfg_.widths.size() * F, 0);
    for (std::size_t wi = 0; wi < cfg_.widths.size(); ++wi) {
      const std::size_t w = cfg_.widths[wi];
      const auto& k = p.value(conv_weight(w));
      const auto& b = p.value(conv_bias(w));
      const std::size_t span_len = w * E;
      for (std::size_t f = 0; f < F; ++f) {
        const T* kf = k.ptr() + f * span_len;
        T best{0};
        std::size_t best_t = 0;
        bool first = true;
        for (std::size_t t = 0; t + w <= L; ++t) {
          const T* in = c.embedded.data() + t * E;
          T acc = b[f];
          for (std::size_t j = 0; j < span_len; ++j) acc += kf[j] * in[j];
          const T act = acc > T{0} ? acc : T{0};
          if (first || act > best) {
            best = act;
            best_t = t;
            first = false;
          }
        }
        c.pooled[wi * F + f] = best;
        c.argmax[wi * F + f] = best_t;
      }
    }
    return proj_.forward(p, std::span<const T>(c.pooled));
  }

  template <typename T>
  void backward(BasicParamSet<T>& p, const TextCnnCache<T>& c,
                std::span<const T> dout) const {
    const std::size_t E = cfg_.embed_dim;
    const std::size_t F = cfg_.filters;
    std::vector<T> dpooled(c.pooled.size(), T{0});
    proj_.backward(p, std::span<const T>(c.pooled), dout, std::span<T>(dpooled));

    auto& demb = p.grad(embedding_name());
    for (std::size_t wi = 0; wi < cfg_.widths.size(); ++wi) {
      const std::size_t w = cfg_.widths[wi];
      const auto& k = p.value(conv_weight(w));
      auto& dk = p.grad(conv_weight(w));
      auto& db = p.grad(conv_bias(w));
      const std::size_t span_len = w * E;
      for (std::size_t f = 0; f < F; ++f) {
        const std::size_t idx = wi * F + f;
        // rectifier is flat at the pooled value when it is not positive
        if (c.pooled[idx] <= T{0} || dpooled[idx] == T{0}) continue;
        const T g = dpooled[idx];
        const std::size_t t0 = c.argmax[idx];
        db[f] += g;
        const T* kf = k.ptr() + f * span_len;
        T* dkf = dk.ptr() + f * span_len;
        const T* in = c.embedded.data() + t0 * E;
        for (std::size_t j = 0; j < span_len; ++j) dkf[j] += g * in[j];
        for (std::size_t j = 0; j < span_len; ++j) {
          const std::size_t t = t0 + j / E;
          demb.at(c.tokens[t], j % E) += g * kf[j];
        }
      }
    }
  }

 private:
  std::string prefix_;
  TextCnnConfig cfg_;
  Linear proj_;
};

}  // namespace dmgr::nn
