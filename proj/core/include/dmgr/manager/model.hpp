// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "dmgr/nn/gru.hpp"
#include "dmgr/nn/init.hpp"
#include "dmgr/nn/linear.hpp"
#include "dmgr/nn/param_set.hpp"
#include "dmgr/nn/text_cnn.hpp"

namespace dmgr::manager {

using nn::TokenId;

struct ManagerConfig {
  std::size_t feature_dim = 64;  // D
  std::size_t embed_dim = 32;    // E
  std::size_t filters = 32;      // F per convolution width
  std::size_t vocab_size = 0;
  std::size_t max_tokens = 16;
  std::size_t top_k = 3;         // K
  std::size_t horizon = 5;       // T
  bool exclude_shown = true;

  void validate() const;
};

/// Activations of one dialog turn, enough to backpropagate through it.
template <typename T>
struct TurnCache {
  nn::TextCnnCache<T> text;
  std::vector<T> joint;  // image feature ⊕ text feature (2D)
  std::vector<T> x;      // response representation
  nn::GruCache<T> gru;
  std::vector<T> s;      // history representation
};

template <typename T>
struct StateUpdate {
  std::vector<T> s;
  std::vector<T> h;
};

/// Response Encoder + State Tracker.
///   x_t = W (ImgEnc(a_t) ⊕ TxtEnc(o_t)),  h_t = GRU(x_t, h_{t-1}),  s_t = W^s h_t
/// Parameters live under "response." (θ_r) and "state." (θ_s).
class ManagerModel {
 public:
  explicit ManagerModel(ManagerConfig cfg)
      : cfg_((cfg.validate(), cfg)),
        text_("response.text", nn::TextCnnConfig{cfg_.vocab_size, cfg_.embed_dim, cfg_.filters,
                                                  cfg_.feature_dim, cfg_.max_tokens,
                                                  {2, 3, 4}, 0}),
        fusion_("response.fusion", 2 * cfg_.feature_dim, cfg_.feature_dim, false),
        gru_("state.gru", cfg_.feature_dim, cfg_.feature_dim),
        proj_("state.proj", cfg_.feature_dim, cfg_.feature_dim, false) {}

  const ManagerConfig& config() const noexcept { return cfg_; }
  std::size_t dim() const noexcept { return cfg_.feature_dim; }
  const nn::TextCnn& text_encoder() const noexcept { return text_; }
  const nn::GruCell& gru() const noexcept { return gru_; }

  /// All parameters, zero-filled.
  template <typename T = float>
  nn::BasicParamSet<T> layout() const {
    nn::BasicParamSet<T> p;
    text_.declare(p);
    fusion_.declare(p);
    gru_.declare(p);
    proj_.declare(p);
    return p;
  }

  /// Glorot-uniform matrices (embedding table included), zero biases.
  template <typename T = float>
  nn::BasicParamSet<T> init_params(std::uint64_t seed) const {
    auto p = layout<T>();
    std::mt19937_64 rng(seed);
    p.for_each([&](const std::string&, nn::BasicTensor<T>& value, nn::BasicTensor<T>&) {
      if (value.rank() == 2) nn::glorot_uniform(value, rng);
    });
    return p;
  }

  /// TxtEnc(o_t)
  template <typename T>
  std::vector<T> text_encode(const nn::BasicParamSet<T>& p, std::span<const TokenId> tokens,
                             nn::TextCnnCache<T>* cache = nullptr) const {
    return text_.forward(p, tokens, cache);
  }

  /// x_t = W (image ⊕ text)
  template <typename T>
  std::vector<T> encode_response(const nn::BasicParamSet<T>& p, std::span<const float> image,
                                 std::span<const TokenId> tokens,
                                 TurnCache<T>* cache = nullptr) const {
    nn::detail::require(image.size() == dim(), "image feature", dim(), image.size());
    TurnCache<T> local;
    TurnCache<T>& c = cache ? *cache : local;
    const auto txt = text_.forward(p, tokens, &c.text);
    c.joint.assign(image.begin(), image.end());
    c.joint.insert(c.joint.end(), txt.begin(), txt.end());
    c.x = fusion_.forward(p, std::span<const T>(c.joint));
    return c.x;
  }

  /// (g, h) = GRU(x, h_prev) with g = h; s = W^s g
  template <typename T>
  StateUpdate<T> track_state(const nn::BasicParamSet<T>& p, std::span<const T> x,
                             std::span<const T> h_prev, TurnCache<T>* cache = nullptr) const {
    auto g = gru_.forward(p, x, h_prev);
    StateUpdate<T> out;
    out.s = proj_.forward(p, std::span<const T>(g.h));
    out.h = g.h;
    if (cache) {
      cache->gru = std::move(g);
      cache->s = out.s;
    }
    return out;
  }

  template <typename T>
  StateUpdate<T> turn(const nn::BasicParamSet<T>& p, std::span<const float> image,
                      std::span<const TokenId> tokens, std::span<const T> h_prev,
                      TurnCache<T>* cache = nullptr) const {
    TurnCache<T> local;
    TurnCache<T>& c = cache ? *cache : local;
    encode_response(p, image, tokens, &c);
    return track_state(p, std::span<const T>(c.x), h_prev, &c);
  }

  /// Backpropagates one turn. `ds` is dL/ds_t, `dh_next` the gradient arriving
  /// at h_t from later turns; writes dL/dh_{t-1} into dh_prev.
  template <typename T>
  void backward_turn(nn::BasicParamSet<T>& p, const TurnCache<T>& c, std::span<const T> ds,
                     std::span<const T> dh_next, std::span<T> dh_prev) const {
    const std::size_t D = dim();
    std::vector<T> dh(dh_next.begin(), dh_next.end());
    proj_.backward(p, std::span<const T>(c.gru.h), ds, std::span<T>(dh));

    std::vector<T> dx(D, T{0});
    gru_.backward(p, c.gru, std::span<const T>(dh), std::span<T>(dx), dh_prev);
    encode_response_backward(p, c, std::span<const T>(dx));
  }

  /// Backpropagates dL/dx_t into the fusion and text parameters.
  template <typename T>
  void encode_response_backward(nn::BasicParamSet<T>& p, const TurnCache<T>& c,
                                std::span<const T> dx) const {
    const std::size_t D = dim();
    std::vector<T> djoint(2 * D, T{0});
    fusion_.backward(p, std::span<const T>(c.joint), dx, std::span<T>(djoint));
    text_.backward(p, c.text, std::span<const T>(djoint).subspan(D, D));
  }

 private:
  ManagerConfig cfg_;
  nn::TextCnn text_;
  nn::Linear fusion_;
  nn::GruCell gru_;
  nn::Linear proj_;
};

}  // namespace dmgr::manager
