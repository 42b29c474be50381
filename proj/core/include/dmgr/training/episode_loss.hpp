// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <span>
#include <vector>

#include "dmgr/manager/candidates.hpp"
#include "dmgr/manager/model.hpp"
#include "dmgr/training/reward.hpp"

namespace dmgr::training {

using manager::TokenId;

/// Triplet term on s_turn: positive = target feature, negative = random item.
struct TripletTerm {
  std::size_t turn = 0;  // 0-based
  ItemId positive = 0;
  ItemId negative = 0;
};

/// −weight · log π(chosen | s_turn) with π the softmax over `candidates`.
struct PolicyTerm {
  std::size_t turn = 0;
  std::vector<ItemId> candidates;
  ItemId chosen = 0;
  double weight = 1.0;
};

/// Everything needed to replay an episode's forward pass and its loss.
struct EpisodeRecord {
  ItemId target = 0;
  std::vector<ItemId> shown;                  // a_1..a_T
  std::vector<std::vector<TokenId>> tokens;   // o_1..o_T
  std::vector<double> rewards;                // r_1..r_T
  std::vector<TripletTerm> triplets;
  std::vector<PolicyTerm> policy;
};

/// Replays the record through the manager and returns its loss. With
/// `grad_scale` non-zero, adds grad_scale · ∂loss/∂θ into params' gradients
/// (backpropagation through time over the whole episode).
template <typename T>
T episode_loss(const manager::ManagerModel& model, nn::BasicParamSet<T>& params,
               const corpus::FeatureBank& bank, const EpisodeRecord& rec, T margin,
               T grad_scale = T{0}) {
  const std::size_t n = rec.shown.size();
  const std::size_t D = model.dim();
  if (rec.tokens.size() != n) throw ValidationError("episode record: tokens/shown mismatch");
  const bool want_grad = grad_scale != T{0};

  std::vector<manager::TurnCache<T>> caches(want_grad ? n : 0);
  std::vector<std::vector<T>> s(n);
  std::vector<T> h(D, T{0});
  for (std::size_t t = 0; t < n; ++t) {
    auto out = model.turn(params, bank.row(rec.shown[t]), std::span<const TokenId>(rec.tokens[t]),
                          std::span<const T>(h), want_grad ? &caches[t] : nullptr);
    s[t] = std::move(out.s);
    h = std::move(out.h);
  }

  std::vector<std::vector<T>> ds(n, std::vector<T>(D, T{0}));
  T loss{0};
  for (const auto& term : rec.triplets) {
    if (term.turn >= n) throw ValidationError("triplet term past episode end");
    const auto st = std::span<const T>(s[term.turn]);
    if (want_grad) {
      loss += triplet_loss_grad(st, bank.row(term.positive), bank.row(term.negative), margin,
                                grad_scale, std::span<T>(ds[term.turn]));
    } else {
      loss += triplet_loss(st, bank.row(term.positive), bank.row(term.negative), margin);
    }
  }
  for (const auto& term : rec.policy) {
    if (term.turn >= n) throw ValidationError("policy term past episode end");
    const auto st = std::span<const T>(s[term.turn]);
    const auto dist =
        manager::distribution_over(st, bank, std::span<const ItemId>(term.candidates));
    const std::size_t k = dist.index_of(term.chosen);
    if (k == dist.size()) throw ValidationError("policy term: chosen item not a candidate");
    const T w = static_cast<T>(term.weight);
    loss -= w * dist.log_prob(k);
    if (want_grad && w != T{0}) {
      manager::log_prob_grad(st, bank, dist, k, -w * grad_scale, std::span<T>(ds[term.turn]));
    }
  }

  if (want_grad) {
    std::vector<T> dh_next(D, T{0});
    std::vector<T> dh_prev(D, T{0});
    for (std::size_t t = n; t-- > 0;) {
      model.backward_turn(params, caches[t], std::span<const T>(ds[t]),
                          std::span<const T>(dh_next), std::span<T>(dh_prev));
      std::swap(dh_next, dh_prev);
    }
  }
  return loss;
}

}  // namespace dmgr::training
