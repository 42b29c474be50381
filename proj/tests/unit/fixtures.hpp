// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <memory>
#include <random>
#include <vector>

#include "dmgr/corpus/corpus.hpp"
#include "dmgr/corpus/feature_bank.hpp"
#include "dmgr/feedback/grammar.hpp"
#include "dmgr/feedback/simulator.hpp"
#include "dmgr/manager/model.hpp"

namespace dmgr::testing {

/// Small corpus + bank + simulator, wired together. Not movable: the
/// simulator and retrieval sets point into it.
struct World {
  corpus::Corpus corpus;
  corpus::ImageEncoder encoder;
  corpus::FeatureBank bank;
  feedback::Simulator sim;
  corpus::RetrievalSet train;
  corpus::RetrievalSet test;

  World(std::size_t n, std::size_t dim, const char* preset = "nl", std::uint64_t seed = 0,
        double train_fraction = 5.0 / 6.0)
      : corpus(corpus::generate_corpus(seed, n, train_fraction)),
        encoder(dim),
        bank(corpus::build_feature_bank(corpus, encoder)),
        sim(corpus, feedback::default_grammar(), feedback::FeedbackConfig::preset(preset)),
        train(bank, corpus.train),
        test(bank, corpus.test) {}
  World(const World&) = delete;
  World& operator=(const World&) = delete;

  manager::ManagerConfig model_config(std::size_t embed = 8) const {
    manager::ManagerConfig cfg;
    cfg.feature_dim = bank.dim();
    cfg.embed_dim = embed;
    cfg.filters = embed;
    cfg.vocab_size = sim.vocab().size();
    return cfg;
  }
};

/// n x d bank of standard normal rows.
inline corpus::FeatureBank random_bank(std::size_t n, std::size_t d, std::uint64_t seed) {
  nn::Tensor t({n, d});
  std::mt19937_64 rng(seed);
  std::normal_distribution<float> g;
  for (auto& x : t.data()) x = g(rng);
  return corpus::FeatureBank(std::move(t), seed);
}

inline std::vector<corpus::ItemId> iota_ids(std::size_t n) {
  std::vector<corpus::ItemId> ids(n);
  for (std::size_t i = 0; i < n; ++i) ids[i] = static_cast<corpus::ItemId>(i);
  return ids;
}

inline std::vector<double> random_vector(std::size_t n, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  std::vector<double> v(n);
  for (auto& x : v) x = g(rng);
  return v;
}

}  // namespace dmgr::testing
