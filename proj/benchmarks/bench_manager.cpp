// SPDX-License-Identifier: Apache-2.0
#include <benchmark/benchmark.h>

#include <random>

#include "dmgr/corpus/corpus.hpp"
#include "dmgr/corpus/feature_bank.hpp"
#include "dmgr/feedback/grammar.hpp"
#include "dmgr/feedback/simulator.hpp"
#include "dmgr/manager/model.hpp"
#include "dmgr/training/trainer.hpp"

using namespace dmgr;

namespace {

struct Setup {
  corpus::Corpus corpus;
  corpus::ImageEncoder encoder;
  corpus::FeatureBank bank;
  feedback::Simulator sim;
  corpus::RetrievalSet set;
  manager::ManagerModel model;
  nn::ParamSet params;

  explicit Setup(std::size_t n, std::size_t dim = 64)
      : corpus(corpus::generate_corpus(0, n, 0.5)),
        encoder(dim),
        bank(corpus::build_feature_bank(corpus, encoder)),
        sim(corpus, feedback::default_grammar(), feedback::FeedbackConfig::preset("nl")),
        set(bank, all_ids(n)),
        model(config(dim, sim.vocab().size())),
        params(model.init_params<float>(1)) {}

  static std::vector<corpus::ItemId> all_ids(std::size_t n) {
    std::vector<corpus::ItemId> ids(n);
    for (std::size_t i = 0; i < n; ++i) ids[i] = static_cast<corpus::ItemId>(i);
    return ids;
  }
  static manager::ManagerConfig config(std::size_t dim, std::size_t vocab) {
    manager::ManagerConfig c;
    c.feature_dim = dim;
    c.embed_dim = 32;
    c.filters = 32;
    c.vocab_size = vocab;
    return c;
  }
  std::vector<float> random_state(std::uint64_t seed) const {
    std::mt19937_64 rng(seed);
    std::normal_distribution<float> g;
    std::vector<float> s(bank.dim());
    for (auto& x : s) x = g(rng);
    return s;
  }
};

void BM_CandidateDistribution(benchmark::State& state) {
  Setup w(static_cast<std::size_t>(state.range(0)));
  const auto s = w.random_state(1);
  const std::vector<corpus::ItemId> shown{1, 2, 3, 4};
  for (auto _ : state) {
    auto d = manager::candidate_distribution(std::span<const float>(s), w.set, 3,
                                             std::span<const corpus::ItemId>(shown));
    benchmark::DoNotOptimize(d.ids.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_CandidateDistribution)->Arg(1000)->Arg(10000);

void BM_RankingPercentile(benchmark::State& state) {
  Setup w(static_cast<std::size_t>(state.range(0)));
  const auto s = w.random_state(2);
  for (auto _ : state) {
    benchmark::DoNotOptimize(training::ranking_percentile(std::span<const float>(s), w.set, 7));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_RankingPercentile)->Arg(1000)->Arg(10000);

void BM_SimulatorRespond(benchmark::State& state) {
  Setup w(1000);
  corpus::ItemId i = 0;
  for (auto _ : state) {
    auto u = w.sim.respond(i % 1000, (i * 7 + 3) % 1000);
    benchmark::DoNotOptimize(u.tokens.data());
    ++i;
  }
}
BENCHMARK(BM_SimulatorRespond);

void BM_TurnForward(benchmark::State& state) {
  Setup w(1000, static_cast<std::size_t>(state.range(0)));
  const auto utt = w.sim.respond(1, 2);
  std::vector<float> h(w.model.dim(), 0.0f);
  for (auto _ : state) {
    auto out = w.model.turn(w.params, w.bank.row(2), std::span<const nn::TokenId>(utt.tokens),
                            std::span<const float>(h));
    benchmark::DoNotOptimize(out.s.data());
  }
}
BENCHMARK(BM_TurnForward)->Arg(64)->Arg(256);

void BM_TurnBackward(benchmark::State& state) {
  Setup w(1000, static_cast<std::size_t>(state.range(0)));
  const auto utt = w.sim.respond(1, 2);
  const std::size_t D = w.model.dim();
  std::vector<float> h(D, 0.0f), ds(D, 0.01f), dh_next(D, 0.0f), dh_prev(D);
  manager::TurnCache<float> cache;
  w.model.turn(w.params, w.bank.row(2), std::span<const nn::TokenId>(utt.tokens),
               std::span<const float>(h), &cache);
  for (auto _ : state) {
    w.model.backward_turn(w.params, cache, std::span<const float>(ds),
                          std::span<const float>(dh_next), std::span<float>(dh_prev));
    benchmark::DoNotOptimize(dh_prev.data());
  }
}
BENCHMARK(BM_TurnBackward)->Arg(64)->Arg(256);

void BM_EpisodeLossWithGradient(benchmark::State& state) {
  Setup w(1000);
  training::TrainingEnv env{w.model, w.set, w.sim};
  const auto cfg = training::TrainConfig::defaults(training::Phase::sl);
  const auto rec = training::generate_sl_episode(env, w.params, cfg, 5);
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        training::episode_loss<float>(w.model, w.params, w.bank, rec, 0.1f, 1.0f));
  }
}
BENCHMARK(BM_EpisodeLossWithGradient);

void BM_SlStep(benchmark::State& state) {
  Setup w(1000);
  training::TrainingEnv env{w.model, w.set, w.sim};
  const auto cfg = training::TrainConfig::defaults(training::Phase::sl);
  nn::Adam opt(w.params, cfg.adam);
  std::vector<std::uint64_t> seeds(16);
  std::uint64_t next = 0;
  for (auto _ : state) {
    for (auto& s : seeds) s = next++;
    benchmark::DoNotOptimize(training::sl_step(env, w.params, opt, cfg, seeds).loss);
  }
  state.SetItemsProcessed(state.iterations() * 16);
}
BENCHMARK(BM_SlStep)->Unit(benchmark::kMillisecond);

void BM_ActionValue(benchmark::State& state) {
  Setup w(1000);
  training::TrainingEnv env{w.model, w.set, w.sim};
  const auto cfg = training::TrainConfig::defaults(training::Phase::mbpi);
  manager::DialogState st;
  for (auto _ : state) {
    benchmark::DoNotOptimize(training::estimate_action_value(env, w.params, 11, st, 12, cfg));
  }
}
BENCHMARK(BM_ActionValue)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
