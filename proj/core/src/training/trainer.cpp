// SPDX-License-Identifier: Apache-2.0
#include "dmgr/training/trainer.hpp"

#include <cmath>
#include <fstream>
#include <random>

#include "dmgr/nn/checkpoint.hpp"
#include "dmgr/seed.hpp"
#include "util/json_io.hpp"

namespace dmgr::training {

using manager::DialogState;
using manager::SelectMode;

const char* phase_name(Phase phase) {
  switch (phase) {
    case Phase::sl:
      return "sl";
    case Phase::mbpi:
      return "mbpi";
    case Phase::scst:
      return "scst";
  }
  return "sl";
}

Phase parse_phase(std::string_view name) {
  if (name == "sl") return Phase::sl;
  if (name == "mbpi") return Phase::mbpi;
  if (name == "scst") return Phase::scst;
  throw ConfigError("unknown training phase '" + std::string(name) + "'");
}

void TrainConfig::validate() const {
  if (batch_size == 0) throw ConfigError("batch_size must be at least 1");
  if (!(margin > 0.0)) throw ConfigError("margin must be positive");
  if (!(exploration >= 0.0 && exploration <= 1.0)) {
    throw ConfigError("exploration must lie in [0, 1]");
  }
  if (top_k == 0) throw ConfigError("top_k must be at least 1");
  if (!(adam.learning_rate >= 0.0f) || !(rmsprop.learning_rate >= 0.0f)) {
    throw ConfigError("learning rates must be non-negative");
  }
  reward.validate();
}

TrainConfig TrainConfig::defaults(Phase phase) {
  TrainConfig cfg;
  cfg.phase = phase;
  cfg.epochs = phase == Phase::sl ? 30 : 10;
  return cfg;
}

std::uint64_t episode_seed(const TrainConfig& cfg, std::uint64_t index) {
  return derive_seed(cfg.seed, 0x7472616e00ULL + static_cast<std::uint64_t>(cfg.phase), index);
}

namespace {

struct Turn {
  std::vector<TokenId> tokens;
  double reward;
};

Turn take_turn(const TrainingEnv& env, const nn::ParamSet& params, DialogState& st,
               ItemId target, ItemId candidate) {
  Turn turn{env.feedback.respond(target, candidate).tokens, 0.0};
  manager::advance(env.model, params, env.bank(), st, candidate,
                   std::span<const TokenId>(turn.tokens));
  turn.reward = ranking_percentile(std::span<const float>(st.s), env.set, target);
  return turn;
}

manager::CandidateDistribution top_k(const TrainingEnv& env, const DialogState& st,
                                     const TrainConfig& cfg) {
  return manager::candidate_distribution(std::span<const float>(st.s), env.set, cfg.top_k,
                                         st.excluded(cfg.exclude_shown));
}

void record_turn(EpisodeRecord& rec, ItemId candidate, Turn&& turn) {
  rec.shown.push_back(candidate);
  rec.tokens.push_back(std::move(turn.tokens));
  rec.rewards.push_back(turn.reward);
}

/// Runs to the horizon; `choose(t, state, dist)` picks a_{t+1}.
template <typename Choose>
EpisodeRecord rollout(const TrainingEnv& env, const nn::ParamSet& params,
                      const TrainConfig& cfg, ItemId target, ItemId first, Choose&& choose) {
  EpisodeRecord rec;
  rec.target = target;
  DialogState st;
  ItemId a = first;
  const std::size_t horizon = cfg.reward.horizon;
  for (std::size_t t = 0; t < horizon; ++t) {
    record_turn(rec, a, take_turn(env, params, st, target, a));
    if (t + 1 < horizon) a = choose(t, st, top_k(env, st, cfg), rec);
  }
  return rec;
}

double mean_reward(std::span<const EpisodeRecord> batch) {
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& rec : batch) {
    for (double r : rec.rewards) sum += r;
    n += rec.rewards.size();
  }
  return n ? sum / static_cast<double>(n) : 0.0;
}

StepResult apply_step(const TrainingEnv& env, nn::ParamSet& params, nn::Optimizer& opt,
                      const TrainConfig& cfg, std::vector<EpisodeRecord> batch) {
  StepResult out;
  params.zero_grad();
  out.loss = batch_loss(env, params, batch, cfg.margin, true);
  if (!std::isfinite(out.loss)) throw NonFiniteError("training loss is not finite");
  opt.step(params);
  out.mean_percentile = mean_reward(batch);
  out.batch = std::move(batch);
  return out;
}

}  // namespace

double estimate_action_value(const TrainingEnv& env, const nn::ParamSet& params, ItemId target,
                             const DialogState& state, ItemId action, const TrainConfig& cfg) {
  const std::size_t horizon = cfg.reward.horizon;
  if (state.turn >= horizon) throw ValidationError("no turns left to take an action");
  if (!env.set.contains(action)) throw ValidationError("action outside retrieval set");
  if (cfg.exclude_shown &&
      std::find(state.shown.begin(), state.shown.end(), action) != state.shown.end()) {
    throw ValidationError("action was already shown");
  }
  DialogState st = state;
  std::mt19937_64 unused(0);
  ItemId a = action;
  double q = 0.0;
  double w = 1.0;
  for (;;) {
    q += w * take_turn(env, params, st, target, a).reward;
    w *= cfg.reward.gamma;
    if (st.turn >= horizon) break;
    a = manager::select_candidate(top_k(env, st, cfg), SelectMode::greedy, unused);
  }
  return q;
}

EpisodeRecord generate_sl_episode(const TrainingEnv& env, const nn::ParamSet& params,
                                  const TrainConfig& cfg, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const ItemId target = manager::draw_item(env.set, rng);
  const ItemId first = manager::draw_item(env.set, rng);
  auto rec = rollout(env, params, cfg, target, first,
                     [&](std::size_t, const DialogState&, const manager::CandidateDistribution& d,
                         EpisodeRecord&) {
                       return manager::select_candidate(d, SelectMode::stochastic, rng);
                     });
  for (std::size_t t = 0; t < rec.shown.size(); ++t) {
    rec.triplets.push_back({t, target, manager::draw_item(env.set, rng)});
  }
  return rec;
}

EpisodeRecord generate_mbpi_episode(const TrainingEnv& env, const nn::ParamSet& params,
                                    const TrainConfig& cfg, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const ItemId target = manager::draw_item(env.set, rng);
  const ItemId first = manager::draw_item(env.set, rng);
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  return rollout(env, params, cfg, target, first,
                 [&](std::size_t t, const DialogState& st, const manager::CandidateDistribution& d,
                     EpisodeRecord& rec) {
                   std::size_t best = 0;
                   double best_q = -1.0;
                   for (std::size_t k = 0; k < d.size(); ++k) {
                     const double q = estimate_action_value(env, params, target, st, d.ids[k], cfg);
                     if (q > best_q || (q == best_q && d.ids[k] < d.ids[best])) {
                       best_q = q;
                       best = k;
                     }
                   }
                   rec.policy.push_back({t, d.ids, d.ids[best], 1.0});
                   if (coin(rng) < cfg.exploration) {
                     return manager::select_candidate(d, SelectMode::stochastic, rng);
                   }
                   return d.ids[best];
                 });
}

ScstEpisode generate_scst_episode(const TrainingEnv& env, const nn::ParamSet& params,
                                  const TrainConfig& cfg, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const ItemId target = manager::draw_item(env.set, rng);
  const ItemId first = manager::draw_item(env.set, rng);
  ScstEpisode out;
  out.record = rollout(env, params, cfg, target, first,
                       [&](std::size_t t, const DialogState&,
                           const manager::CandidateDistribution& d, EpisodeRecord& rec) {
                         const ItemId a = manager::select_candidate(d, SelectMode::stochastic, rng);
                         rec.policy.push_back({t, d.ids, a, 0.0});
                         return a;
                       });
  std::mt19937_64 unused(0);
  const auto greedy = rollout(env, params, cfg, target, first,
                              [&](std::size_t, const DialogState&,
                                  const manager::CandidateDistribution& d, EpisodeRecord&) {
                                return manager::select_candidate(d, SelectMode::greedy, unused);
                              });
  out.sampled_return = compute_return(out.record.rewards, cfg.reward.gamma);
  out.greedy_return = compute_return(greedy.rewards, cfg.reward.gamma);
  for (auto& term : out.record.policy) term.weight = out.sampled_return - out.greedy_return;
  return out;
}

double batch_loss(const TrainingEnv& env, nn::ParamSet& params,
                  std::span<const EpisodeRecord> batch, double margin, bool accumulate) {
  if (batch.empty()) throw ValidationError("empty batch");
  const float scale = accumulate ? 1.0f / static_cast<float>(batch.size()) : 0.0f;
  double total = 0.0;
  for (const auto& rec : batch) {
    total += static_cast<double>(episode_loss<float>(env.model, params, env.bank(), rec,
                                                     static_cast<float>(margin), scale));
  }
  return total / static_cast<double>(batch.size());
}

StepResult sl_step(const TrainingEnv& env, nn::ParamSet& params, nn::Optimizer& opt,
                   const TrainConfig& cfg, std::span<const std::uint64_t> seeds) {
  std::vector<EpisodeRecord> batch;
  for (auto s : seeds) batch.push_back(generate_sl_episode(env, params, cfg, s));
  return apply_step(env, params, opt, cfg, std::move(batch));
}

StepResult policy_improvement_step(const TrainingEnv& env, nn::ParamSet& params,
                                   nn::Optimizer& opt, const TrainConfig& cfg,
                                   std::span<const std::uint64_t> seeds) {
  std::vector<EpisodeRecord> batch;
  for (auto s : seeds) batch.push_back(generate_mbpi_episode(env, params, cfg, s));
  return apply_step(env, params, opt, cfg, std::move(batch));
}

StepResult scst_step(const TrainingEnv& env, nn::ParamSet& params, nn::Optimizer& opt,
                     const TrainConfig& cfg, std::span<const std::uint64_t> seeds) {
  std::vector<EpisodeRecord> batch;
  for (auto s : seeds) batch.push_back(generate_scst_episode(env, params, cfg, s).record);
  return apply_step(env, params, opt, cfg, std::move(batch));
}

std::string metrics_csv_header() { return "phase,epoch,batch,loss,mean_percentile"; }

std::string metrics_csv_line(const MetricsRow& row) {
  return std::string(phase_name(row.phase)) + "," + std::to_string(row.epoch) + "," +
         std::to_string(row.batch) + "," + util::format_float(row.loss) + "," +
         util::format_float(row.mean_percentile);
}

TrainResult train(const TrainingEnv& env, nn::ParamSet params, const TrainConfig& cfg,
                  const std::optional<TrainOutput>& out) {
  cfg.validate();
  const std::size_t per_epoch = cfg.episodes_per_epoch ? cfg.episodes_per_epoch : env.set.size();
  std::unique_ptr<nn::Optimizer> opt;
  if (cfg.phase == Phase::sl) {
    opt = std::make_unique<nn::Adam>(params, cfg.adam);
  } else {
    opt = std::make_unique<nn::RmsProp>(params, cfg.rmsprop);
  }

  std::ofstream metrics;
  if (out) {
    std::filesystem::create_directories(out->dir);
    metrics.open(out->dir / "metrics.csv", std::ios::binary | std::ios::trunc);
    if (!metrics) throw Error("cannot write " + (out->dir / "metrics.csv").string());
    metrics << metrics_csv_header() << "\n";
  }

  TrainResult result;
  std::uint64_t episode = 0;
  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    double loss_sum = 0.0;
    double pct_sum = 0.0;
    std::size_t batch_index = 0;
    for (std::size_t done = 0; done < per_epoch; done += cfg.batch_size) {
      const std::size_t n = std::min(cfg.batch_size, per_epoch - done);
      std::vector<std::uint64_t> seeds(n);
      for (auto& s : seeds) s = episode_seed(cfg, episode++);
      StepResult step;
      try {
        switch (cfg.phase) {
          case Phase::sl:
            step = sl_step(env, params, *opt, cfg, seeds);
            break;
          case Phase::mbpi:
            step = policy_improvement_step(env, params, *opt, cfg, seeds);
            break;
          case Phase::scst:
            step = scst_step(env, params, *opt, cfg, seeds);
            break;
        }
      } catch (const NonFiniteError&) {
        if (out) nn::save_checkpoint(params, out->dir / "last-good.ckpt");
        throw;
      }
      MetricsRow row{cfg.phase, epoch, ++batch_index, step.loss, step.mean_percentile};
      if (out) metrics << metrics_csv_line(row) << "\n";
      result.rows.push_back(row);
      loss_sum += step.loss * static_cast<double>(n);
      pct_sum += step.mean_percentile * static_cast<double>(n);
    }
    result.epoch_loss.push_back(loss_sum / static_cast<double>(per_epoch));
    result.epoch_percentile.push_back(pct_sum / static_cast<double>(per_epoch));
    if (out && out->checkpoints) {
      char name[64];
      std::snprintf(name, sizeof name, "%s-epoch-%03zu.ckpt", phase_name(cfg.phase), epoch);
      nn::save_checkpoint(params, out->dir / name);
    }
  }
  if (out) {
    metrics.flush();
    nn::save_checkpoint(params, out->dir / (std::string(phase_name(cfg.phase)) + ".ckpt"));
  }
  result.params = std::move(params);
  return result;
}

}  // namespace dmgr::training
