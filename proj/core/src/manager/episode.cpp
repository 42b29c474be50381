// SPDX-License-Identifier: Apache-2.0
#include "dmgr/manager/episode.hpp"

#include "dmgr/errors.hpp"
#include "dmgr/training/reward.hpp"
#include "util/json_io.hpp"

namespace dmgr::manager {

void ManagerConfig::validate() const {
  if (feature_dim == 0 || embed_dim == 0 || filters == 0) {
    throw ConfigError("model dimensions must be positive");
  }
  if (vocab_size < 3) throw ConfigError("vocabulary must hold at least the reserved tokens");
  if (max_tokens < 4) throw ConfigError("max_tokens must cover the widest convolution");
  if (top_k == 0) throw ConfigError("top_k must be at least 1");
  if (horizon == 0) throw ConfigError("horizon must be at least 1");
}

const char* mode_name(SelectMode mode) {
  return mode == SelectMode::greedy ? "greedy" : "stochastic";
}

SelectMode parse_mode(std::string_view name) {
  if (name == "greedy") return SelectMode::greedy;
  if (name == "stochastic") return SelectMode::stochastic;
  throw ValidationError("unknown selection mode '" + std::string(name) + "'");
}

namespace {

class ManagerEpisode final : public PolicyEpisode {
 public:
  ManagerEpisode(const ManagerModel& model, const nn::ParamSet& params,
                 const corpus::FeatureBank& bank)
      : model_(model), params_(params), bank_(bank) {}

  std::vector<float> observe(ItemId candidate, const feedback::Utterance& u) override {
    advance(model_, params_, bank_, state_, candidate, std::span<const TokenId>(u.tokens));
    return state_.s;
  }

 private:
  const ManagerModel& model_;
  const nn::ParamSet& params_;
  const corpus::FeatureBank& bank_;
  DialogState state_;
};

class OracleEpisode final : public PolicyEpisode {
 public:
  OracleEpisode(const corpus::FeatureBank& bank, ItemId target)
      : feature_(bank.row(target).begin(), bank.row(target).end()), target_(target) {}

  std::vector<float> observe(ItemId, const feedback::Utterance&) override { return feature_; }
  std::optional<ItemId> opening() const override { return target_; }

 private:
  std::vector<float> feature_;
  ItemId target_;
};

class RandomStateEpisode final : public PolicyEpisode {
 public:
  RandomStateEpisode(std::size_t dim, std::uint64_t seed) : dim_(dim), rng_(seed) {}

  std::vector<float> observe(ItemId, const feedback::Utterance&) override {
    std::normal_distribution<float> g(0.0f, 1.0f);
    std::vector<float> s(dim_);
    for (auto& v : s) v = g(rng_);
    return s;
  }

 private:
  std::size_t dim_;
  std::mt19937_64 rng_;
};

}  // namespace

std::unique_ptr<PolicyEpisode> ManagerPolicy::begin_episode(ItemId, std::uint64_t) const {
  return std::make_unique<ManagerEpisode>(*model_, *params_, *bank_);
}

std::unique_ptr<PolicyEpisode> OraclePolicy::begin_episode(ItemId target, std::uint64_t) const {
  return std::make_unique<OracleEpisode>(*bank_, target);
}

std::unique_ptr<PolicyEpisode> RandomStatePolicy::begin_episode(ItemId,
                                                                std::uint64_t seed) const {
  return std::make_unique<RandomStateEpisode>(dim_, seed ^ 0x7374617465ULL);
}

std::vector<double> EpisodeTrace::rewards() const {
  std::vector<double> r;
  r.reserve(turns.size());
  for (const auto& t : turns) r.push_back(t.reward);
  return r;
}

std::vector<ItemId> EpisodeTrace::candidates() const {
  std::vector<ItemId> c;
  c.reserve(turns.size());
  for (const auto& t : turns) c.push_back(t.candidate);
  return c;
}

ItemId draw_item(const RetrievalSet& set, std::mt19937_64& rng) {
  if (set.size() == 0) throw ValidationError("retrieval set is empty");
  std::uniform_int_distribution<std::size_t> pick(0, set.size() - 1);
  return set.ids()[pick(rng)];
}

EpisodeTrace run_episode(const Policy& policy, const RetrievalSet& set,
                         const feedback::FeedbackSource& feedback, ItemId target,
                         const EpisodeOptions& opts, std::uint64_t seed) {
  if (opts.horizon == 0) throw ValidationError("horizon must be at least 1");
  if (!set.contains(target)) {
    throw ValidationError("target " + std::to_string(target) + " not in retrieval set");
  }
  std::mt19937_64 rng(seed);
  auto episode = policy.begin_episode(target, seed);

  EpisodeTrace trace;
  trace.target = target;
  trace.mode = opts.mode;
  trace.seed = seed;

  std::vector<ItemId> shown;
  ItemId candidate = draw_item(set, rng);
  if (auto forced = episode->opening()) candidate = *forced;

  for (std::size_t t = 1; t <= opts.horizon; ++t) {
    TurnRecord rec;
    rec.candidate = candidate;
    rec.utterance = feedback.respond(target, candidate);
    shown.push_back(candidate);
    const auto s = episode->observe(candidate, rec.utterance);
    rec.reward = training::ranking_percentile(std::span<const float>(s), set, target);
    if (t < opts.horizon) {
      const auto excluded =
          opts.exclude_shown ? std::span<const ItemId>(shown) : std::span<const ItemId>();
      rec.next = candidate_distribution(std::span<const float>(s), set, opts.top_k, excluded);
      candidate = select_candidate(rec.next, opts.mode, rng);
      rec.chosen = candidate;
      rec.chosen_log_prob = rec.next.log_prob(rec.next.index_of(candidate));
    }
    trace.turns.push_back(std::move(rec));
  }
  return trace;
}

std::string trace_to_json_line(const EpisodeTrace& trace) {
  nlohmann::json turns = nlohmann::json::array();
  for (const auto& t : trace.turns) {
    nlohmann::json topk = nlohmann::json::array();
    for (std::size_t k = 0; k < t.next.size(); ++k) {
      topk.push_back({{"id", t.next.ids[k]}, {"prob", t.next.probs[k]}});
    }
    turns.push_back({{"candidate", t.candidate},
                     {"utterance", t.utterance.surface},
                     {"tokens", t.utterance.tokens},
                     {"reward", t.reward},
                     {"topk", std::move(topk)}});
  }
  nlohmann::json j = {{"target", trace.target},
                      {"turns", std::move(turns)},
                      {"mode", mode_name(trace.mode)},
                      {"seed", trace.seed}};
  return j.dump();
}

EpisodeTrace trace_from_json_line(std::string_view line) {
  const auto j = util::parse_json(std::string(line));
  try {
    EpisodeTrace trace;
    trace.target = j.at("target").get<ItemId>();
    trace.mode = parse_mode(j.at("mode").get<std::string>());
    trace.seed = j.at("seed").get<std::uint64_t>();
    const auto& turns = j.at("turns");
    for (std::size_t i = 0; i < turns.size(); ++i) {
      const auto& jt = turns[i];
      TurnRecord rec;
      rec.candidate = jt.at("candidate").get<ItemId>();
      rec.utterance.surface = jt.at("utterance").get<std::string>();
      rec.utterance.tokens = jt.at("tokens").get<std::vector<TokenId>>();
      rec.reward = jt.at("reward").get<double>();
      for (const auto& e : jt.at("topk")) {
        rec.next.ids.push_back(e.at("id").get<ItemId>());
        rec.next.probs.push_back(e.at("prob").get<float>());
      }
      if (i + 1 < turns.size()) rec.chosen = turns[i + 1].at("candidate").get<ItemId>();
      trace.turns.push_back(std::move(rec));
    }
    return trace;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed episode trace: ") + e.what());
  }
}

}  // namespace dmgr::manager
