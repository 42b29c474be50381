// SPDX-License-Identifier: Apache-2.0
#include "dmgr/eval/evaluate.hpp"

#include <cmath>
#include <random>
#include <sstream>

#include "dmgr/errors.hpp"
#include "dmgr/seed.hpp"
#include "util/json_io.hpp"

namespace dmgr::eval {

namespace {

constexpr std::uint64_t kTargetStream = 0x65766174ULL;
constexpr std::uint64_t kEpisodeStream = 0x65766165ULL;

}  // namespace

std::vector<EpisodePlan> plan_episodes(const corpus::RetrievalSet& test_set,
                                       const EvalOptions& opts) {
  std::vector<EpisodePlan> plan(opts.episodes);
  for (std::size_t i = 0; i < opts.episodes; ++i) {
    std::mt19937_64 rng(derive_seed(opts.seed, kTargetStream, i));
    plan[i].target = manager::draw_item(test_set, rng);
    plan[i].episode_seed = derive_seed(opts.seed, kEpisodeStream, i);
  }
  return plan;
}

EvalReport evaluate(const manager::Policy& policy, const corpus::RetrievalSet& test_set,
                    const feedback::FeedbackSource& feedback, const EvalOptions& opts,
                    std::string config_id) {
  return evaluate(policy, test_set, feedback, opts, std::move(config_id), nullptr);
}

EvalReport evaluate(const manager::Policy& policy, const corpus::RetrievalSet& test_set,
                    const feedback::FeedbackSource& feedback, const EvalOptions& opts,
                    std::string config_id, std::vector<manager::EpisodeTrace>* traces) {
  if (opts.episodes == 0) throw ValidationError("evaluation needs at least one episode");
  if (opts.horizon == 0) throw ValidationError("horizon must be at least 1");
  if (test_set.size() == 0) throw ValidationError("test split is empty");

  manager::EpisodeOptions ep;
  ep.horizon = opts.horizon;
  ep.top_k = opts.top_k;
  ep.mode = manager::SelectMode::greedy;
  ep.exclude_shown = opts.exclude_shown;

  std::vector<double> sum(opts.horizon, 0.0);
  std::vector<double> sq(opts.horizon, 0.0);
  for (const auto& p : plan_episodes(test_set, opts)) {
    auto trace = manager::run_episode(policy, test_set, feedback, p.target, ep, p.episode_seed);
    for (std::size_t t = 0; t < opts.horizon; ++t) {
      sum[t] += trace.turns[t].reward;
      sq[t] += trace.turns[t].reward * trace.turns[t].reward;
    }
    if (traces) traces->push_back(std::move(trace));
  }

  EvalReport report;
  report.config_id = std::move(config_id);
  report.horizon = opts.horizon;
  report.episodes = opts.episodes;
  report.seed = opts.seed;
  const double n = static_cast<double>(opts.episodes);
  for (std::size_t t = 0; t < opts.horizon; ++t) {
    const double m = sum[t] / n;
    report.mean.push_back(m);
    report.std.push_back(std::sqrt(std::max(0.0, sq[t] / n - m * m)));
  }
  return report;
}

std::string report_to_json(const EvalReport& r) {
  nlohmann::json turns = nlohmann::json::array();
  for (std::size_t t = 0; t < r.mean.size(); ++t) {
    turns.push_back({{"turn", t + 1}, {"mean", r.mean[t]}, {"std", r.std[t]}});
  }
  const nlohmann::json j = {{"config", r.config_id}, {"horizon", r.horizon},
                            {"episodes", r.episodes}, {"seed", r.seed},
                            {"turns", std::move(turns)}};
  return j.dump(2) + "\n";
}

EvalReport report_from_json(const std::string& text) {
  const auto j = util::parse_json(text);
  try {
    EvalReport r;
    r.config_id = j.at("config").get<std::string>();
    r.horizon = j.at("horizon").get<std::size_t>();
    r.episodes = j.at("episodes").get<std::size_t>();
    r.seed = j.at("seed").get<std::uint64_t>();
    for (const auto& t : j.at("turns")) {
      r.mean.push_back(t.at("mean").get<double>());
      r.std.push_back(t.at("std").get<double>());
    }
    if (r.mean.size() != r.horizon) throw ValidationError("report turn count != horizon");
    for (double m : r.mean) {
      if (!(m >= 0.0 && m <= 1.0)) throw ValidationError("report mean outside [0, 1]");
    }
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed evaluation report: ") + e.what());
  }
}

void save_report(const EvalReport& report, const std::filesystem::path& path) {
  util::write_text_file(path, report_to_json(report));
}

EvalReport load_report(const std::filesystem::path& path) {
  return report_from_json(util::read_text_file(path));
}

std::string compare(const std::vector<CompareEntry>& entries) {
  if (entries.empty()) throw ValidationError("nothing to compare");
  const std::size_t horizon = entries.front().report.horizon;
  for (const auto& e : entries) {
    if (e.report.horizon != horizon || e.report.mean.size() != horizon) {
      throw ValidationError("cannot compare '" + e.config_id + "': horizon " +
                            std::to_string(e.report.horizon) + " vs " +
                            std::to_string(horizon));
    }
  }
  const auto& ref = entries.front().report;
  std::string out = "config,method,channel,turn,mean,std,episodes,diff_vs_reference\n";
  for (const auto& e : entries) {
    for (std::size_t t = 0; t < horizon; ++t) {
      out += e.config_id + "," + e.method + "," + e.channel + "," + std::to_string(t + 1) + "," +
             util::format_float(e.report.mean[t]) + "," + util::format_float(e.report.std[t]) +
             "," + std::to_string(e.report.episodes) + "," +
             util::format_float(e.report.mean[t] - ref.mean[t]) + "\n";
    }
  }
  return out;
}

bool is_monotone(const std::vector<double>& means) {
  for (std::size_t t = 1; t < means.size(); ++t) {
    if (means[t] < means[t - 1]) return false;
  }
  return true;
}

std::string turn_curve_export(const EvalReport& report) {
  std::string out = "turn,mean,std\n";
  for (std::size_t t = 0; t < report.mean.size(); ++t) {
    out += std::to_string(t + 1) + "," + util::format_float(report.mean[t]) + "," +
           util::format_float(report.std[t]) + "\n";
  }
  out += std::string("# monotone=") + (is_monotone(report.mean) ? "true" : "false") + "\n";
  return out;
}

TurnCurve parse_turn_curve(const std::string& csv) {
  TurnCurve curve;
  std::istringstream in(csv);
  std::string line;
  std::size_t lineno = 0;
  bool saw_flag = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (lineno == 1) {
      if (line != "turn,mean,std") throw ParseError("unexpected curve header", 1, 0);
      continue;
    }
    if (line.rfind("# monotone=", 0) == 0) {
      const auto v = line.substr(11);
      if (v != "true" && v != "false") throw ParseError("bad monotone flag", lineno, 11);
      curve.monotone = v == "true";
      saw_flag = true;
      continue;
    }
    std::istringstream row(line);
    std::string a, b, c;
    if (!std::getline(row, a, ',') || !std::getline(row, b, ',') || !std::getline(row, c)) {
      throw ParseError("expected turn,mean,std", lineno, 0);
    }
    try {
      curve.turn.push_back(std::stoul(a));
      curve.mean.push_back(std::stod(b));
      curve.std.push_back(std::stod(c));
    } catch (const std::exception&) {
      throw ParseError("non-numeric curve field", lineno, 0);
    }
  }
  if (!saw_flag) throw ParseError("missing monotone flag", lineno, 0);
  return curve;
}

}  // namespace dmgr::eval
