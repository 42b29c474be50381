// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "dmgr/corpus/corpus.hpp"
#include "dmgr/manager/episode.hpp"

namespace dmgr::eval {

using corpus::ItemId;

struct EvalOptions {
  std::size_t episodes = 500;
  std::size_t horizon = 5;
  std::size_t top_k = 3;
  bool exclude_shown = true;
  std::uint64_t seed = 0;
};

/// Per-turn ranking percentile statistics over a fixed episode set.
struct EvalReport {
  std::string config_id;
  std::size_t horizon = 0;
  std::size_t episodes = 0;
  std::uint64_t seed = 0;
  std::vector<double> mean;  // index t-1
  std::vector<double> std;   // population standard deviation

  double final_mean() const { return mean.empty() ? 0.0 : mean.back(); }
  friend bool operator==(const EvalReport&, const EvalReport&) = default;
};

/// Target and first-candidate seeds for episode i; identical for every
/// policy evaluated with the same options (paired evaluation).
struct EpisodePlan {
  ItemId target = 0;
  std::uint64_t episode_seed = 0;
};
std::vector<EpisodePlan> plan_episodes(const corpus::RetrievalSet& test_set,
                                       const EvalOptions& opts);

/// Greedy episodes against `feedback`, targets drawn with replacement from
/// `test_set`, which is also the ranking bank.
EvalReport evaluate(const manager::Policy& policy, const corpus::RetrievalSet& test_set,
                    const feedback::FeedbackSource& feedback, const EvalOptions& opts,
                    std::string config_id);

/// Same, also returning every trace (for transcript export).
EvalReport evaluate(const manager::Policy& policy, const corpus::RetrievalSet& test_set,
                    const feedback::FeedbackSource& feedback, const EvalOptions& opts,
                    std::string config_id, std::vector<manager::EpisodeTrace>* traces);

std::string report_to_json(const EvalReport& report);
EvalReport report_from_json(const std::string& text);
void save_report(const EvalReport& report, const std::filesystem::path& path);
EvalReport load_report(const std::filesystem::path& path);

/// One row set of the comparison table.
struct CompareEntry {
  std::string config_id;
  std::string method;   // sl, scst, mbpi, ...
  std::string channel;  // nl, attr1, ...
  EvalReport report;
};

/// CSV, header
///   config,method,channel,turn,mean,std,episodes,diff_vs_reference
/// with configs × T rows in input order; the first entry is the reference.
/// Throws ValidationError when horizons differ.
std::string compare(const std::vector<CompareEntry>& entries);

/// turn,mean,std rows plus a trailing "# monotone=<true|false>" line.
std::string turn_curve_export(const EvalReport& report);

struct TurnCurve {
  std::vector<std::size_t> turn;
  std::vector<double> mean;
  std::vector<double> std;
  bool monotone = false;
};
TurnCurve parse_turn_curve(const std::string& csv);

/// true iff means are non-decreasing in t.
bool is_monotone(const std::vector<double>& means);

}  // namespace dmgr::eval
