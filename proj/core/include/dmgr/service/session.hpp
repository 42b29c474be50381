// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <istream>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dmgr/corpus/corpus.hpp"
#include "dmgr/errors.hpp"
#include "dmgr/feedback/simulator.hpp"
#include "dmgr/manager/episode.hpp"

namespace dmgr::service {

using corpus::ItemId;

class NotFoundError : public Error {
 public:
  using Error::Error;
};

/// Write to a session that no longer accepts it.
class ConflictError : public Error {
 public:
  using Error::Error;
};

enum class SessionMode : std::uint8_t { study, free, simulated };
enum class SessionStatus : std::uint8_t { active, found, exhausted };

const char* mode_name(SessionMode mode);
SessionMode parse_session_mode(std::string_view name);
const char* status_name(SessionStatus status);

struct SessionRecord {
  std::string id;
  SessionMode mode = SessionMode::free;
  std::uint64_t seed = 0;
  std::optional<ItemId> target;  // never set in free mode
  SessionStatus status = SessionStatus::active;
  bool finished = false;
  std::int64_t created_at = 0;  // unix seconds
  std::vector<std::string> feedback;
  std::vector<double> percentiles;  // one per feedback, study/simulated only
  std::vector<ItemId> shown;        // every candidate presented, in order
  manager::DialogState state;

  std::size_t turn() const noexcept { return feedback.size(); }
  ItemId current() const { return shown.back(); }
  bool scored() const noexcept { return mode != SessionMode::free; }
};

struct EngineOptions {
  std::size_t horizon = 5;
  std::size_t top_k = 3;
};

/// Deterministic session stepping over one retrieval set. Holds references
/// only; everything it reads is immutable.
class SessionEngine {
 public:
  SessionEngine(const manager::ManagerModel& model, const nn::ParamSet& params,
                const corpus::Corpus& corpus, const corpus::RetrievalSet& set,
                const feedback::Simulator& sim, EngineOptions opts = {});

  /// Study and simulated sessions without a target draw one from the set.
  /// The first candidate is a uniform draw; both come from `seed`.
  SessionRecord start(std::string id, SessionMode mode, std::uint64_t seed,
                      std::optional<ItemId> target) const;
  /// One manager turn. Simulated sessions ignore `text` and ask the
  /// simulator. The horizon-th feedback ends the session as exhausted.
  void step(SessionRecord& session, std::string text) const;
  void finish(SessionRecord& session, bool found) const;

  const corpus::Corpus& corpus() const noexcept { return *corpus_; }
  const corpus::RetrievalSet& set() const noexcept { return *set_; }
  const EngineOptions& options() const noexcept { return opts_; }

 private:
  const manager::ManagerModel* model_;
  const nn::ParamSet* params_;
  const corpus::Corpus* corpus_;
  const corpus::RetrievalSet* set_;
  const feedback::Simulator* sim_;
  EngineOptions opts_;
};

/// {id, fine: {field: value}, coarse: {attribute: value}}
std::string descriptor_json(const corpus::ItemDescriptor& item);

struct ServiceOptions {
  std::string checkpoint;  // shown by /api/health
  std::string corpus;
  std::filesystem::path log;  // append-only JSONL; empty disables
};

struct Response {
  int status = 200;
  std::string body;
};

/// JSON API over a SessionEngine. Safe to call from many threads; writes to
/// one session are serialized.
class SessionService {
 public:
  SessionService(const SessionEngine& engine, ServiceOptions opts = {});

  Response handle(std::string_view method, std::string_view path, std::string_view body);

  std::size_t session_count() const;

 private:
  struct Slot {
    std::mutex mutex;
    SessionRecord record;
  };

  Response create(std::string_view body);
  Response feedback(Slot& slot, std::string_view body);
  Response finish(Slot& slot, std::string_view body);
  Response show(Slot& slot);
  Response item(std::string_view id);
  Response health() const;
  std::shared_ptr<Slot> lookup(std::string_view id) const;
  void log(const std::string& line);

  const SessionEngine* engine_;
  ServiceOptions opts_;
  mutable std::mutex sessions_mutex_;
  std::map<std::string, std::shared_ptr<Slot>, std::less<>> sessions_;
  std::uint64_t next_id_ = 1;
  std::mutex log_mutex_;
};

struct ReplayResult {
  std::string session_id;
  std::vector<ItemId> logged;
  std::vector<ItemId> replayed;
  bool matches() const { return logged == replayed; }
};

/// Re-runs every session in a service log through `engine`.
std::vector<ReplayResult> replay_log(const SessionEngine& engine, std::istream& log);

}  // namespace dmgr::service
