// SPDX-License-Identifier: Apache-2.0
#include "dmgr/service/session.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <limits>
#include <fstream>
#include <random>

#include "dmgr/seed.hpp"
#include "dmgr/training/reward.hpp"
#include "util/json_io.hpp"

namespace dmgr::service {

using nlohmann::json;

namespace {

constexpr std::uint64_t kTargetStream = 0x73657374;  // "sest"
constexpr std::uint64_t kFirstStream = 0x73657366;   // "sesf"

json error_body(const char* code, const std::string& message) {
  return {{"code", code}, {"message", message}};
}

Response reply(int status, const json& body) { return {status, body.dump() + "\n"}; }

json parse_body(std::string_view body) {
  if (body.find_first_not_of(" \t\r\n") == std::string_view::npos) return json::object();
  auto j = util::parse_json(std::string(body));
  if (!j.is_object()) throw ValidationError("request body must be a JSON object");
  return j;
}

void allow_keys(const json& body, std::initializer_list<std::string_view> keys) {
  for (const auto& [key, value] : body.items()) {
    if (std::find(keys.begin(), keys.end(), key) == keys.end()) {
      throw ValidationError("unknown field '" + key + "'");
    }
  }
}

std::uint64_t as_id(const json& v, const char* what) {
  if (!v.is_number_unsigned()) throw ValidationError(std::string(what) + " must be a non-negative integer");
  return v.get<std::uint64_t>();
}

std::optional<ItemId> parse_item_id(std::string_view text) {
  if (text.empty() || text.size() > 10) return std::nullopt;
  std::uint64_t v = 0;
  for (char c : text) {
    if (c < '0' || c > '9') return std::nullopt;
    v = v * 10 + static_cast<std::uint64_t>(c - '0');
  }
  if (v > std::numeric_limits<ItemId>::max()) return std::nullopt;
  return static_cast<ItemId>(v);
}

std::vector<std::string_view> split_path(std::string_view path) {
  if (const auto q = path.find('?'); q != std::string_view::npos) path = path.substr(0, q);
  std::vector<std::string_view> parts;
  std::size_t pos = 0;
  while (pos < path.size()) {
    const auto next = path.find('/', pos);
    const auto end = next == std::string_view::npos ? path.size() : next;
    if (end > pos) parts.push_back(path.substr(pos, end - pos));
    pos = end + 1;
  }
  return parts;
}

json descriptor(const corpus::ItemDescriptor& item) {
  json fine = json::object();
  for (std::size_t f = 0; f < corpus::kFineFieldCount; ++f) {
    const auto field = static_cast<corpus::FineField>(f);
    fine[std::string(corpus::kFineFieldNames[f])] =
        std::string(corpus::fine_value_name(field, item.fine.get(field)));
  }
  json coarse = json::object();
  for (std::size_t c = 0; c < corpus::kCoarseCount; ++c) {
    coarse[std::string(corpus::kCoarseNames[c])] = item.coarse[c];
  }
  return {{"id", item.id}, {"fine", fine}, {"coarse", coarse}};
}

json item_ref(const corpus::Corpus& corpus, ItemId id) {
  return {{"id", id}, {"descriptor", descriptor(corpus.item(id))}};
}

json curve(const SessionRecord& s) { return s.percentiles; }

}  // namespace

const char* mode_name(SessionMode mode) {
  switch (mode) {
    case SessionMode::study: return "study";
    case SessionMode::free: return "free";
    case SessionMode::simulated: return "simulated";
  }
  return "?";
}

SessionMode parse_session_mode(std::string_view name) {
  if (name == "study") return SessionMode::study;
  if (name == "free") return SessionMode::free;
  if (name == "simulated") return SessionMode::simulated;
  throw ValidationError("unknown session mode '" + std::string(name) + "'");
}

const char* status_name(SessionStatus status) {
  switch (status) {
    case SessionStatus::active: return "active";
    case SessionStatus::found: return "found";
    case SessionStatus::exhausted: return "exhausted";
  }
  return "?";
}

std::string descriptor_json(const corpus::ItemDescriptor& item) { return descriptor(item).dump(); }

// ---- engine ----

SessionEngine::SessionEngine(const manager::ManagerModel& model, const nn::ParamSet& params,
                             const corpus::Corpus& corpus, const corpus::RetrievalSet& set,
                             const feedback::Simulator& sim, EngineOptions opts)
    : model_(&model), params_(&params), corpus_(&corpus), set_(&set), sim_(&sim), opts_(opts) {
  if (opts_.horizon == 0) throw ValidationError("horizon must be at least 1");
  if (opts_.top_k == 0) throw ValidationError("top_k must be at least 1");
  if (set.size() < opts_.horizon + opts_.top_k) {
    throw ValidationError("retrieval set too small for the horizon");
  }
}

SessionRecord SessionEngine::start(std::string id, SessionMode mode, std::uint64_t seed,
                                   std::optional<ItemId> target) const {
  SessionRecord s;
  s.id = std::move(id);
  s.mode = mode;
  s.seed = seed;
  s.created_at = std::chrono::duration_cast<std::chrono::seconds>(
                     std::chrono::system_clock::now().time_since_epoch())
                     .count();
  if (mode == SessionMode::free) {
    if (target) throw ValidationError("free sessions have no target");
  } else if (target) {
    if (!set_->contains(*target)) throw NotFoundError("unknown target " + std::to_string(*target));
    s.target = target;
  } else {
    std::mt19937_64 rng(derive_seed(seed, kTargetStream));
    s.target = manager::draw_item(*set_, rng);
  }
  std::mt19937_64 rng(derive_seed(seed, kFirstStream));
  s.shown.push_back(manager::draw_item(*set_, rng));
  return s;
}

void SessionEngine::step(SessionRecord& s, std::string text) const {
  if (s.finished || s.status != SessionStatus::active) {
    throw ConflictError("session " + s.id + " is " + status_name(s.status));
  }
  feedback::Utterance utt;
  if (s.mode == SessionMode::simulated) {
    utt = sim_->respond(*s.target, s.current());
  } else {
    if (feedback::split_words(text).empty()) throw ValidationError("feedback text is empty");
    utt = feedback::make_utterance(sim_->vocab(), std::move(text));
  }
  manager::advance(*model_, *params_, set_->bank(), s.state, s.current(),
                   std::span<const feedback::TokenId>(utt.tokens));
  s.feedback.push_back(utt.surface);
  const std::span<const float> state(s.state.s);
  if (s.scored()) s.percentiles.push_back(training::ranking_percentile(state, *set_, *s.target));
  if (s.turn() >= opts_.horizon) {
    s.status = SessionStatus::exhausted;
    return;
  }
  const auto dist = manager::candidate_distribution(state, *set_, opts_.top_k,
                                                    std::span<const ItemId>(s.shown));
  std::mt19937_64 unused(0);
  s.shown.push_back(manager::select_candidate(dist, manager::SelectMode::greedy, unused));
}

void SessionEngine::finish(SessionRecord& s, bool found) const {
  if (s.finished) throw ConflictError("session " + s.id + " is already finished");
  if (s.status == SessionStatus::active) {
    s.status = found ? SessionStatus::found : SessionStatus::exhausted;
  }
  s.finished = true;
}

// ---- service ----

SessionService::SessionService(const SessionEngine& engine, ServiceOptions opts)
    : engine_(&engine), opts_(std::move(opts)) {}

std::size_t SessionService::session_count() const {
  std::lock_guard lock(sessions_mutex_);
  return sessions_.size();
}

Response SessionService::handle(std::string_view method, std::string_view path,
                                std::string_view body) {
  const auto parts = split_path(path);
  const bool get = method == "GET";
  const bool post = method == "POST";
  const auto wrong_method = [&] {
    return reply(405, error_body("method_not_allowed", std::string(method) + " not allowed"));
  };
  try {
    if (parts.size() < 2 || parts[0] != "api") {
      return reply(404, error_body("not_found", "no such endpoint"));
    }
    if (parts.size() == 2 && parts[1] == "health") return get ? health() : wrong_method();
    if (parts.size() == 3 && parts[1] == "items") return get ? item(parts[2]) : wrong_method();
    if (parts[1] == "sessions") {
      if (parts.size() == 2) return post ? create(body) : wrong_method();
      auto slot = lookup(parts[2]);
      if (!slot) return reply(404, error_body("not_found", "unknown session"));
      if (parts.size() == 3) return get ? show(*slot) : wrong_method();
      if (parts.size() == 4 && parts[3] == "feedback") {
        return post ? feedback(*slot, body) : wrong_method();
      }
      if (parts.size() == 4 && parts[3] == "finish") {
        return post ? finish(*slot, body) : wrong_method();
      }
    }
    return reply(404, error_body("not_found", "no such endpoint"));
  } catch (const NotFoundError& e) {
    return reply(404, error_body("not_found", e.what()));
  } catch (const ConflictError& e) {
    return reply(409, error_body("conflict", e.what()));
  } catch (const ValidationError& e) {
    return reply(400, error_body("bad_request", e.what()));
  } catch (const ParseError& e) {
    return reply(400, error_body("bad_request", e.what()));
  } catch (const json::exception& e) {
    return reply(400, error_body("bad_request", e.what()));
  } catch (const std::exception& e) {
    return reply(500, error_body("internal", e.what()));
  }
}

Response SessionService::create(std::string_view body) {
  const auto req = parse_body(body);
  allow_keys(req, {"mode", "seed", "target_id"});
  if (!req.contains("mode") || !req["mode"].is_string()) {
    throw ValidationError("'mode' is required");
  }
  const auto mode = parse_session_mode(req["mode"].get<std::string>());
  std::optional<ItemId> target;
  if (req.contains("target_id")) {
    const auto v = as_id(req["target_id"], "target_id");
    if (v > std::numeric_limits<ItemId>::max()) throw NotFoundError("unknown target");
    target = static_cast<ItemId>(v);
  }

  std::uint64_t number = 0;
  {
    std::lock_guard lock(sessions_mutex_);
    number = next_id_++;
  }
  const std::uint64_t seed = req.contains("seed") ? as_id(req["seed"], "seed") : number;
  char id[32];
  std::snprintf(id, sizeof id, "sess-%06llu", static_cast<unsigned long long>(number));

  auto slot = std::make_shared<Slot>();
  slot->record = engine_->start(id, mode, seed, target);
  const auto& s = slot->record;
  const auto& corpus = engine_->corpus();

  json out = {{"session_id", s.id},
              {"mode", mode_name(s.mode)},
              {"seed", s.seed},
              {"turn", s.turn()},
              {"horizon", engine_->options().horizon},
              {"status", status_name(s.status)},
              {"candidate", item_ref(corpus, s.current())}};
  if (s.mode == SessionMode::study) out["target"] = item_ref(corpus, *s.target);

  json entry = {{"event", "create"}, {"session_id", s.id}, {"mode", mode_name(s.mode)},
                {"seed", s.seed},    {"candidate", s.current()}};
  if (s.target) entry["target"] = *s.target;
  {
    std::lock_guard lock(sessions_mutex_);
    sessions_.emplace(s.id, slot);
  }
  log(entry.dump());
  return reply(201, out);
}

Response SessionService::feedback(Slot& slot, std::string_view body) {
  const auto req = parse_body(body);
  allow_keys(req, {"text"});
  std::string text;
  if (req.contains("text")) {
    if (!req["text"].is_string()) throw ValidationError("'text' must be a string");
    text = req["text"].get<std::string>();
  }
  std::lock_guard lock(slot.mutex);
  auto& s = slot.record;
  engine_->step(s, std::move(text));

  const bool exhausted = s.status == SessionStatus::exhausted;
  json out = {{"session_id", s.id},
              {"turn", s.turn()},
              {"status", status_name(s.status)},
              {"feedback", s.feedback.back()},
              {"candidate", exhausted ? json(nullptr) : item_ref(engine_->corpus(), s.current())}};
  if (s.scored()) out["debug"] = {{"percentile", s.percentiles.back()}};

  json entry = {{"event", "feedback"},
                {"session_id", s.id},
                {"text", s.feedback.back()},
                {"candidate", exhausted ? json(nullptr) : json(s.current())}};
  log(entry.dump());
  return reply(200, out);
}

Response SessionService::finish(Slot& slot, std::string_view body) {
  const auto req = parse_body(body);
  allow_keys(req, {"found"});
  if (!req.contains("found") || !req["found"].is_boolean()) {
    throw ValidationError("'found' must be true or false");
  }
  const bool found = req["found"].get<bool>();
  std::lock_guard lock(slot.mutex);
  auto& s = slot.record;
  engine_->finish(s, found);

  json out = {{"session_id", s.id},
              {"mode", mode_name(s.mode)},
              {"status", status_name(s.status)},
              {"found", s.status == SessionStatus::found},
              {"turns", s.turn()},
              {"shown", s.shown},
              {"feedback", s.feedback}};
  if (s.scored()) {
    out["target"] = item_ref(engine_->corpus(), *s.target);
    out["curve"] = curve(s);
  }
  log(json{{"event", "finish"}, {"session_id", s.id}, {"found", found}}.dump());
  return reply(200, out);
}

Response SessionService::show(Slot& slot) {
  std::lock_guard lock(slot.mutex);
  const auto& s = slot.record;
  json history = json::array();
  for (std::size_t i = 0; i < s.shown.size(); ++i) {
    json h = {{"turn", i + 1}, {"candidate", s.shown[i]}};
    h["feedback"] = i < s.feedback.size() ? json(s.feedback[i]) : json(nullptr);
    if (s.finished && s.scored() && i < s.percentiles.size()) h["percentile"] = s.percentiles[i];
    history.push_back(std::move(h));
  }
  json out = {{"session_id", s.id},
              {"mode", mode_name(s.mode)},
              {"seed", s.seed},
              {"status", status_name(s.status)},
              {"finished", s.finished},
              {"turn", s.turn()},
              {"horizon", engine_->options().horizon},
              {"created_at", s.created_at},
              {"candidate", s.status == SessionStatus::active
                                ? item_ref(engine_->corpus(), s.current())
                                : json(nullptr)},
              {"history", history}};
  if (s.mode == SessionMode::study || (s.scored() && s.finished)) {
    out["target"] = item_ref(engine_->corpus(), *s.target);
  }
  if (s.scored() && s.finished) out["curve"] = curve(s);
  return reply(200, out);
}

Response SessionService::item(std::string_view id) {
  const auto parsed = parse_item_id(id);
  if (!parsed || *parsed >= engine_->corpus().size()) throw NotFoundError("unknown item");
  return reply(200, descriptor(engine_->corpus().item(*parsed)));
}

Response SessionService::health() const {
  return reply(200, json{{"status", "ok"},
                         {"checkpoint", opts_.checkpoint},
                         {"corpus", opts_.corpus},
                         {"items", engine_->corpus().size()},
                         {"sessions", session_count()}});
}

std::shared_ptr<SessionService::Slot> SessionService::lookup(std::string_view id) const {
  std::lock_guard lock(sessions_mutex_);
  const auto it = sessions_.find(id);
  return it == sessions_.end() ? nullptr : it->second;
}

void SessionService::log(const std::string& line) {
  if (opts_.log.empty()) return;
  std::lock_guard lock(log_mutex_);
  std::ofstream out(opts_.log, std::ios::app | std::ios::binary);
  if (!out) throw Error("cannot append to " + opts_.log.string());
  out << line << '\n';
}

// ---- replay ----

std::vector<ReplayResult> replay_log(const SessionEngine& engine, std::istream& in) {
  std::vector<ReplayResult> results;
  std::map<std::string, std::size_t> index;
  std::vector<SessionRecord> sessions;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json j;
    try {
      j = util::parse_json(line);
    } catch (const ParseError& e) {
      throw ParseError(e.what(), line_no, 0);
    }
    const auto event = j.at("event").get<std::string>();
    const auto id = j.at("session_id").get<std::string>();
    if (event == "create") {
      std::optional<ItemId> target;
      if (j.contains("target")) target = j["target"].get<ItemId>();
      index[id] = sessions.size();
      sessions.push_back(engine.start(id, parse_session_mode(j.at("mode").get<std::string>()),
                                      j.at("seed").get<std::uint64_t>(), target));
      results.push_back({id, {j.at("candidate").get<ItemId>()}, {}});
      continue;
    }
    const auto it = index.find(id);
    if (it == index.end()) throw ValidationError("log line " + std::to_string(line_no) + ": unknown session");
    auto& s = sessions[it->second];
    if (event == "feedback") {
      if (!j["candidate"].is_null()) results[it->second].logged.push_back(j["candidate"].get<ItemId>());
      engine.step(s, j.at("text").get<std::string>());
    } else if (event == "finish") {
      engine.finish(s, j.at("found").get<bool>());
    } else {
      throw ValidationError("log line " + std::to_string(line_no) + ": unknown event");
    }
  }
  for (std::size_t i = 0; i < results.size(); ++i) results[i].replayed = sessions[i].shown;
  return results;
}

}  // namespace dmgr::service
