// SPDX-License-Identifier: Apache-2.0
#include "dmgr/run/config.hpp"

#include <set>

#include "dmgr/errors.hpp"
#include "util/json_io.hpp"

namespace dmgr::run {

using nlohmann::json;

namespace {

// Reads known keys out of one JSON object and complains about the rest.
class Section {
 public:
  Section(const json& root, std::string name) : name_(std::move(name)) {
    if (root.is_null()) return;
    if (!root.is_object()) throw ConfigError("'" + name_ + "' must be an object");
    obj_ = &root;
  }

  void allow(const char* key) { seen_.insert(key); }

  template <typename T>
  void read(const char* key, T& out) {
    seen_.insert(key);
    if (!obj_ || !obj_->contains(key)) return;
    const auto& v = obj_->at(key);
    try {
      if constexpr (std::is_same_v<T, std::string>) {
        if (!v.is_string()) throw ConfigError("");
      } else if constexpr (std::is_same_v<T, bool>) {
        if (!v.is_boolean()) throw ConfigError("");
      } else if constexpr (std::is_integral_v<T>) {
        if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0)) {
          throw ConfigError("");
        }
      } else {
        if (!v.is_number()) throw ConfigError("");
      }
      out = v.get<T>();
    } catch (const std::exception&) {
      throw ConfigError(name_ + "." + key + ": wrong type");
    }
  }

  void finish() const {
    if (!obj_) return;
    for (const auto& [key, value] : obj_->items()) {
      if (!seen_.contains(key)) throw ConfigError("unknown key " + name_ + "." + key);
    }
  }

 private:
  std::string name_;
  const json* obj_ = nullptr;
  std::set<std::string> seen_;
};

const json& member(const json& root, const char* key) {
  static const json null;
  return root.contains(key) ? root.at(key) : null;
}

}  // namespace

feedback::FeedbackConfig FeedbackSection::resolve() const {
  auto cfg = feedback::FeedbackConfig::preset(preset);
  cfg.max_phrases = max_phrases;
  cfg.dissimilarity_threshold = dissimilarity_threshold;
  cfg.seed = seed;
  try {
    cfg.validate();
  } catch (const ValidationError& e) {
    throw ConfigError(e.what());
  }
  return cfg;
}

training::TrainConfig RunConfig::train_config(training::Phase phase) const {
  auto cfg = training::TrainConfig::defaults(phase);
  cfg.batch_size = train.batch_size;
  cfg.epochs = phase == training::Phase::sl ? train.sl_epochs : train.rl_epochs;
  cfg.episodes_per_epoch = train.episodes_per_epoch;
  cfg.margin = train.margin;
  cfg.exploration = train.exploration;
  cfg.adam.learning_rate = train.sl_learning_rate;
  cfg.rmsprop.learning_rate = train.rl_learning_rate;
  cfg.reward.gamma = train.gamma;
  cfg.reward.horizon = train.horizon;
  cfg.top_k = train.top_k;
  cfg.seed = train.seed;
  return cfg;
}

manager::ManagerConfig RunConfig::manager_config(std::size_t vocab_size) const {
  manager::ManagerConfig cfg;
  cfg.feature_dim = model.feature_dim;
  cfg.embed_dim = model.embed_dim;
  cfg.filters = model.filters;
  cfg.vocab_size = vocab_size;
  cfg.top_k = train.top_k;
  cfg.horizon = train.horizon;
  return cfg;
}

void RunConfig::validate() const {
  if (corpus.n < 10) throw ConfigError("corpus.n must be at least 10");
  if (!(corpus.train_fraction > 0.0 && corpus.train_fraction < 1.0)) {
    throw ConfigError("corpus.train_fraction must lie in (0, 1)");
  }
  if (model.feature_dim == 0 || model.embed_dim == 0 || model.filters == 0) {
    throw ConfigError("model dimensions must be positive");
  }
  feedback.resolve();
  try {
    for (auto phase : {training::Phase::sl, training::Phase::mbpi, training::Phase::scst}) {
      train_config(phase).validate();
    }
  } catch (const ValidationError& e) {
    throw ConfigError(e.what());
  }
  if (eval.episodes == 0) throw ConfigError("eval.episodes must be at least 1");
  if (eval.horizon == 0) throw ConfigError("eval.horizon must be at least 1");
  if (eval.top_k == 0) throw ConfigError("eval.top_k must be at least 1");
}

RunConfig parse_run_config(const std::string& json_text) {
  const auto root = util::parse_json(json_text);
  if (!root.is_object()) throw ConfigError("run config must be a JSON object");
  RunConfig cfg;

  Section top(root, "config");
  for (const char* key : {"corpus", "model", "feedback", "train", "eval"}) top.allow(key);
  top.read("out_dir", cfg.out_dir);
  top.finish();

  Section c(member(root, "corpus"), "corpus");
  c.read("seed", cfg.corpus.seed);
  c.read("n", cfg.corpus.n);
  c.read("train_fraction", cfg.corpus.train_fraction);
  c.read("file", cfg.corpus.file);
  c.read("projection_seed", cfg.corpus.projection_seed);
  c.finish();

  Section m(member(root, "model"), "model");
  m.read("feature_dim", cfg.model.feature_dim);
  m.read("embed_dim", cfg.model.embed_dim);
  m.read("filters", cfg.model.filters);
  m.read("init_seed", cfg.model.init_seed);
  m.finish();

  Section f(member(root, "feedback"), "feedback");
  f.read("preset", cfg.feedback.preset);
  f.read("max_phrases", cfg.feedback.max_phrases);
  f.read("dissimilarity_threshold", cfg.feedback.dissimilarity_threshold);
  f.read("seed", cfg.feedback.seed);
  f.read("grammar_file", cfg.feedback.grammar_file);
  f.finish();

  Section t(member(root, "train"), "train");
  t.read("batch_size", cfg.train.batch_size);
  t.read("sl_epochs", cfg.train.sl_epochs);
  t.read("rl_epochs", cfg.train.rl_epochs);
  t.read("episodes_per_epoch", cfg.train.episodes_per_epoch);
  t.read("margin", cfg.train.margin);
  t.read("exploration", cfg.train.exploration);
  t.read("sl_learning_rate", cfg.train.sl_learning_rate);
  t.read("rl_learning_rate", cfg.train.rl_learning_rate);
  t.read("gamma", cfg.train.gamma);
  t.read("horizon", cfg.train.horizon);
  t.read("top_k", cfg.train.top_k);
  t.read("seed", cfg.train.seed);
  t.finish();

  Section e(member(root, "eval"), "eval");
  e.read("episodes", cfg.eval.episodes);
  e.read("horizon", cfg.eval.horizon);
  e.read("top_k", cfg.eval.top_k);
  e.read("seed", cfg.eval.seed);
  e.finish();

  cfg.validate();
  return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  if (!std::filesystem::is_regular_file(path)) {
    throw ConfigError("config file not found: " + path.string());
  }
  return parse_run_config(util::read_text_file(path));
}

std::string run_config_to_json(const RunConfig& cfg) {
  const json j = {
      {"corpus",
       {{"seed", cfg.corpus.seed},
        {"n", cfg.corpus.n},
        {"train_fraction", cfg.corpus.train_fraction},
        {"file", cfg.corpus.file},
        {"projection_seed", cfg.corpus.projection_seed}}},
      {"model",
       {{"feature_dim", cfg.model.feature_dim},
        {"embed_dim", cfg.model.embed_dim},
        {"filters", cfg.model.filters},
        {"init_seed", cfg.model.init_seed}}},
      {"feedback",
       {{"preset", cfg.feedback.preset},
        {"max_phrases", cfg.feedback.max_phrases},
        {"dissimilarity_threshold", cfg.feedback.dissimilarity_threshold},
        {"seed", cfg.feedback.seed},
        {"grammar_file", cfg.feedback.grammar_file}}},
      {"train",
       {{"batch_size", cfg.train.batch_size},
        {"sl_epochs", cfg.train.sl_epochs},
        {"rl_epochs", cfg.train.rl_epochs},
        {"episodes_per_epoch", cfg.train.episodes_per_epoch},
        {"margin", cfg.train.margin},
        {"exploration", cfg.train.exploration},
        {"sl_learning_rate", cfg.train.sl_learning_rate},
        {"rl_learning_rate", cfg.train.rl_learning_rate},
        {"gamma", cfg.train.gamma},
        {"horizon", cfg.train.horizon},
        {"top_k", cfg.train.top_k},
        {"seed", cfg.train.seed}}},
      {"eval",
       {{"episodes", cfg.eval.episodes},
        {"horizon", cfg.eval.horizon},
        {"top_k", cfg.eval.top_k},
        {"seed", cfg.eval.seed}}},
      {"out_dir", cfg.out_dir}};
  return j.dump(2) + "\n";
}

}  // namespace dmgr::run
