// SPDX-License-Identifier: Apache-2.0
#include "dmgr/run/workspace.hpp"

#include "dmgr/feedback/grammar.hpp"
#include "dmgr/nn/checkpoint.hpp"
#include "util/json_io.hpp"

namespace dmgr::run {

namespace {

corpus::Corpus make_corpus(const RunConfig& cfg) {
  if (!cfg.corpus.file.empty()) return corpus::load_corpus(cfg.corpus.file);
  return corpus::generate_corpus(cfg.corpus.seed, cfg.corpus.n, cfg.corpus.train_fraction);
}

feedback::Grammar make_grammar(const RunConfig& cfg) {
  if (!cfg.feedback.grammar_file.empty()) return feedback::load_grammar(cfg.feedback.grammar_file);
  return feedback::default_grammar();
}

}  // namespace

Workspace::Workspace(const RunConfig& cfg)
    : cfg_((cfg.validate(), cfg)),
      corpus_(make_corpus(cfg_)),
      encoder_(cfg_.model.feature_dim, cfg_.corpus.projection_seed),
      bank_(corpus::build_feature_bank(corpus_, encoder_)),
      sim_(corpus_, make_grammar(cfg_), cfg_.feedback.resolve()),
      train_(bank_, corpus_.train),
      test_(bank_, corpus_.test),
      model_(cfg_.manager_config(sim_.vocab().size())) {}

nn::ParamSet Workspace::load_params(const std::filesystem::path& checkpoint) const {
  return nn::load_checkpoint(checkpoint, init_params());
}

std::string manifest_json(const RunConfig& cfg, const Manifest& m) {
  nlohmann::json j = {
      {"kind", m.kind},
      {"phase", m.phase},
      {"checkpoint", m.checkpoint},
      {"init_checkpoint", m.init_checkpoint},
      {"report", m.report},
      {"metrics", m.metrics},
      {"corpus_file", cfg.corpus.file},
      {"grammar_file", cfg.feedback.grammar_file},
      {"seeds",
       {{"corpus", cfg.corpus.seed},
        {"projection", cfg.corpus.projection_seed},
        {"init", cfg.model.init_seed},
        {"feedback", cfg.feedback.seed},
        {"train", cfg.train.seed},
        {"eval", cfg.eval.seed}}},
      {"config", nlohmann::json::parse(run_config_to_json(cfg))},
  };
  return j.dump(2) + "\n";
}

void write_manifest(const std::filesystem::path& path, const RunConfig& cfg, const Manifest& m) {
  util::write_text_file(path, manifest_json(cfg, m));
}

}  // namespace dmgr::run
