// SPDX-License-Identifier: Apache-2.0
#include "dmgr/feedback/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "dmgr/errors.hpp"
#include "dmgr/seed.hpp"

namespace dmgr::feedback {

namespace {

using corpus::FineField;
using corpus::kCoarseCount;
using corpus::kFineFieldCount;

std::uint64_t pair_hash(std::uint64_t seed, ItemId target, ItemId candidate,
                        std::uint64_t salt) {
  std::uint64_t h = splitmix64(seed ^ salt);
  h = splitmix64(h ^ target);
  return splitmix64(h ^ (static_cast<std::uint64_t>(candidate) << 32));
}

const std::string& lookup(const std::map<std::string, std::string>& m, std::string_view key) {
  auto it = m.find(std::string(key));
  if (it == m.end()) throw ValidationError("grammar has no word for '" + std::string(key) + "'");
  return it->second;
}

std::string join(const std::vector<std::string>& phrases, const std::string& joiner) {
  std::string out;
  for (std::size_t i = 0; i < phrases.size(); ++i) {
    if (i) out += " " + joiner + " ";
    out += phrases[i];
  }
  return out;
}

struct Phrase {
  std::string text;
  bool positional = false;
};

Phrase field_phrase(FineField field, const ItemDescriptor& target, const Grammar& g) {
  const auto& f = target.fine;
  std::string tmpl = g.field_templates[static_cast<std::size_t>(field)];
  const auto pattern = std::string(corpus::kPatternNames[static_cast<std::size_t>(f.pattern)]);
  const auto ornament =
      std::string(corpus::kOrnamentNames[static_cast<std::size_t>(f.ornament)]);
  if (field == FineField::pattern && g.pattern_overrides.contains(pattern)) {
    tmpl = g.pattern_overrides.at(pattern);
  }
  if (field == FineField::ornament && g.ornament_overrides.contains(ornament)) {
    tmpl = g.ornament_overrides.at(ornament);
  }
  const auto color = field == FineField::accent_color ? f.accent_color : f.primary_color;
  std::map<std::string, std::string> values{
      {"category", lookup(g.category_words,
                          corpus::kCategoryNames[static_cast<std::size_t>(f.category)])},
      {"color", lookup(g.color_words, corpus::kColorNames[static_cast<std::size_t>(color)])},
      {"toe", lookup(g.toe_words, corpus::kToeNames[static_cast<std::size_t>(f.toe)])},
      {"pattern", lookup(g.pattern_words, pattern)},
      {"ornament", lookup(g.ornament_words, ornament)},
      {"position",
       lookup(g.position_words,
              corpus::kPositionNames[static_cast<std::size_t>(f.ornament_position)])}};
  return {fill_template(tmpl, values), tmpl.find("{position}") != std::string::npos};
}

}  // namespace

void FeedbackConfig::validate() const {
  if (max_phrases < 1) throw ValidationError("max_phrases must be >= 1");
  if (attribute_count < 1 || attribute_count > kCoarseCount) {
    throw ValidationError("attribute_count must lie in [1, 10]");
  }
  if (!(attribute_noise >= 0.0)) throw ValidationError("attribute noise must be >= 0");
  if (!(dissimilarity_threshold >= 0.0 && dissimilarity_threshold <= 1.0)) {
    throw ValidationError("dissimilarity threshold must lie in [0, 1]");
  }
}

FeedbackConfig FeedbackConfig::preset(std::string_view name) {
  FeedbackConfig cfg;
  if (name == "nl") return cfg;
  if (name.starts_with("attr")) {
    std::string_view rest = name.substr(4);
    bool deep = false;
    if (rest.ends_with("_deep")) {
      deep = true;
      rest.remove_suffix(5);
    }
    std::size_t n = 0;
    for (char c : rest) {
      if (c < '0' || c > '9') throw ConfigError("unknown feedback preset '" + std::string(name) + "'");
      n = n * 10 + static_cast<std::size_t>(c - '0');
    }
    cfg.channel = Channel::attribute;
    cfg.attribute_count = n;
    cfg.attribute_noise = deep ? kDeepAttributeNoise : kAttributeNoise;
    try {
      cfg.validate();
    } catch (const ValidationError& e) {
      throw ConfigError(e.what());
    }
    return cfg;
  }
  throw ConfigError("unknown feedback preset '" + std::string(name) + "'");
}

std::string FeedbackConfig::name() const {
  if (channel == Channel::natural_language) return "nl";
  std::string out = "attr" + std::to_string(attribute_count);
  if (attribute_noise == kDeepAttributeNoise) out += "_deep";
  return out;
}

const std::array<double, kFeatureCount>& salience_weights() {
  // category, primary color, accent color, toe, pattern, ornament, position
  static const std::array<double, kFeatureCount> w = [] {
    std::array<double, kFeatureCount> a{};
    const std::array<double, kFineFieldCount> fine{1.00, 0.98, 0.90, 0.92, 0.94, 0.96, 0.88};
    std::copy(fine.begin(), fine.end(), a.begin());
    for (std::size_t k = 0; k < kCoarseCount; ++k) a[kFineFieldCount + k] = 0.85;
    return a;
  }();
  return w;
}

Discrepancy discrepancy(const ItemDescriptor& target, const ItemDescriptor& candidate) {
  Discrepancy d;
  const auto& w = salience_weights();
  for (std::size_t f = 0; f < kFineFieldCount; ++f) {
    const auto field = static_cast<FineField>(f);
    double v = target.fine.get(field) != candidate.fine.get(field) ? 1.0 : 0.0;
    // placement only matters when both items carry an ornament
    if (field == FineField::ornament_position &&
        (target.fine.ornament == corpus::Ornament::none ||
         candidate.fine.ornament == corpus::Ornament::none)) {
      v = 0.0;
    }
    d.value[f] = v;
  }
  for (std::size_t k = 0; k < kCoarseCount; ++k) {
    d.value[kFineFieldCount + k] =
        std::abs(static_cast<double>(target.coarse[k]) - static_cast<double>(candidate.coarse[k]));
  }
  double sum = 0.0;
  for (std::size_t j = 0; j < kFeatureCount; ++j) {
    d.score[j] = w[j] * d.value[j];
    sum += d.value[j];
  }
  d.mean = sum / static_cast<double>(kFeatureCount);
  return d;
}

std::vector<std::size_t> salience_order(const Discrepancy& d) {
  std::vector<std::size_t> order;
  for (std::size_t j = 0; j < kFeatureCount; ++j) {
    if (d.score[j] > 0.0) order.push_back(j);
  }
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return d.score[a] > d.score[b]; });
  return order;
}

std::size_t phrase_budget(const ItemDescriptor& target, const ItemDescriptor& candidate,
                          const FeedbackConfig& cfg) {
  if (cfg.max_phrases <= 1) return 1;
  const std::uint64_t h = pair_hash(cfg.seed, target.id, candidate.id, 0xb0d9e7ULL);
  const double u = static_cast<double>(h >> 11) * 0x1.0p-53;
  constexpr double kSingle = 0.35;
  if (u < kSingle) return 1;
  const double rest = (u - kSingle) / (1.0 - kSingle);
  const auto extra = static_cast<std::size_t>(rest * static_cast<double>(cfg.max_phrases - 1));
  return 2 + std::min(extra, cfg.max_phrases - 2);
}

CaptionDetail relative_caption_detail(const ItemDescriptor& target,
                                      const ItemDescriptor& candidate,
                                      const FeedbackConfig& cfg, const Grammar& grammar) {
  CaptionDetail out;
  const auto d = discrepancy(target, candidate);
  const auto order = salience_order(d);
  if (order.empty()) {
    out.text = grammar.same;
    return out;
  }
  out.absolute = d.mean > cfg.dissimilarity_threshold;
  const std::size_t budget = std::min(phrase_budget(target, candidate, cfg), order.size());

  std::vector<std::string> phrases;
  for (std::size_t i = 0; i < budget; ++i) {
    const std::size_t j = order[i];
    Phrase p;
    if (j < kFineFieldCount) {
      p = field_phrase(static_cast<FineField>(j), target, grammar);
    } else {
      const std::size_t k = j - kFineFieldCount;
      const std::map<std::string, std::string> values{{"attr", grammar.attribute_words[k]}};
      const std::string* tmpl;
      if (out.absolute) {
        tmpl = target.coarse[k] >= 0.5f ? &grammar.absolute_high : &grammar.absolute_low;
      } else {
        tmpl = target.coarse[k] > candidate.coarse[k] ? &grammar.relative_more
                                                      : &grammar.relative_less;
      }
      p.text = fill_template(*tmpl, values);
    }
    phrases.push_back(std::move(p.text));
    out.features.push_back(j);
    out.positional.push_back(p.positional);
  }
  out.text = join(phrases, grammar.joiner);
  return out;
}

Utterance relative_caption(const ItemDescriptor& target, const ItemDescriptor& candidate,
                           const FeedbackConfig& cfg, const Grammar& grammar,
                           const Vocab& vocab) {
  return make_utterance(vocab, relative_caption_detail(target, candidate, cfg, grammar).text);
}

std::array<float, kCoarseCount> noisy_coarse(const ItemDescriptor& item, double sigma,
                                             std::uint64_t seed) {
  auto view = item.coarse;
  if (sigma <= 0.0) return view;
  std::mt19937_64 rng(splitmix64(seed ^ splitmix64(0x6e6f697365ULL + item.id)));
  std::normal_distribution<double> noise(0.0, sigma);
  for (auto& v : view) v = static_cast<float>(static_cast<double>(v) + noise(rng));
  return view;
}

AttributeDetail attribute_feedback_detail(const ItemDescriptor& target,
                                          const std::array<float, kCoarseCount>& target_view,
                                          const ItemDescriptor& candidate,
                                          const std::array<float, kCoarseCount>& candidate_view,
                                          const FeedbackConfig& cfg, const Grammar& grammar) {
  AttributeDetail out;
  std::vector<std::size_t> eligible;
  for (std::size_t k = 0; k < kCoarseCount; ++k) {
    if (target_view[k] != candidate_view[k]) eligible.push_back(k);
  }
  if (eligible.empty()) {
    out.text = grammar.same;
    return out;
  }
  if (cfg.attribute_count < eligible.size()) {
    std::mt19937_64 rng(pair_hash(cfg.seed, target.id, candidate.id, 0xa77b5ULL));
    std::shuffle(eligible.begin(), eligible.end(), rng);
    eligible.resize(cfg.attribute_count);
    std::sort(eligible.begin(), eligible.end());
  }
  std::vector<std::string> phrases;
  for (auto k : eligible) {
    const bool more = target_view[k] > candidate_view[k];
    const std::map<std::string, std::string> values{{"attr", grammar.attribute_words[k]}};
    phrases.push_back(fill_template(more ? grammar.attribute_more : grammar.attribute_less, values));
    out.attributes.push_back(k);
    out.more.push_back(more);
  }
  out.text = join(phrases, grammar.joiner);
  return out;
}

Utterance attribute_feedback(const ItemDescriptor& target, const ItemDescriptor& candidate,
                             const FeedbackConfig& cfg, const Grammar& grammar,
                             const Vocab& vocab) {
  const auto tv = noisy_coarse(target, cfg.attribute_noise, cfg.seed);
  const auto cv = noisy_coarse(candidate, cfg.attribute_noise, cfg.seed);
  return make_utterance(vocab,
                        attribute_feedback_detail(target, tv, candidate, cv, cfg, grammar).text);
}

Simulator::Simulator(const corpus::Corpus& corpus, Grammar grammar, FeedbackConfig cfg)
    : corpus_(&corpus), grammar_(std::move(grammar)), vocab_(build_vocab(grammar_)), cfg_(cfg) {
  cfg_.validate();
  if (cfg_.channel == Channel::attribute) {
    views_.reserve(corpus.size());
    for (const auto& item : corpus.items) {
      views_.push_back(noisy_coarse(item, cfg_.attribute_noise, cfg_.seed));
    }
  }
}

std::string Simulator::describe(ItemId target, ItemId candidate) const {
  const auto& t = corpus_->item(target);
  const auto& c = corpus_->item(candidate);
  if (cfg_.channel == Channel::natural_language) {
    return relative_caption_detail(t, c, cfg_, grammar_).text;
  }
  return attribute_feedback_detail(t, views_[target], c, views_[candidate], cfg_, grammar_).text;
}

Utterance Simulator::respond(ItemId target, ItemId candidate) const {
  return make_utterance(vocab_, describe(target, candidate));
}

}  // namespace dmgr::feedback
