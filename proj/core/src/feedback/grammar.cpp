// SPDX-License-Identifier: Apache-2.0
#include "dmgr/feedback/grammar.hpp"

#include "dmgr/errors.hpp"
#include "json.hpp"
#include "util/json_io.hpp"

namespace dmgr::feedback {

namespace {

const char* const kDefaultGrammar = R"json({
  "version": 1,
  "same": "looks the same",
  "joiner": "and",
  "continuous": {
    "relative_more": "is more {attr}",
    "relative_less": "is less {attr}",
    "absolute_high": "is very {attr}",
    "absolute_low": "is not {attr}",
    "attribute_more": "more {attr}",
    "attribute_less": "less {attr}"
  },
  "attributes": ["pointy", "open", "bright", "covered", "shiny",
                 "high-heel", "long", "formal", "sporty", "feminine"],
  "fields": {
    "category": "is a {category}",
    "primary_color": "is {color}",
    "accent_color": "{color} accents on {position}",
    "toe": "has {toe} toe",
    "pattern": "{pattern} on {position}",
    "ornament": "{ornament} on {position}",
    "ornament_position": "{ornament} on {position}"
  },
  "overrides": {
    "pattern": {"solid": "is solid"},
    "ornament": {"none": "no ornaments"}
  },
  "words": {
    "category": {"sneaker": "sneaker", "boot": "boot", "heel": "heel",
                 "sandal": "sandal", "flat": "flat"},
    "color": {"black": "black", "white": "white", "brown": "brown", "red": "red",
              "blue": "blue", "green": "green", "yellow": "yellow", "pink": "pink",
              "gray": "gray", "beige": "beige", "purple": "purple", "orange": "orange"},
    "toe": {"round": "round", "pointed": "pointed", "open": "open"},
    "pattern": {"solid": "solid", "stripes": "stripes", "polka": "polka dots",
                "leopard": "leopard print"},
    "ornament": {"laces": "laces", "strap": "strap", "buckle": "buckle", "bow": "bow",
                 "zipper": "zipper", "none": "ornaments"},
    "position": {"toe": "toe", "side": "side", "top": "top", "ankle": "ankle"}
  },
  "lexicon": ["has", "with", "on", "the", "a", "an", "print", "straps", "buckles",
              "bows", "zippers", "dots", "heels", "higher", "lower", "thinner",
              "darker", "lighter", "shoe", "shoes", "i", "want", "color", "toes",
              "more", "less", "very", "not", "no"]
})json";

using nlohmann::json;

std::map<std::string, std::string> string_map(const json& j) {
  return j.get<std::map<std::string, std::string>>();
}

template <std::size_t N>
void require_keys(const std::map<std::string, std::string>& m,
                  const std::array<std::string_view, N>& keys, const char* what) {
  for (auto k : keys) {
    if (!m.contains(std::string(k))) {
      throw ValidationError(std::string("grammar: missing ") + what + " word for '" +
                            std::string(k) + "'");
    }
  }
}

}  // namespace

std::vector<std::string> Grammar::all_surface_strings() const {
  std::vector<std::string> out{same,           joiner,         relative_more, relative_less,
                               absolute_high,  absolute_low,   attribute_more,
                               attribute_less};
  out.insert(out.end(), attribute_words.begin(), attribute_words.end());
  out.insert(out.end(), field_templates.begin(), field_templates.end());
  for (const auto* m : {&pattern_overrides, &ornament_overrides, &category_words, &color_words,
                        &toe_words, &pattern_words, &ornament_words, &position_words}) {
    for (const auto& [_, v] : *m) out.push_back(v);
  }
  out.insert(out.end(), lexicon.begin(), lexicon.end());
  return out;
}

const std::string& default_grammar_json() {
  static const std::string text(kDefaultGrammar);
  return text;
}

Grammar default_grammar() { return grammar_from_json(default_grammar_json()); }

Grammar grammar_from_json(const std::string& text) {
  const json doc = util::parse_json(text);
  Grammar g;
  try {
    g.version = doc.at("version").get<int>();
    if (g.version != kGrammarFormatVersion) {
      throw ValidationError("unsupported grammar version " + std::to_string(g.version));
    }
    g.same = doc.at("same").get<std::string>();
    g.joiner = doc.at("joiner").get<std::string>();
    const auto& c = doc.at("continuous");
    g.relative_more = c.at("relative_more").get<std::string>();
    g.relative_less = c.at("relative_less").get<std::string>();
    g.absolute_high = c.at("absolute_high").get<std::string>();
    g.absolute_low = c.at("absolute_low").get<std::string>();
    g.attribute_more = c.at("attribute_more").get<std::string>();
    g.attribute_less = c.at("attribute_less").get<std::string>();

    const auto attrs = doc.at("attributes").get<std::vector<std::string>>();
    if (attrs.size() != corpus::kCoarseCount) {
      throw ValidationError("grammar: expected 10 attribute words");
    }
    std::copy(attrs.begin(), attrs.end(), g.attribute_words.begin());

    const auto& fields = doc.at("fields");
    for (std::size_t f = 0; f < corpus::kFineFieldCount; ++f) {
      g.field_templates[f] = fields.at(std::string(corpus::kFineFieldNames[f])).get<std::string>();
    }
    if (doc.contains("overrides")) {
      const auto& o = doc.at("overrides");
      if (o.contains("pattern")) g.pattern_overrides = string_map(o.at("pattern"));
      if (o.contains("ornament")) g.ornament_overrides = string_map(o.at("ornament"));
    }
    const auto& w = doc.at("words");
    g.category_words = string_map(w.at("category"));
    g.color_words = string_map(w.at("color"));
    g.toe_words = string_map(w.at("toe"));
    g.pattern_words = string_map(w.at("pattern"));
    g.ornament_words = string_map(w.at("ornament"));
    g.position_words = string_map(w.at("position"));
    if (doc.contains("lexicon")) g.lexicon = doc.at("lexicon").get<std::vector<std::string>>();
  } catch (const json::exception& e) {
    throw ValidationError(std::string("grammar schema: ") + e.what());
  }
  require_keys(g.category_words, corpus::kCategoryNames, "category");
  require_keys(g.color_words, corpus::kColorNames, "color");
  require_keys(g.toe_words, corpus::kToeNames, "toe");
  require_keys(g.pattern_words, corpus::kPatternNames, "pattern");
  require_keys(g.ornament_words, corpus::kOrnamentNames, "ornament");
  require_keys(g.position_words, corpus::kPositionNames, "position");
  return g;
}

std::string grammar_to_json(const Grammar& g) {
  json fields = json::object();
  for (std::size_t f = 0; f < corpus::kFineFieldCount; ++f) {
    fields[std::string(corpus::kFineFieldNames[f])] = g.field_templates[f];
  }
  json doc = {
      {"version", g.version},
      {"same", g.same},
      {"joiner", g.joiner},
      {"continuous",
       {{"relative_more", g.relative_more},
        {"relative_less", g.relative_less},
        {"absolute_high", g.absolute_high},
        {"absolute_low", g.absolute_low},
        {"attribute_more", g.attribute_more},
        {"attribute_less", g.attribute_less}}},
      {"attributes", std::vector<std::string>(g.attribute_words.begin(), g.attribute_words.end())},
      {"fields", fields},
      {"overrides", {{"pattern", g.pattern_overrides}, {"ornament", g.ornament_overrides}}},
      {"words",
       {{"category", g.category_words},
        {"color", g.color_words},
        {"toe", g.toe_words},
        {"pattern", g.pattern_words},
        {"ornament", g.ornament_words},
        {"position", g.position_words}}},
      {"lexicon", g.lexicon}};
  return doc.dump(2) + "\n";
}

Grammar load_grammar(const std::filesystem::path& path) {
  return grammar_from_json(util::read_text_file(path));
}

std::string fill_template(const std::string& tmpl,
                          const std::map<std::string, std::string>& values) {
  std::string out;
  out.reserve(tmpl.size() + 16);
  std::size_t i = 0;
  while (i < tmpl.size()) {
    if (tmpl[i] == '{') {
      const auto close = tmpl.find('}', i);
      if (close == std::string::npos) throw ValidationError("unterminated template slot");
      const auto key = tmpl.substr(i + 1, close - i - 1);
      auto it = values.find(key);
      if (it == values.end()) throw ValidationError("template slot {" + key + "} unbound");
      out += it->second;
      i = close + 1;
    } else {
      out += tmpl[i++];
    }
  }
  return out;
}

}  // namespace dmgr::feedback
