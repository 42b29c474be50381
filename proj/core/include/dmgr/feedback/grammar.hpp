// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "dmgr/corpus/descriptor.hpp"

namespace dmgr::feedback {

inline constexpr int kGrammarFormatVersion = 1;

/// Surface forms for both feedback channels. Templates use {placeholder}
/// slots filled from `words`: {attr}, {category}, {color}, {toe}, {pattern},
/// {ornament}, {position}.
struct Grammar {
  int version = kGrammarFormatVersion;
  std::string same;    // identical pair sentinel
  std::string joiner;  // between phrases

  std::string relative_more;  // natural-language channel, continuous features
  std::string relative_less;
  std::string absolute_high;
  std::string absolute_low;
  std::string attribute_more;  // attribute channel
  std::string attribute_less;

  std::array<std::string, corpus::kCoarseCount> attribute_words;

  // one template per fine field; keyed overrides for specific target values
  std::array<std::string, corpus::kFineFieldCount> field_templates;
  std::map<std::string, std::string> pattern_overrides;   // pattern value -> template
  std::map<std::string, std::string> ornament_overrides;  // ornament value -> template

  std::map<std::string, std::string> category_words;
  std::map<std::string, std::string> color_words;
  std::map<std::string, std::string> toe_words;
  std::map<std::string, std::string> pattern_words;
  std::map<std::string, std::string> ornament_words;
  std::map<std::string, std::string> position_words;

  /// Extra terminals offered to humans (UI suggestion strip); part of the vocabulary.
  std::vector<std::string> lexicon;

  /// Every string that can contribute terminals to an utterance.
  std::vector<std::string> all_surface_strings() const;
};

/// The built-in grammar as JSON text.
const std::string& default_grammar_json();
Grammar default_grammar();

Grammar grammar_from_json(const std::string& text);
std::string grammar_to_json(const Grammar& grammar);
Grammar load_grammar(const std::filesystem::path& path);

/// Replaces each {key} in `tmpl` with the mapped value.
std::string fill_template(const std::string& tmpl,
                          const std::map<std::string, std::string>& values);

}  // namespace dmgr::feedback
