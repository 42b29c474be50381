// SPDX-License-Identifier: Apache-2.0
#include "dmgr/feedback/vocab.hpp"

#include <algorithm>
#include <cctype>
#include <set>

#include "dmgr/errors.hpp"

namespace dmgr::feedback {

namespace {

std::string strip_slots(const std::string& s) {
  std::string out;
  bool in_slot = false;
  for (char c : s) {
    if (c == '{') {
      in_slot = true;
      out += ' ';
    } else if (c == '}') {
      in_slot = false;
    } else if (!in_slot) {
      out += c;
    }
  }
  return out;
}

}  // namespace

Vocab::Vocab(const std::vector<std::string>& words) {
  words_ = {"<pad>", "<unk>", "<eos>"};
  for (const auto& w : words) {
    if (w.empty()) throw ValidationError("vocabulary words must be non-empty");
    words_.push_back(w);
  }
  for (std::size_t i = 0; i < words_.size(); ++i) {
    if (!ids_.emplace(words_[i], static_cast<TokenId>(i)).second) {
      throw ValidationError("duplicate vocabulary word '" + words_[i] + "'");
    }
  }
}

bool Vocab::contains(std::string_view word) const { return ids_.contains(std::string(word)); }

TokenId Vocab::id(std::string_view word) const {
  auto it = ids_.find(std::string(word));
  return it == ids_.end() ? kUnkId : it->second;
}

const std::string& Vocab::word(TokenId id) const {
  if (id >= words_.size()) throw ValidationError("token id outside vocabulary");
  return words_[id];
}

Vocab build_vocab(const Grammar& grammar) {
  std::set<std::string> terms;
  for (const auto& s : grammar.all_surface_strings()) {
    for (auto& w : split_words(strip_slots(s))) terms.insert(std::move(w));
  }
  return Vocab(std::vector<std::string>(terms.begin(), terms.end()));
}

std::vector<std::string> split_words(std::string_view text) {
  std::vector<std::string> out;
  std::string cur;
  auto flush = [&] {
    // hyphens only join word characters
    while (!cur.empty() && cur.front() == '-') cur.erase(cur.begin());
    while (!cur.empty() && cur.back() == '-') cur.pop_back();
    if (!cur.empty()) out.push_back(cur);
    cur.clear();
  };
  for (unsigned char c : text) {
    if (std::isalnum(c) || c == '-' || c >= 0x80) {
      cur += static_cast<char>(std::tolower(c));
    } else {
      flush();
    }
  }
  flush();
  return out;
}

std::vector<TokenId> tokenize(const Vocab& vocab, std::string_view text) {
  std::vector<TokenId> ids;
  for (const auto& w : split_words(text)) {
    if (ids.size() + 1 >= kMaxUtteranceTokens) break;
    ids.push_back(vocab.id(w));
  }
  ids.push_back(kEosId);
  return ids;
}

Utterance make_utterance(const Vocab& vocab, std::string text) {
  Utterance u;
  u.tokens = tokenize(vocab, text);
  u.surface = std::move(text);
  return u;
}

}  // namespace dmgr::feedback
