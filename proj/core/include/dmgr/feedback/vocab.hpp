// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "dmgr/feedback/grammar.hpp"
#include "dmgr/nn/text_cnn.hpp"

namespace dmgr::feedback {

using nn::TokenId;

inline constexpr TokenId kPadId = 0;
inline constexpr TokenId kUnkId = 1;
inline constexpr TokenId kEosId = 2;
inline constexpr std::size_t kMaxUtteranceTokens = 16;

class Vocab {
 public:
  /// Reserved ids first (<pad>, <unk>, <eos>), then `words` in the given order.
  explicit Vocab(const std::vector<std::string>& words);

  std::size_t size() const noexcept { return words_.size(); }
  bool contains(std::string_view word) const;
  /// Unknown words map to <unk>.
  TokenId id(std::string_view word) const;
  const std::string& word(TokenId id) const;
  const std::vector<std::string>& words() const noexcept { return words_; }

 private:
  std::vector<std::string> words_;
  std::unordered_map<std::string, TokenId> ids_;
};

/// Every terminal reachable from the grammar (plus its lexicon), sorted, after
/// the reserved tokens. Rebuilding from the same grammar gives the same ids.
Vocab build_vocab(const Grammar& grammar);

/// Lowercases and splits on whitespace and punctuation; hyphens inside a
/// word are kept ("high-heel" is one word).
std::vector<std::string> split_words(std::string_view text);

struct Utterance {
  std::vector<TokenId> tokens;  // ends with <eos>, at most 16 ids
  std::string surface;

  friend bool operator==(const Utterance&, const Utterance&) = default;
};

/// Maps words to ids (<unk> for unknown), keeps at most 15 words and
/// appends <eos>.
std::vector<TokenId> tokenize(const Vocab& vocab, std::string_view text);

Utterance make_utterance(const Vocab& vocab, std::string text);

}  // namespace dmgr::feedback
