// Copyright 2026 The CatRec Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace catrec {

using TokenId = int;

/// Lowercases, splits on whitespace and isolates ASCII punctuation.
std::vector<std::string> basic_tokenize(std::string_view text);

/// Token string <-> id table. Ids are dense and stable once assigned.
class TokenVocabulary {
 public:
  TokenId add(const std::string& token);
  std::optional<TokenId> find(std::string_view token) const;
  bool contains(std::string_view token) const { return find(token).has_value(); }
  const std::string& token(TokenId id) const { return tokens_.at(static_cast<std::size_t>(id)); }
  std::size_t size() const { return tokens_.size(); }

  void save(const std::filesystem::path& path) const;
  static TokenVocabulary load(const std::filesystem::path& path);

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, TokenId> ids_;
};

inline constexpr std::string_view kPadToken = "[PAD]";
inline constexpr std::string_view kUnkToken = "[UNK]";
inline constexpr std::string_view kSepToken = "[SEP]";

/// Greedy longest-match-first subword tokenizer with "##" continuation
/// pieces, lowercasing input (uncased).
class WordPieceTokenizer {
 public:
  explicit WordPieceTokenizer(TokenVocabulary vocab);

  /// Builds a vocabulary from raw training texts: the reserved tokens, every
  /// word seen at least `min_count` times (most frequent first, at most
  /// `max_words`), and every character as a word-initial and a "##" piece so
  /// that no input ever maps to [UNK] for character coverage reasons.
  static WordPieceTokenizer train(const std::vector<std::string>& texts, std::size_t min_count,
                                  std::size_t max_words);

  std::vector<std::string> tokenize(std::string_view text) const;
  std::vector<TokenId> encode(std::string_view text) const;

  const TokenVocabulary& vocab() const { return vocab_; }
  TokenVocabulary& mutable_vocab() { return vocab_; }
  TokenId unk_id() const { return unk_id_; }

 private:
  void wordpiece(const std::string& word, std::vector<std::string>& out) const;

  TokenVocabulary vocab_;
  TokenId unk_id_;
};

}  // namespace catrec
