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
#include <vector>

#include "catrec/catalog.hpp"
#include "catrec/corpus.hpp"
#include "catrec/text.hpp"

namespace catrec {

/// Segment labels: user = seeker text, system = everything else.
enum class Segment : int { kUser = 0, kSystem = 1 };

/// Added vocabulary entries: one token per category plus the utterance
/// delimiters and the item-mention mask. SEP is the base vocabulary's own
/// separator.
struct SpecialTokens {
  std::vector<TokenId> categories;
  TokenId sep = 0;
  TokenId sou = 0;
  TokenId eou = 0;
  TokenId im = 0;

  /// Adds any missing special tokens to `vocab` and returns their ids.
  static SpecialTokens install(TokenVocabulary& vocab, const CategoryVocabulary& categories);
  /// Looks the special tokens up; throws DataError if any is missing.
  static SpecialTokens lookup(const TokenVocabulary& vocab, const CategoryVocabulary& categories);

  bool is_special(TokenId id) const;
};

std::string category_token_name(std::string_view category);

struct EncodedInput {
  std::vector<TokenId> token_ids;
  std::vector<Segment> segment_ids;
  std::vector<std::size_t> cat_positions;

  std::size_t size() const { return token_ids.size(); }
  bool operator==(const EncodedInput&) const = default;
};

inline constexpr std::size_t kDefaultMaxLen = 512;

/// Word pieces of one utterance with every "@<id>" replaced by the IM token.
std::vector<TokenId> utterance_tokens(const Utterance& utterance,
                                      const WordPieceTokenizer& tokenizer,
                                      const SpecialTokens& specials);

/// Lays out [Cat_1..Cat_C] then, per utterance, SOU text EOU with SEP
/// between utterances. Over-long inputs lose whole oldest utterances first,
/// then the oldest remaining one is truncated from its head.
EncodedInput form_input(const std::vector<Utterance>& history, const WordPieceTokenizer& tokenizer,
                        const SpecialTokens& specials, std::size_t max_len = kDefaultMaxLen);

}  // namespace catrec
