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

#include "catrec/encoder_input.hpp"

#include <algorithm>
#include <cctype>
#include <deque>

namespace catrec {

std::string category_token_name(std::string_view category) {
  return "[CAT:" + std::string(category) + "]";
}

SpecialTokens SpecialTokens::install(TokenVocabulary& vocab, const CategoryVocabulary& categories) {
  for (const auto& name : categories.names()) vocab.add(category_token_name(name));
  vocab.add(std::string(kSepToken));
  vocab.add("[SOU]");
  vocab.add("[EOU]");
  vocab.add("[IM]");
  return lookup(vocab, categories);
}

SpecialTokens SpecialTokens::lookup(const TokenVocabulary& vocab,
                                    const CategoryVocabulary& categories) {
  auto need = [&](std::string_view token) {
    auto id = vocab.find(token);
    if (!id) throw DataError("vocabulary lacks special token " + std::string(token));
    return *id;
  };
  SpecialTokens s;
  for (const auto& name : categories.names()) s.categories.push_back(need(category_token_name(name)));
  s.sep = need(kSepToken);
  s.sou = need("[SOU]");
  s.eou = need("[EOU]");
  s.im = need("[IM]");
  return s;
}

bool SpecialTokens::is_special(TokenId id) const {
  return id == sep || id == sou || id == eou || id == im ||
         std::find(categories.begin(), categories.end(), id) != categories.end();
}

std::vector<TokenId> utterance_tokens(const Utterance& utterance,
                                      const WordPieceTokenizer& tokenizer,
                                      const SpecialTokens& specials) {
  std::vector<TokenId> out;
  std::string_view text = utterance.text;
  std::size_t plain_start = 0;
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] != '@') continue;
    std::size_t j = i + 1;
    while (j < text.size() && std::isdigit(static_cast<unsigned char>(text[j]))) ++j;
    if (j == i + 1) continue;
    for (TokenId id : tokenizer.encode(text.substr(plain_start, i - plain_start))) out.push_back(id);
    out.push_back(specials.im);
    plain_start = j;
    i = j - 1;
  }
  for (TokenId id : tokenizer.encode(text.substr(plain_start))) out.push_back(id);
  return out;
}

EncodedInput form_input(const std::vector<Utterance>& history, const WordPieceTokenizer& tokenizer,
                        const SpecialTokens& specials, std::size_t max_len) {
  const std::size_t num_cats = specials.categories.size();
  if (max_len <= num_cats + 3)
    throw std::invalid_argument("form_input: max_len must exceed the category block + 3");

  struct Block {
    std::vector<TokenId> text;
    Segment segment;
  };
  std::deque<Block> blocks;
  for (const auto& u : history)
    blocks.push_back({utterance_tokens(u, tokenizer, specials),
                      u.sender == Sender::kSeeker ? Segment::kUser : Segment::kSystem});

  // SOU + text + EOU, plus one SEP between consecutive utterances.
  auto total = [&] {
    std::size_t n = num_cats;
    for (const auto& b : blocks) n += b.text.size() + 2;
    if (!blocks.empty()) n += blocks.size() - 1;
    return n;
  };
  auto block_cost = [&](std::size_t i) {
    return blocks[i].text.size() + 2 + (blocks.size() > 1 ? 1 : 0);
  };

  std::size_t length = total();
  while (length > max_len) {
    const std::size_t excess = length - max_len;
    if (blocks.size() > 1 && (block_cost(0) <= excess || blocks.front().text.size() <= excess)) {
      length -= block_cost(0);
      blocks.pop_front();
      continue;
    }
    auto& text = blocks.front().text;
    text.erase(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(std::min(excess, text.size())));
    length = total();
  }

  EncodedInput in;
  in.token_ids.reserve(length);
  in.segment_ids.reserve(length);
  auto push = [&](TokenId id, Segment seg) {
    in.token_ids.push_back(id);
    in.segment_ids.push_back(seg);
  };
  for (std::size_t c = 0; c < num_cats; ++c) {
    in.cat_positions.push_back(in.token_ids.size());
    push(specials.categories[c], Segment::kSystem);
  }
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    if (b) push(specials.sep, Segment::kSystem);
    push(specials.sou, Segment::kSystem);
    for (TokenId id : blocks[b].text)
      push(id, id == specials.im ? Segment::kSystem : blocks[b].segment);
    push(specials.eou, Segment::kSystem);
  }
  return in;
}

}  // namespace catrec
