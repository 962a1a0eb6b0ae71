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

#include "catrec/text.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>

#include "catrec/catalog.hpp"

namespace catrec {

namespace {

constexpr std::size_t kMaxWordChars = 100;

// Splits a word into UTF-8 code point strings.
std::vector<std::string> code_points(const std::string& word) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < word.size();) {
    const auto c = static_cast<unsigned char>(word[i]);
    std::size_t len = c < 0x80 ? 1 : (c >> 5) == 0x6 ? 2 : (c >> 4) == 0xE ? 3 : (c >> 3) == 0x1E ? 4 : 1;
    len = std::min(len, word.size() - i);
    out.push_back(word.substr(i, len));
    i += len;
  }
  return out;
}

}  // namespace

std::vector<std::string> basic_tokenize(std::string_view text) {
  std::vector<std::string> out;
  std::string current;
  auto flush = [&] {
    if (!current.empty()) out.push_back(std::move(current));
    current.clear();
  };
  for (char ch : text) {
    const auto c = static_cast<unsigned char>(ch);
    if (std::isspace(c)) {
      flush();
    } else if (c < 0x80 && std::ispunct(c)) {
      flush();
      out.emplace_back(1, ch);
    } else {
      current += static_cast<char>(c < 0x80 ? std::tolower(c) : c);
    }
  }
  flush();
  return out;
}

// ---------------------------------------------------------------------------

TokenId TokenVocabulary::add(const std::string& token) {
  if (auto id = find(token)) return *id;
  const auto id = static_cast<TokenId>(tokens_.size());
  tokens_.push_back(token);
  ids_.emplace(token, id);
  return id;
}

std::optional<TokenId> TokenVocabulary::find(std::string_view token) const {
  const auto it = ids_.find(std::string(token));
  if (it == ids_.end()) return std::nullopt;
  return it->second;
}

void TokenVocabulary::save(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write vocabulary " + path.string());
  for (const auto& t : tokens_) out << t << '\n';
}

TokenVocabulary TokenVocabulary::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open vocabulary " + path.string());
  TokenVocabulary vocab;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (vocab.contains(line)) throw DataError("duplicate vocabulary entry '" + line + "'");
    vocab.add(line);
  }
  return vocab;
}

// ---------------------------------------------------------------------------

WordPieceTokenizer::WordPieceTokenizer(TokenVocabulary vocab) : vocab_(std::move(vocab)) {
  auto unk = vocab_.find(kUnkToken);
  if (!unk) throw DataError("tokenizer vocabulary lacks [UNK]");
  unk_id_ = *unk;
}

WordPieceTokenizer WordPieceTokenizer::train(const std::vector<std::string>& texts,
                                             std::size_t min_count, std::size_t max_words) {
  std::map<std::string, std::size_t> counts;
  std::map<std::string, std::size_t> chars;
  for (const auto& text : texts) {
    for (const auto& w : basic_tokenize(text)) {
      ++counts[w];
      for (const auto& cp : code_points(w)) ++chars[cp];
    }
  }
  std::vector<std::pair<std::string, std::size_t>> words(counts.begin(), counts.end());
  // Frequency descending, then lexicographic: deterministic.
  std::stable_sort(words.begin(), words.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });

  TokenVocabulary vocab;
  vocab.add(std::string(kPadToken));
  vocab.add(std::string(kUnkToken));
  vocab.add(std::string(kSepToken));
  std::size_t taken = 0;
  for (const auto& [w, n] : words) {
    if (n < min_count || taken >= max_words) break;
    vocab.add(w);
    ++taken;
  }
  for (const auto& [c, n] : chars) {
    vocab.add(c);
    vocab.add("##" + c);
  }
  return WordPieceTokenizer(std::move(vocab));
}

void WordPieceTokenizer::wordpiece(const std::string& word, std::vector<std::string>& out) const {
  const auto cps = code_points(word);
  if (cps.size() > kMaxWordChars) {
    out.emplace_back(kUnkToken);
    return;
  }
  std::vector<std::string> pieces;
  std::size_t start = 0;
  while (start < cps.size()) {
    std::size_t end = cps.size();
    std::string found;
    while (end > start) {
      std::string candidate = start > 0 ? "##" : "";
      for (std::size_t i = start; i < end; ++i) candidate += cps[i];
      if (vocab_.contains(candidate)) {
        found = std::move(candidate);
        break;
      }
      --end;
    }
    if (found.empty()) {
      out.emplace_back(kUnkToken);
      return;
    }
    pieces.push_back(std::move(found));
    start = end;
  }
  out.insert(out.end(), pieces.begin(), pieces.end());
}

std::vector<std::string> WordPieceTokenizer::tokenize(std::string_view text) const {
  std::vector<std::string> out;
  for (const auto& word : basic_tokenize(text)) wordpiece(word, out);
  return out;
}

std::vector<TokenId> WordPieceTokenizer::encode(std::string_view text) const {
  std::vector<TokenId> ids;
  for (const auto& piece : tokenize(text)) ids.push_back(vocab_.find(piece).value_or(unk_id_));
  return ids;
}

}  // namespace catrec
