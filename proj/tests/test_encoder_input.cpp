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

#include <catch_amalgamated.hpp>

#include "catrec/encoder_input.hpp"
#include "test_support.hpp"

using namespace catrec;
using catrec::testing::recommender;
using catrec::testing::seeker;

namespace {

struct Fixture {
  WordPieceTokenizer tokenizer = testing::tokenizer_for(
      {"looking for comedies", "i loved so much", "try this one", "a b c d e f g h"});
  CategoryVocabulary categories = CategoryVocabulary::movielens();
  SpecialTokens specials = SpecialTokens::install(tokenizer.mutable_vocab(), categories);

  TokenId id(const std::string& token) const { return *tokenizer.vocab().find(token); }
};

constexpr auto U = Segment::kUser;
constexpr auto S = Segment::kSystem;

}  // namespace

TEST_CASE("basic tokenization lowercases and isolates punctuation", "[text]") {
  CHECK(basic_tokenize("Hi, I LOVED it!") ==
        std::vector<std::string>{"hi", ",", "i", "loved", "it", "!"});
}

TEST_CASE("wordpiece falls back to subword pieces", "[text]") {
  const auto tok = WordPieceTokenizer::train({"comedy comedy"}, 2, 100);
  CHECK(tok.tokenize("comedy") == std::vector<std::string>{"comedy"});
  CHECK(tok.tokenize("code") == std::vector<std::string>{"c", "##o", "##d", "##e"});
  CHECK(tok.encode("\x01")[0] == tok.unk_id());
}

TEST_CASE("'Looking for comedies' golden layout", "[encoder_input]") {
  Fixture f;
  const auto in = form_input({seeker("Looking for comedies")}, f.tokenizer, f.specials);

  std::vector<TokenId> expected_tokens = f.specials.categories;
  for (TokenId t : {f.specials.sou, f.id("looking"), f.id("for"), f.id("comedies"), f.specials.eou})
    expected_tokens.push_back(t);
  std::vector<Segment> expected_segments(19, S);
  for (Segment s : {S, U, U, U, S}) expected_segments.push_back(s);

  CHECK(in.token_ids == expected_tokens);
  CHECK(in.segment_ids == expected_segments);
  REQUIRE(in.cat_positions.size() == 19);
  for (std::size_t i = 0; i < 19; ++i) CHECK(in.cat_positions[i] == i);
  CHECK(f.tokenizer.vocab().token(in.token_ids[0]) == "[CAT:Comedy]");
}

TEST_CASE("empty history is the category block alone", "[encoder_input]") {
  Fixture f;
  const auto in = form_input({}, f.tokenizer, f.specials);
  CHECK(in.token_ids == f.specials.categories);
  CHECK(in.segment_ids == std::vector<Segment>(19, S));
}

TEST_CASE("movie mentions become IM", "[encoder_input]") {
  Fixture f;
  const auto in = form_input({seeker("I loved @111776 so much")}, f.tokenizer, f.specials);
  const std::vector<TokenId> body(in.token_ids.begin() + 19, in.token_ids.end());
  CHECK(body == std::vector<TokenId>{f.specials.sou, f.id("i"), f.id("loved"), f.specials.im,
                                     f.id("so"), f.id("much"), f.specials.eou});
  // IM is a special token and belongs to the system segment.
  CHECK(in.segment_ids[19 + 3] == S);
  CHECK(in.segment_ids[19 + 2] == U);
}

TEST_CASE("IM masking hides which movie was mentioned", "[encoder_input]") {
  Fixture f;
  const auto a = form_input({seeker("I loved @111776"), recommender("try @5")}, f.tokenizer, f.specials);
  const auto b = form_input({seeker("I loved @42"), recommender("try @123456789")}, f.tokenizer,
                            f.specials);
  CHECK(a == b);
}

TEST_CASE("multiple utterances are separated and segmented by speaker", "[encoder_input]") {
  Fixture f;
  const auto in = form_input({seeker("i loved"), recommender("try this")}, f.tokenizer, f.specials);
  const std::vector<TokenId> body(in.token_ids.begin() + 19, in.token_ids.end());
  CHECK(body == std::vector<TokenId>{f.specials.sou, f.id("i"), f.id("loved"), f.specials.eou,
                                     f.specials.sep, f.specials.sou, f.id("try"), f.id("this"),
                                     f.specials.eou});
  const std::vector<Segment> segs(in.segment_ids.begin() + 19, in.segment_ids.end());
  CHECK(segs == std::vector<Segment>{S, U, U, S, S, S, S, S, S});
}

TEST_CASE("truncation keeps the category block and the newest turns", "[encoder_input]") {
  Fixture f;
  const std::vector<Utterance> history = {seeker("a b c d e f g h"), recommender("try this one"),
                                          seeker("i loved")};
  // Full length: 19 + (8+2) + 1 + (3+2) + 1 + (2+2) = 40.
  CHECK(form_input(history, f.tokenizer, f.specials).size() == 40);

  for (std::size_t max_len : {39u, 35u, 30u, 29u, 26u, 23u}) {
    const auto in = form_input(history, f.tokenizer, f.specials, max_len);
    INFO("max_len " << max_len);
    CHECK(in.size() <= max_len);
    CHECK(std::vector<TokenId>(in.token_ids.begin(), in.token_ids.begin() + 19) ==
          f.specials.categories);
    // The newest utterance survives intact at the end.
    const std::vector<TokenId> tail(in.token_ids.end() - 4, in.token_ids.end());
    CHECK(tail == std::vector<TokenId>{f.specials.sou, f.id("i"), f.id("loved"), f.specials.eou});
  }

  // Oldest utterance head-truncated: "a b c" dropped, "d .. h" kept.
  const auto cut = form_input(history, f.tokenizer, f.specials, 37);
  CHECK(cut.token_ids[19] == f.specials.sou);
  CHECK(cut.token_ids[20] == f.id("d"));

  CHECK_THROWS(form_input(history, f.tokenizer, f.specials, 22));
}
