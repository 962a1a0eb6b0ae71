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

#include <map>
#include <set>
#include <sstream>

#include "catrec/corpus.hpp"
#include "test_support.hpp"

using namespace catrec;
using catrec::testing::recommender;
using catrec::testing::seeker;

namespace {

Conversation conversation(std::string id, std::vector<Utterance> utts, Split split = Split::kTrain) {
  return {std::move(id), std::move(utts), split};
}

std::vector<Conversation> parse(const std::string& text, const Catalog& catalog,
                                ParseReport* report = nullptr) {
  std::istringstream in(text);
  return parse_redial(in, catalog, Split::kTrain, report);
}

}  // namespace

TEST_CASE("mention extraction", "[corpus]") {
  CHECK(extract_mentions("I loved @111776") == std::vector<RedialId>{111776});
  CHECK(extract_mentions("@1 and @22, not @ or @x") == std::vector<RedialId>{1, 22});
  CHECK(extract_mentions("no movies here").empty());
}

TEST_CASE("a two-message record maps senders by initiator", "[corpus]") {
  const auto catalog = testing::toy_catalog();
  ParseReport report;
  const auto convs = parse(
      R"j({"conversationId":"391","initiatorWorkerId":0,"respondentWorkerId":1,)j"
      R"j("movieMentions":{"111776":"Moana (2016)"},"messages":[)j"
      R"j({"senderWorkerId":0,"text":"I loved @111776","messageId":1,"timeOffset":0},)j"
      R"j({"senderWorkerId":1,"text":"Great pick, try @999","messageId":2,"timeOffset":5}]})j",
      catalog, &report);
  REQUIRE(convs.size() == 1);
  const auto& c = convs[0];
  CHECK(c.conv_id == "391");
  REQUIRE(c.utterances.size() == 2);
  CHECK(c.utterances[0].sender == Sender::kSeeker);
  CHECK(c.utterances[1].sender == Sender::kRecommender);
  CHECK(c.utterances[0].mentions == std::vector<RedialId>{111776});
  // @999 is not in the catalog: dropped from mentions and counted.
  CHECK(c.utterances[1].mentions.empty());
  CHECK(report.mentions == 1);
  CHECK(report.unresolved_mentions == 1);
  CHECK(report.utterances == 2);
}

TEST_CASE("malformed lines are counted, not fatal", "[corpus]") {
  ParseReport report;
  const auto convs = parse("{not json\n{\"conversationId\":\"1\"}\n", testing::toy_catalog(), &report);
  CHECK(convs.empty());
  CHECK(report.malformed_lines == 2);
  CHECK(report.warnings.size() == 2);
}

TEST_CASE("splits keep the published test set and divide the rest 80/20", "[corpus]") {
  auto make = [] {
    std::vector<Conversation> convs;
    for (int i = 0; i < 9; ++i) convs.push_back(conversation(std::to_string(i), {}));
    convs.push_back(conversation("t", {}, Split::kTest));
    return convs;
  };
  auto convs = make();
  assign_splits(convs, 42);
  std::map<Split, int> counts;
  for (const auto& c : convs) ++counts[c.split];
  CHECK(counts[Split::kTest] == 1);
  CHECK(convs.back().split == Split::kTest);
  CHECK(counts[Split::kTrain] + counts[Split::kValidation] == 9);
  CHECK((counts[Split::kTrain] == 7 || counts[Split::kTrain] == 8));

  auto again = make();
  assign_splits(again, 42);
  for (std::size_t i = 0; i < convs.size(); ++i) CHECK(convs[i].split == again[i].split);
}

TEST_CASE("without a published test set the split is 72/18/10", "[corpus]") {
  std::vector<Conversation> convs;
  for (int i = 0; i < 1000; ++i) convs.push_back(conversation(std::to_string(i), {}));
  assign_splits(convs, 7);
  std::map<Split, int> counts;
  for (const auto& c : convs) ++counts[c.split];
  CHECK(counts[Split::kTrain] == 720);
  CHECK(counts[Split::kValidation] == 180);
  CHECK(counts[Split::kTest] == 100);
}

TEST_CASE("one sample per recommender mention, sharing the history", "[corpus]") {
  MovieLensIndex ml;
  const Catalog catalog = build_catalog(
      {{1, "Moana (2016)"}, {2, "Zootopia (2016)"}, {3, "Coco (2017)"}, {4, "Frozen (2013)"}}, ml,
      CategoryVocabulary::movielens());
  const auto conv = conversation(
      "c", {seeker("Hi! I am looking for a movie for my kids, like @4"),
            recommender("Recent films like @1 , @2 or @3 are good", {1, 2, 3})});
  SampleReport report;
  const auto samples = build_samples(conv, catalog, false, &report);
  REQUIRE(samples.size() == 3);
  for (const auto& s : samples) {
    CHECK(s.history.size() == 1);
    CHECK(s.history[0].text == samples[0].history[0].text);
    CHECK(s.cut == 1);
  }
  CHECK(samples[0].target_item == catalog.find(1)->item_index);
  CHECK(samples[2].target_item == catalog.find(3)->item_index);
  CHECK(report.samples == 3);
}

TEST_CASE("seeker-only mentions produce no samples", "[corpus]") {
  const auto catalog = testing::toy_catalog();
  const auto conv = conversation("c", {seeker("I loved @111776", {111776}), recommender("nice")});
  CHECK(build_samples(conv, catalog).empty());
}

TEST_CASE("history lengths follow the utterance index", "[corpus]") {
  const auto catalog = testing::toy_catalog();
  const auto conv = conversation("c", {seeker("hi"), recommender("try @111776", {111776}),
                                       seeker("seen it"), recommender("then @200001", {200001})});
  const auto samples = build_samples(conv, catalog);
  REQUIRE(samples.size() == 2);
  CHECK(samples[0].history.size() == 1);
  CHECK(samples[1].history.size() == 3);
  // No leakage: the target utterance never appears in its own history.
  for (const auto& s : samples) CHECK(s.history.size() == s.cut);
}

TEST_CASE("a mention in the opening utterance has empty history", "[corpus]") {
  const auto catalog = testing::toy_catalog();
  const auto conv = conversation("c", {recommender("hello, seen @111776?", {111776})});
  SampleReport report;
  CHECK(build_samples(conv, catalog, false, &report).empty());
  CHECK(report.dropped_empty_history == 1);
  const auto kept = build_samples(conv, catalog, true);
  REQUIRE(kept.size() == 1);
  CHECK(kept[0].history.empty());
}

TEST_CASE("samples round-trip through JSONL", "[corpus]") {
  const auto catalog = testing::toy_catalog();
  const auto conv = conversation("c", {seeker("hi @200003", {200003}),
                                       recommender("try @111776", {111776})},
                                 Split::kValidation);
  const auto samples = build_samples(conv, catalog);
  std::stringstream buffer;
  write_samples(buffer, samples);
  const auto back = read_samples(buffer);
  REQUIRE(back.size() == samples.size());
  CHECK(back[0].conv_id == "c");
  CHECK(back[0].split == Split::kValidation);
  CHECK(back[0].history[0].mentions == std::vector<RedialId>{200003});
  CHECK(back[0].target_category_vector == samples[0].target_category_vector);
}
