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

#include "catrec/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <random>
#include <sstream>

#include <json.hpp>

namespace catrec {

using nlohmann::json;

std::string_view to_string(Sender sender) {
  return sender == Sender::kSeeker ? "seeker" : "recommender";
}

std::string_view to_string(Split split) {
  switch (split) {
    case Split::kTrain: return "train";
    case Split::kValidation: return "validation";
    case Split::kTest: return "test";
  }
  return "?";
}

Split parse_split(std::string_view name) {
  if (name == "train") return Split::kTrain;
  if (name == "validation" || name == "valid" || name == "val") return Split::kValidation;
  if (name == "test") return Split::kTest;
  throw DataError("unknown split '" + std::string(name) + "'");
}

std::vector<RedialId> extract_mentions(std::string_view text) {
  std::vector<RedialId> out;
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] != '@') continue;
    std::size_t j = i + 1;
    RedialId id = 0;
    while (j < text.size() && std::isdigit(static_cast<unsigned char>(text[j]))) {
      id = id * 10 + (text[j] - '0');
      ++j;
    }
    if (j > i + 1) {
      out.push_back(id);
      i = j - 1;
    }
  }
  return out;
}

std::string ParseReport::to_string() const {
  std::ostringstream out;
  out << "conversations=" << conversations << "\nutterances=" << utterances
      << "\nmentions=" << mentions << "\nunresolved_mentions=" << unresolved_mentions
      << "\nmalformed_lines=" << malformed_lines << "\n";
  return out.str();
}

namespace {

std::optional<RedialId> parse_id(const std::string& s) {
  if (s.empty()) return std::nullopt;
  RedialId id = 0;
  for (char c : s) {
    if (!std::isdigit(static_cast<unsigned char>(c))) return std::nullopt;
    id = id * 10 + (c - '0');
  }
  return id;
}

std::string id_string(const json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_integer()) return std::to_string(v.get<long long>());
  throw DataError("identifier is neither string nor integer");
}

}  // namespace

std::vector<std::pair<RedialId, std::string>> collect_movie_mentions(
    const std::vector<std::filesystem::path>& paths) {
  std::map<RedialId, std::string> movies;
  for (const auto& path : paths) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open ReDial file " + path.string());
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      json record = json::parse(line, nullptr, /*allow_exceptions=*/false);
      if (record.is_discarded() || !record.is_object()) continue;
      const auto it = record.find("movieMentions");
      if (it == record.end() || !it->is_object()) continue;
      for (const auto& [key, title] : it->items()) {
        auto id = parse_id(key);
        if (!id) continue;
        movies.try_emplace(*id, title.is_string() ? title.get<std::string>() : std::string());
      }
    }
  }
  return {movies.begin(), movies.end()};
}

std::vector<Conversation> parse_redial(std::istream& in, const Catalog& catalog, Split split,
                                       ParseReport* report) {
  ParseReport local;
  ParseReport& rep = report ? *report : local;
  std::vector<Conversation> conversations;

  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      const json record = json::parse(line);
      Conversation conv;
      conv.conv_id = id_string(record.at("conversationId"));
      conv.split = split;
      const std::string seeker = id_string(record.at("initiatorWorkerId"));
      for (const auto& msg : record.at("messages")) {
        Utterance u;
        u.sender = id_string(msg.at("senderWorkerId")) == seeker ? Sender::kSeeker
                                                                  : Sender::kRecommender;
        u.text = msg.at("text").get<std::string>();
        for (RedialId id : extract_mentions(u.text)) {
          if (catalog.find(id)) {
            u.mentions.push_back(id);
            ++rep.mentions;
          } else {
            ++rep.unresolved_mentions;
          }
        }
        conv.utterances.push_back(std::move(u));
      }
      rep.utterances += conv.utterances.size();
      ++rep.conversations;
      conversations.push_back(std::move(conv));
    } catch (const std::exception& e) {
      ++rep.malformed_lines;
      rep.warnings.push_back("line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return conversations;
}

std::vector<Conversation> parse_redial(const std::filesystem::path& path, const Catalog& catalog,
                                       Split split, ParseReport* report) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open ReDial file " + path.string());
  return parse_redial(in, catalog, split, report);
}

void assign_splits(std::vector<Conversation>& conversations, std::uint64_t seed) {
  std::vector<std::size_t> pool;
  bool has_test = false;
  for (std::size_t i = 0; i < conversations.size(); ++i) {
    if (conversations[i].split == Split::kTest)
      has_test = true;
    else
      pool.push_back(i);
  }
  std::mt19937_64 rng(seed);
  std::shuffle(pool.begin(), pool.end(), rng);

  const double n = static_cast<double>(pool.size());
  std::size_t n_train, n_val;
  if (has_test) {
    n_train = static_cast<std::size_t>(std::lround(0.8 * n));
    n_val = pool.size() - n_train;
  } else {
    n_train = static_cast<std::size_t>(std::lround(0.72 * n));
    n_val = static_cast<std::size_t>(std::lround(0.18 * n));
  }
  for (std::size_t k = 0; k < pool.size(); ++k) {
    auto& conv = conversations[pool[k]];
    conv.split = k < n_train ? Split::kTrain
                 : k < n_train + n_val ? Split::kValidation
                                       : Split::kTest;
  }
}

SampleReport& SampleReport::operator+=(const SampleReport& other) {
  recommender_mentions += other.recommender_mentions;
  samples += other.samples;
  dropped_empty_history += other.dropped_empty_history;
  return *this;
}

std::vector<Sample> build_samples(const Conversation& conversation, const Catalog& catalog,
                                  bool include_empty_history, SampleReport* report) {
  SampleReport local;
  SampleReport& rep = report ? *report : local;
  std::vector<Sample> samples;
  const auto& utts = conversation.utterances;
  for (std::size_t cut = 0; cut < utts.size(); ++cut) {
    const Utterance& u = utts[cut];
    if (u.sender != Sender::kRecommender) continue;
    for (RedialId id : u.mentions) {
      const Item* item = catalog.find(id);
      if (!item) continue;
      ++rep.recommender_mentions;
      if (cut == 0 && !include_empty_history) {
        ++rep.dropped_empty_history;
        continue;
      }
      Sample s;
      s.conv_id = conversation.conv_id;
      s.split = conversation.split;
      s.cut = cut;
      s.history.assign(utts.begin(), utts.begin() + static_cast<std::ptrdiff_t>(cut));
      s.target_item = item->item_index;
      s.target_category_vector = item->category_vector;
      samples.push_back(std::move(s));
      ++rep.samples;
    }
  }
  return samples;
}

void write_samples(std::ostream& out, const std::vector<Sample>& samples) {
  for (const auto& s : samples) {
    json history = json::array();
    for (const auto& u : s.history)
      history.push_back({{"sender", to_string(u.sender)}, {"text", u.text}, {"mentions", u.mentions}});
    json record = {{"conv_id", s.conv_id},
                   {"split", to_string(s.split)},
                   {"cut", s.cut},
                   {"target_item", s.target_item},
                   {"target_category_vector", s.target_category_vector},
                   {"history", std::move(history)}};
    out << record.dump() << '\n';
  }
}

std::vector<Sample> read_samples(std::istream& in) {
  std::vector<Sample> samples;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      const json r = json::parse(line);
      Sample s;
      s.conv_id = r.at("conv_id").get<std::string>();
      s.split = parse_split(r.at("split").get<std::string>());
      s.cut = r.at("cut").get<std::size_t>();
      s.target_item = r.at("target_item").get<ItemIndex>();
      s.target_category_vector = r.at("target_category_vector").get<std::vector<double>>();
      for (const auto& h : r.at("history")) {
        Utterance u;
        u.sender = h.at("sender").get<std::string>() == "seeker" ? Sender::kSeeker
                                                                 : Sender::kRecommender;
        u.text = h.at("text").get<std::string>();
        u.mentions = h.at("mentions").get<std::vector<RedialId>>();
        s.history.push_back(std::move(u));
      }
      samples.push_back(std::move(s));
    } catch (const json::exception& e) {
      throw DataError("samples line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return samples;
}

void save_samples(const std::filesystem::path& path, const std::vector<Sample>& samples) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write samples " + path.string());
  write_samples(out, samples);
}

std::vector<Sample> load_samples(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open samples " + path.string());
  return read_samples(in);
}

}  // namespace catrec
