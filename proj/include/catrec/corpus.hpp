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

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "catrec/catalog.hpp"

namespace catrec {

enum class Sender { kSeeker, kRecommender };
enum class Split { kTrain, kValidation, kTest };

std::string_view to_string(Sender sender);
std::string_view to_string(Split split);
Split parse_split(std::string_view name);

struct Utterance {
  Sender sender = Sender::kSeeker;
  std::string text;
  /// Catalog-resolved "@<id>" mentions in text order.
  std::vector<RedialId> mentions;
};

struct Conversation {
  std::string conv_id;
  std::vector<Utterance> utterances;
  Split split = Split::kTrain;
};

struct Sample {
  std::string conv_id;
  Split split = Split::kTrain;
  /// Index of the recommender utterance holding the target mention.
  std::size_t cut = 0;
  /// Utterances strictly before `cut`.
  std::vector<Utterance> history;
  ItemIndex target_item = 0;
  std::vector<double> target_category_vector;
};

/// Every "@<digits>" in `text`, in order.
std::vector<RedialId> extract_mentions(std::string_view text);

struct ParseReport {
  std::size_t conversations = 0;
  std::size_t utterances = 0;
  std::size_t mentions = 0;
  std::size_t unresolved_mentions = 0;
  std::size_t malformed_lines = 0;
  std::vector<std::string> warnings;

  std::string to_string() const;
};

/// First pass over ReDial files: the union of the per-conversation
/// movieMentions tables. The first title seen for an id wins.
std::vector<std::pair<RedialId, std::string>> collect_movie_mentions(
    const std::vector<std::filesystem::path>& paths);

/// Parses a ReDial JSON-lines file. Every conversation gets `split`, which
/// is how the published train/test partition is carried.
std::vector<Conversation> parse_redial(const std::filesystem::path& path, const Catalog& catalog,
                                       Split split, ParseReport* report = nullptr);
std::vector<Conversation> parse_redial(std::istream& in, const Catalog& catalog, Split split,
                                       ParseReport* report = nullptr);

/// Keeps conversations already marked test; splits the remainder 80/20
/// into train/validation with a seeded shuffle. When no conversation is
/// marked test, the whole list is split 72/18/10.
void assign_splits(std::vector<Conversation>& conversations, std::uint64_t seed);

struct SampleReport {
  std::size_t recommender_mentions = 0;
  std::size_t samples = 0;
  std::size_t dropped_empty_history = 0;

  SampleReport& operator+=(const SampleReport& other);
};

std::vector<Sample> build_samples(const Conversation& conversation, const Catalog& catalog,
                                  bool include_empty_history = false,
                                  SampleReport* report = nullptr);

void write_samples(std::ostream& out, const std::vector<Sample>& samples);
std::vector<Sample> read_samples(std::istream& in);
void save_samples(const std::filesystem::path& path, const std::vector<Sample>& samples);
std::vector<Sample> load_samples(const std::filesystem::path& path);

}  // namespace catrec
