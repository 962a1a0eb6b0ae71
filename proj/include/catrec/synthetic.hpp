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
#include <string>
#include <vector>

#include "catrec/dataset.hpp"

namespace catrec {

/// A ReDial-format corpus plus a MovieLens-format genre file with a planted
/// rule: the seeker names genres by keyword, and the recommender answers
/// with the one movie carrying exactly those genres.
struct SyntheticOptions {
  std::size_t conversations = 200;
  std::uint64_t seed = 7;
  double test_fraction = 0.1;
  /// Genres (from the front of a fixed shuffled list) used by target items.
  std::size_t genre_pool = 5;
  /// Each target item has this many genres; every combination is one item.
  std::size_t genres_per_item = 2;
  /// Movies absent from the genre file; only ever mentioned by the seeker.
  std::size_t unlinked_movies = 4;
  /// Extra seeker/recommender exchanges after the first recommendation.
  std::size_t follow_up_turns = 0;
};

struct SyntheticCorpus {
  std::vector<std::string> train_lines;
  std::vector<std::string> test_lines;
  std::string movies_csv;
};

SyntheticCorpus generate_synthetic_corpus(const SyntheticOptions& options);

/// Writes train_data.jsonl, test_data.jsonl and movies.csv; returns the paths.
DatasetPaths write_synthetic_corpus(const std::filesystem::path& dir, const SyntheticCorpus& corpus);

}  // namespace catrec
