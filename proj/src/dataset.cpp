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

#include "catrec/dataset.hpp"

#include <fstream>
#include <sstream>

namespace catrec {

namespace fs = std::filesystem;

std::string Dataset::report() const {
  std::ostringstream out;
  out << "# movielens\nrows=" << movielens_report.data_rows
      << "\nskipped_rows=" << movielens_report.skipped_rows << "\n";
  out << "# catalog\n" << catalog_report.to_string();
  out << "# corpus\n" << parse_report.to_string();
  out << "# samples\nrecommender_mentions=" << sample_report.recommender_mentions
      << "\nsamples=" << sample_report.samples
      << "\ndropped_empty_history=" << sample_report.dropped_empty_history
      << "\ntrain=" << train.size() << "\nvalidation=" << validation.size()
      << "\ntest=" << test.size() << "\n";
  std::size_t conv[3] = {0, 0, 0};
  for (const auto& c : conversations) ++conv[static_cast<int>(c.split)];
  out << "conversations_train=" << conv[0] << "\nconversations_validation=" << conv[1]
      << "\nconversations_test=" << conv[2] << "\n";
  return out.str();
}

Dataset ingest(const DatasetPaths& paths, const IngestOptions& options) {
  MovieLensReport ml_report;
  const auto movielens = load_movielens(paths.movielens, &ml_report);
  const auto movies = collect_movie_mentions({paths.redial_train, paths.redial_test});

  CatalogReport catalog_report;
  Catalog catalog = build_catalog(movies, movielens, CategoryVocabulary::movielens(), &catalog_report);

  ParseReport parse_report;
  auto conversations = parse_redial(paths.redial_train, catalog, Split::kTrain, &parse_report);
  auto test = parse_redial(paths.redial_test, catalog, Split::kTest, &parse_report);
  conversations.insert(conversations.end(), std::make_move_iterator(test.begin()),
                       std::make_move_iterator(test.end()));
  assign_splits(conversations, options.seed);

  Dataset ds{std::move(catalog), {}, {}, {}, {}, ml_report, catalog_report, parse_report, {}};
  for (const auto& conv : conversations) {
    auto samples = build_samples(conv, ds.catalog, options.include_empty_history, &ds.sample_report);
    auto& bucket = conv.split == Split::kTrain        ? ds.train
                   : conv.split == Split::kValidation ? ds.validation
                                                      : ds.test;
    bucket.insert(bucket.end(), std::make_move_iterator(samples.begin()),
                  std::make_move_iterator(samples.end()));
  }
  ds.conversations = std::move(conversations);
  return ds;
}

void save_dataset(const fs::path& dir, const Dataset& dataset) {
  fs::create_directories(dir);
  dataset.catalog.save(dir / "catalog.tsv");
  save_samples(dir / "samples_train.jsonl", dataset.train);
  save_samples(dir / "samples_validation.jsonl", dataset.validation);
  save_samples(dir / "samples_test.jsonl", dataset.test);
  std::ofstream out(dir / "ingest_report.txt");
  if (!out) throw DataError("cannot write ingest report in " + dir.string());
  out << dataset.report();
}

const std::vector<Sample>& LoadedData::split(Split s) const {
  switch (s) {
    case Split::kTrain: return train;
    case Split::kValidation: return validation;
    case Split::kTest: return test;
  }
  return test;
}

LoadedData load_dataset(const fs::path& dir) {
  return LoadedData{Catalog::load(dir / "catalog.tsv"), load_samples(dir / "samples_train.jsonl"),
                    load_samples(dir / "samples_validation.jsonl"),
                    load_samples(dir / "samples_test.jsonl")};
}

}  // namespace catrec
