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

#include "catrec/catalog.hpp"
#include "catrec/corpus.hpp"

namespace catrec {

struct DatasetPaths {
  std::filesystem::path redial_train;
  std::filesystem::path redial_test;
  std::filesystem::path movielens;
};

struct IngestOptions {
  std::uint64_t seed = 42;
  bool include_empty_history = false;
};

/// Everything produced by ingestion: the catalog, the split conversations
/// and the per-split samples, with their reports.
struct Dataset {
  Catalog catalog;
  std::vector<Conversation> conversations;
  std::vector<Sample> train;
  std::vector<Sample> validation;
  std::vector<Sample> test;
  MovieLensReport movielens_report;
  CatalogReport catalog_report;
  ParseReport parse_report;
  SampleReport sample_report;

  std::string report() const;
};

/// Catalog linking, parsing, split assignment and sample building.
Dataset ingest(const DatasetPaths& paths, const IngestOptions& options = {});

/// Writes catalog.tsv, samples_{train,validation,test}.jsonl and
/// ingest_report.txt into `dir`.
void save_dataset(const std::filesystem::path& dir, const Dataset& dataset);

struct LoadedData {
  Catalog catalog;
  std::vector<Sample> train;
  std::vector<Sample> validation;
  std::vector<Sample> test;

  const std::vector<Sample>& split(Split s) const;
};
LoadedData load_dataset(const std::filesystem::path& dir);

}  // namespace catrec
