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

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include "catrec/catalog.hpp"
#include "catrec/preference_model.hpp"
#include "catrec/recommender_head.hpp"

namespace catrec {

enum class TrainingMode { kTwoStage, kE2E, kOracle };

std::string_view to_string(TrainingMode mode);
TrainingMode parse_mode(std::string_view name);

/// A trained (or partly trained) pipeline plus the catalog it is bound to.
/// Oracle bundles carry no preference model; a Stage-1 bundle carries no
/// scorer yet.
struct ModelBundle {
  TrainingMode mode = TrainingMode::kTwoStage;
  CategoryVocabulary categories = CategoryVocabulary::movielens();
  std::string catalog_fingerprint;
  std::optional<PreferenceModel> preference;
  std::optional<ItemScorer> scorer;
  /// Directory holding the catalog and sample files the bundle was trained on.
  std::string data_dir;

  /// Throws DataError unless `catalog` matches the recorded fingerprint
  /// and the scorer shape.
  void check_catalog(const Catalog& catalog) const;
};

/// Directory layout: manifest.txt, and optionally preference/ (manifest,
/// vocab.txt, weights.bin) and scorer.bin.
void save_bundle(const std::filesystem::path& dir, const ModelBundle& bundle);
ModelBundle load_bundle(const std::filesystem::path& dir);

void save_preference_model(const std::filesystem::path& dir, const PreferenceModel& model);
PreferenceModel load_preference_model(const std::filesystem::path& dir);

}  // namespace catrec
