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
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "catrec/checkpoint.hpp"
#include "catrec/corpus.hpp"
#include "catrec/recommender_head.hpp"

namespace catrec {

/// 1 iff `target` is among the first `n` entries of `ranked`.
int recall_at_n(const std::vector<ItemIndex>& ranked, ItemIndex target, std::size_t n);
int recall_at_n(const std::vector<RankedItem>& ranked, ItemIndex target, std::size_t n);

struct EvalReport {
  double rec_at_1_pct = 0.0;
  double rec_at_10_pct = 0.0;
  std::size_t sample_count = 0;
  std::string mode;
  std::map<std::string, std::string> metadata;

  /// Table-style report with the published baselines for context.
  std::string to_table() const;
  /// key = value lines for regression checks.
  std::string to_key_values() const;
};

struct EvalOptions {
  /// Remove items already mentioned in the history from the ranking.
  bool exclude_mentioned = false;
};

/// Scores one sample over the whole catalog.
using SampleScorer = std::function<nn::Vector(const Sample&)>;

/// Recall@1 and Recall@10 averaged over samples.
EvalReport evaluate_scores(const std::vector<Sample>& samples, const Catalog& catalog,
                           const SampleScorer& scorer, const std::string& mode,
                           const EvalOptions& options = {});

/// Full pipeline evaluation. Preferences come from the bundle's model, or
/// from each sample's target category vector for oracle bundles.
EvalReport evaluate(const ModelBundle& bundle, const std::vector<Sample>& samples,
                    const Catalog& catalog, const EvalOptions& options = {});

/// Uniformly random scores; the chance-level floor.
SampleScorer random_scorer(std::size_t num_items, std::uint64_t seed);

}  // namespace catrec
