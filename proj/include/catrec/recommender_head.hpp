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

#include <cstddef>
#include <random>
#include <vector>

#include "catrec/catalog.hpp"
#include "catrec/nn.hpp"

namespace catrec {

/// Normalized item distribution (softmax output).
struct RecommendationScores {
  nn::Vector scores;

  std::size_t size() const { return static_cast<std::size_t>(scores.size()); }
  double operator[](std::size_t i) const { return scores(static_cast<Eigen::Index>(i)); }
};

/// Affine map from category preferences to item logits.
class ItemScorer {
 public:
  ItemScorer() = default;
  /// Zero-initialized: the initial distribution is uniform.
  ItemScorer(std::size_t num_items, std::size_t num_categories);

  std::size_t num_items() const { return static_cast<std::size_t>(weight.value.rows()); }
  std::size_t num_categories() const { return static_cast<std::size_t>(weight.value.cols()); }

  nn::Vector logits(const nn::Vector& pref) const;
  /// Accumulates dW, db for d(loss)/d(logits); returns d(loss)/d(pref).
  nn::Vector backward(const nn::Vector& pref, const nn::Vector& d_logits);

  nn::ParameterRefs parameters() { return {&weight, &bias}; }
  nn::ConstParameterRefs parameters() const { return {&weight, &bias}; }

  nn::Parameter weight;  // (I, C)
  nn::Parameter bias;    // (I, 1)
};

/// Softmax with max subtraction.
nn::Vector softmax(const nn::Vector& logits);
double log_sum_exp(const nn::Vector& logits);

/// softmax(W pref + b). Throws std::domain_error on a non-finite input.
RecommendationScores score_items(const nn::Vector& pref, const ItemScorer& scorer);

/// -log(scores[target]).
double cross_entropy_loss(const RecommendationScores& scores, ItemIndex target);
/// Log-softmax form of the same loss, computed from logits.
double cross_entropy_from_logits(const nn::Vector& logits, ItemIndex target);
/// softmax(logits) - onehot(target).
nn::Vector cross_entropy_grad(const nn::Vector& logits, ItemIndex target);

struct RankedItem {
  ItemIndex item;
  double score;
  bool operator==(const RankedItem&) const = default;
};

/// Top-k by score descending; ties go to the lower item index.
std::vector<RankedItem> rank_items(const RecommendationScores& scores, std::size_t k);
std::vector<RankedItem> rank_items(const nn::Vector& scores, std::size_t k);

}  // namespace catrec
