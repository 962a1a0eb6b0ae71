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

#include "catrec/recommender_head.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace catrec {

ItemScorer::ItemScorer(std::size_t num_items, std::size_t num_categories)
    : weight("scorer.weight", static_cast<Eigen::Index>(num_items),
             static_cast<Eigen::Index>(num_categories)),
      bias("scorer.bias", static_cast<Eigen::Index>(num_items), 1) {}

nn::Vector ItemScorer::logits(const nn::Vector& pref) const {
  if (static_cast<std::size_t>(pref.size()) != num_categories())
    throw std::invalid_argument("item scorer: preference length mismatch");
  return weight.value * pref + bias.value.col(0);
}

nn::Vector ItemScorer::backward(const nn::Vector& pref, const nn::Vector& d_logits) {
  weight.grad.noalias() += d_logits * pref.transpose();
  bias.grad.col(0) += d_logits;
  return weight.value.transpose() * d_logits;
}

double log_sum_exp(const nn::Vector& logits) {
  const double m = logits.maxCoeff();
  return m + std::log((logits.array() - m).exp().sum());
}

nn::Vector softmax(const nn::Vector& logits) {
  const double m = logits.maxCoeff();
  nn::Vector e = (logits.array() - m).exp();
  return e / e.sum();
}

RecommendationScores score_items(const nn::Vector& pref, const ItemScorer& scorer) {
  if (!pref.allFinite()) throw std::domain_error("score_items: non-finite preference component");
  return {softmax(scorer.logits(pref))};
}

double cross_entropy_loss(const RecommendationScores& scores, ItemIndex target) {
  if (target >= scores.size()) throw std::out_of_range("cross_entropy_loss: target out of range");
  return -std::log(scores[target]);
}

double cross_entropy_from_logits(const nn::Vector& logits, ItemIndex target) {
  if (target >= static_cast<std::size_t>(logits.size()))
    throw std::out_of_range("cross_entropy: target out of range");
  return log_sum_exp(logits) - logits(static_cast<Eigen::Index>(target));
}

nn::Vector cross_entropy_grad(const nn::Vector& logits, ItemIndex target) {
  nn::Vector g = softmax(logits);
  g(static_cast<Eigen::Index>(target)) -= 1.0;
  return g;
}

std::vector<RankedItem> rank_items(const nn::Vector& scores, std::size_t k) {
  const auto n = static_cast<std::size_t>(scores.size());
  if (k < 1 || k > n) throw std::invalid_argument("rank_items: k must be in [1, |I|]");
  std::vector<ItemIndex> order(n);
  std::iota(order.begin(), order.end(), ItemIndex{0});
  const auto before = [&](ItemIndex a, ItemIndex b) {
    const double sa = scores(static_cast<Eigen::Index>(a));
    const double sb = scores(static_cast<Eigen::Index>(b));
    return sa > sb || (sa == sb && a < b);
  };
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k), order.end(), before);
  std::vector<RankedItem> out;
  out.reserve(k);
  for (std::size_t i = 0; i < k; ++i)
    out.push_back({order[i], scores(static_cast<Eigen::Index>(order[i]))});
  return out;
}

std::vector<RankedItem> rank_items(const RecommendationScores& scores, std::size_t k) {
  return rank_items(scores.scores, k);
}

}  // namespace catrec
