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

#include <algorithm>
#include <numeric>

#include "catrec/recommender_head.hpp"
#include "test_support.hpp"

using namespace catrec;

namespace {

nn::Vector random_vector(Eigen::Index n, std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> normal(0.0, scale);
  nn::Vector v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = normal(rng);
  return v;
}

}  // namespace

TEST_CASE("zero scorer gives a uniform distribution", "[recommender]") {
  const ItemScorer scorer(7, 19);
  const auto scores = score_items(nn::Vector::Constant(19, 0.3), scorer);
  for (std::size_t i = 0; i < 7; ++i) CHECK(scores[i] == Catch::Approx(1.0 / 7.0));
}

TEST_CASE("toy affine scorer", "[recommender]") {
  ItemScorer scorer(3, 2);
  scorer.weight.value << 1, 0, 0, 1, 0, 0;
  nn::Vector pref(2);
  pref << 1, 0;
  const auto scores = score_items(pref, scorer);
  CHECK(scores[0] == Catch::Approx(0.5761).margin(5e-5));
  CHECK(scores[1] == Catch::Approx(0.2119).margin(5e-5));
  CHECK(scores[2] == Catch::Approx(0.2119).margin(5e-5));
  CHECK(cross_entropy_loss(scores, 0) == Catch::Approx(0.5514).margin(5e-5));
  CHECK(cross_entropy_from_logits(scorer.logits(pref), 0) == Catch::Approx(0.5514).margin(5e-5));
}

TEST_CASE("cross-entropy limits", "[recommender]") {
  const ItemScorer uniform(6924, 19);
  const auto scores = score_items(nn::Vector::Zero(19), uniform);
  CHECK(cross_entropy_loss(scores, 17) == Catch::Approx(std::log(6924.0)));
  CHECK(cross_entropy_loss(scores, 17) == Catch::Approx(8.8428).margin(1e-4));

  nn::Vector logits = nn::Vector::Zero(4);
  logits(2) = 20.0;
  CHECK(cross_entropy_from_logits(logits, 2) < 1e-3);
}

TEST_CASE("softmax normalizes and is shift invariant", "[recommender]") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 1000; ++trial) {
    const auto n = std::uniform_int_distribution<Eigen::Index>(1, 50)(rng);
    const nn::Vector z = random_vector(n, rng, 10.0);
    const nn::Vector p = softmax(z);
    CHECK(std::abs(p.sum() - 1.0) <= 1e-6);
    CHECK((p.array() >= 0).all());
    const double c = std::uniform_real_distribution<double>(-100, 100)(rng);
    CHECK((softmax((z.array() + c).matrix()) - p).cwiseAbs().maxCoeff() <= 1e-9);
  }
}

TEST_CASE("softmax is stable for extreme logits", "[recommender]") {
  nn::Vector z(3);
  z << 1000, 999, -1000;
  const auto p = softmax(z);
  CHECK(p.allFinite());
  CHECK(p.sum() == Catch::Approx(1.0));
  z(0) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(score_items(z, ItemScorer(2, 3)), std::domain_error);
}

TEST_CASE("scorer gradients match finite differences", "[recommender]") {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 20; ++trial) {
    ItemScorer scorer(5, 3);
    nn::init_normal(scorer.weight, 1.0, rng);
    nn::init_normal(scorer.bias, 1.0, rng);
    const nn::Vector pref = random_vector(3, rng).array().abs().min(1.0).matrix();
    const auto target = std::uniform_int_distribution<ItemIndex>(0, 4)(rng);

    auto loss = [&] { return cross_entropy_from_logits(scorer.logits(pref), target); };
    scorer.weight.zero_grad();
    scorer.bias.zero_grad();
    const nn::Vector d_pref = scorer.backward(pref, cross_entropy_grad(scorer.logits(pref), target));
    const nn::Matrix gw = scorer.weight.grad, gb = scorer.bias.grad;
    CHECK(testing::max_gradient_error(scorer.weight, gw, loss) < 1e-4);
    CHECK(testing::max_gradient_error(scorer.bias, gb, loss) < 1e-4);

    // Gradient with respect to the preference input.
    nn::Vector p = pref;
    for (Eigen::Index c = 0; c < 3; ++c) {
      const double h = 1e-6;
      p(c) += h;
      const double up = cross_entropy_from_logits(scorer.logits(p), target);
      p(c) -= 2 * h;
      const double down = cross_entropy_from_logits(scorer.logits(p), target);
      p(c) += h;
      CHECK(d_pref(c) == Catch::Approx((up - down) / (2 * h)).epsilon(1e-4).margin(1e-8));
    }
  }
}

TEST_CASE("ranking", "[recommender]") {
  nn::Vector s(3);
  s << 0.5, 0.3, 0.2;
  CHECK(rank_items(s, 2) == std::vector<RankedItem>{{0, 0.5}, {1, 0.3}});

  nn::Vector tie(5);
  tie << 0.1, 0.1, 0.3, 0.1, 0.3;
  const auto ranked = rank_items(tie, 3);
  CHECK(ranked[0].item == 2);
  CHECK(ranked[1].item == 4);
  CHECK(ranked[2].item == 0);

  CHECK_THROWS(rank_items(s, 0));
  CHECK_THROWS(rank_items(s, 4));
}

TEST_CASE("top-k matches a brute-force full sort", "[recommender]") {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 1000; ++trial) {
    const nn::Vector p = softmax(random_vector(100, rng));
    std::vector<ItemIndex> order(100);
    std::iota(order.begin(), order.end(), ItemIndex{0});
    std::stable_sort(order.begin(), order.end(), [&](ItemIndex a, ItemIndex b) {
      return p(static_cast<Eigen::Index>(a)) > p(static_cast<Eigen::Index>(b));
    });
    const auto top = rank_items(p, 10);
    for (std::size_t i = 0; i < 10; ++i) CHECK(top[i].item == order[i]);
  }
}
