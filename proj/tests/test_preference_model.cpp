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

#include "catrec/preference_model.hpp"
#include "test_support.hpp"

using namespace catrec;

namespace {

nn::Matrix random_matrix(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  nn::Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = normal(rng);
  return m;
}

}  // namespace

TEST_CASE("zero heads predict 0.5 everywhere", "[preference]") {
  const CategoryHeads heads(19, 8);
  std::mt19937_64 rng(1);
  const auto pref = predict_preferences(random_matrix(19, 8, rng), heads);
  REQUIRE(pref.size() == 19);
  for (std::size_t i = 0; i < 19; ++i) CHECK(pref[i] == 0.5);
}

TEST_CASE("a large bias saturates its component", "[preference]") {
  CategoryHeads heads(3, 4);
  heads.bias.value(1, 0) = 20.0;
  const auto pref = predict_preferences(nn::Matrix::Zero(3, 4), heads);
  CHECK(pref[1] > 0.999);
  CHECK(pref[0] == 0.5);
  CHECK(nn::sigmoid(20.0) > 0.999);
  CHECK(nn::sigmoid(-800.0) >= 0.0);
}

TEST_CASE("RMSE values", "[preference]") {
  const std::vector<double> target(19, 0.0);
  CHECK(rmse_loss({nn::Vector::Zero(19)}, target) == 0.0);

  std::vector<double> binary(19, 0.0);
  binary[0] = binary[6] = 1.0;
  CHECK(rmse_loss({nn::Vector::Constant(19, 0.5)}, binary) == Catch::Approx(0.5).epsilon(1e-15));

  nn::Vector one_hot = nn::Vector::Zero(19);
  one_hot(0) = 1.0;
  CHECK(rmse_loss({one_hot}, target) == Catch::Approx(0.2294).margin(1e-4));
  CHECK(rmse_loss({one_hot}, target) == Catch::Approx(std::sqrt(1.0 / 19.0)));
}

TEST_CASE("heads and RMSE gradients match finite differences", "[preference]") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    CategoryHeads heads(3, 8);
    heads.init(1.0, rng);
    const nn::Matrix h = random_matrix(3, 8, rng);
    std::vector<double> target(3);
    for (auto& t : target) t = std::uniform_real_distribution<double>(0, 1)(rng);

    auto loss = [&] { return rmse_loss(predict_preferences(h, heads), target); };
    const auto pref = predict_preferences(h, heads);
    heads.weight.zero_grad();
    heads.bias.zero_grad();
    heads.backward(h, pref, rmse_loss_grad(pref, target));
    const nn::Matrix gw = heads.weight.grad, gb = heads.bias.grad;
    CHECK(testing::max_gradient_error(heads.weight, gw, loss) < 1e-4);
    CHECK(testing::max_gradient_error(heads.bias, gb, loss) < 1e-4);
  }
}

TEST_CASE("preference is monotone in the bias", "[preference]") {
  CategoryHeads heads(2, 2);
  const nn::Matrix h = nn::Matrix::Ones(2, 2);
  double last = 0.0;
  for (double b = -5; b <= 5; b += 0.5) {
    heads.bias.value(0, 0) = b;
    const double p = predict_preferences(h, heads)[0];
    CHECK(p > last);
    last = p;
  }
}

TEST_CASE("full model backward matches finite differences", "[preference]") {
  const auto catalog = testing::toy_catalog();
  std::mt19937_64 rng(2);
  auto cfg = testing::tiny_encoder();
  cfg.init_std = 0.3;
  PreferenceModel model(catalog.vocabulary(), testing::tokenizer_for({"looking for comedies"}), cfg,
                        96, rng, 0.3);
  const auto input = model.form({testing::seeker("looking for comedies")});
  std::vector<double> target(19, 0.0);
  target[0] = 1.0;

  auto loss = [&] { return rmse_loss(model.predict(input), target); };
  PreferenceModel::Trace trace;
  std::mt19937_64 dropout_rng(0);
  const auto pref = model.forward(input, trace, dropout_rng);
  nn::zero_grads(model.parameters());
  model.backward(trace, rmse_loss_grad(pref, target));

  for (nn::Parameter* p : model.parameters()) {
    if (p->name == "embeddings.token") continue;  // mostly untouched rows; covered in the encoder test
    const nn::Matrix grad = p->grad;
    INFO(p->name);
    CHECK(testing::max_gradient_error(*p, grad, loss) < 1e-4);
  }
}

TEST_CASE("a fresh model installs the special tokens", "[preference]") {
  const auto catalog = testing::toy_catalog();
  std::mt19937_64 rng(2);
  const PreferenceModel model(catalog.vocabulary(), testing::tokenizer_for({"hi"}),
                              testing::tiny_encoder(), 64, rng);
  CHECK(model.specials().categories.size() == 19);
  CHECK(model.tokenizer().vocab().contains("[IM]"));
  CHECK(model.encoder().config().vocab_size == model.tokenizer().vocab().size());
  const auto in = model.form({});
  CHECK(model.predict(in).size() == 19);
}
