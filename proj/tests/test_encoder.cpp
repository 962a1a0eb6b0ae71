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

#include "catrec/encoder.hpp"
#include "test_support.hpp"

using namespace catrec;

namespace {

EncodedInput toy_input() {
  EncodedInput in;
  in.token_ids = {0, 1, 2, 5, 7, 3, 9, 4};
  in.segment_ids = {Segment::kSystem, Segment::kSystem, Segment::kSystem, Segment::kSystem,
                    Segment::kUser,   Segment::kUser,   Segment::kUser,   Segment::kSystem};
  in.cat_positions = {0, 1, 2};
  return in;
}

}  // namespace

TEST_CASE("encode returns one hidden vector per category token", "[encoder]") {
  std::mt19937_64 rng(1);
  const TransformerEncoder enc(testing::tiny_encoder(12), rng);
  const auto h = enc.encode(toy_input());
  CHECK(h.rows() == 3);
  CHECK(h.cols() == 8);
  CHECK(h.allFinite());
}

TEST_CASE("inference is deterministic", "[encoder]") {
  auto cfg = testing::tiny_encoder(12);
  cfg.dropout = 0.1;
  std::mt19937_64 rng(1);
  const TransformerEncoder enc(cfg, rng);
  CHECK(enc.encode(toy_input()) == enc.encode(toy_input()));
}

TEST_CASE("word order matters", "[encoder]") {
  std::mt19937_64 rng(1);
  const TransformerEncoder enc(testing::tiny_encoder(12), rng);
  auto swapped = toy_input();
  std::swap(swapped.token_ids[4], swapped.token_ids[5]);
  CHECK((enc.encode(toy_input()) - enc.encode(swapped)).cwiseAbs().maxCoeff() > 1e-9);
}

TEST_CASE("inputs longer than the position table are rejected", "[encoder]") {
  auto cfg = testing::tiny_encoder(12);
  cfg.max_positions = 4;
  std::mt19937_64 rng(1);
  const TransformerEncoder enc(cfg, rng);
  CHECK_THROWS_AS(enc.forward(toy_input()), std::length_error);
}

TEST_CASE("encoder backward matches finite differences", "[encoder]") {
  auto cfg = testing::tiny_encoder(12);
  cfg.num_layers = 2;
  cfg.init_std = 0.5;
  std::mt19937_64 rng(5);
  TransformerEncoder enc(cfg, rng);
  const auto input = toy_input();

  nn::Matrix probe(static_cast<Eigen::Index>(input.size()), 8);
  std::normal_distribution<double> normal;
  for (Eigen::Index i = 0; i < probe.size(); ++i) probe.data()[i] = normal(rng);
  auto loss = [&] { return enc.forward(input).cwiseProduct(probe).sum(); };

  TransformerEncoder::Cache cache;
  enc.forward(input, &cache);
  nn::zero_grads(enc.parameters());
  enc.backward(cache, probe);

  for (nn::Parameter* p : enc.parameters()) {
    const nn::Matrix grad = p->grad;
    INFO(p->name);
    CHECK(testing::max_gradient_error(*p, grad, loss) < 1e-4);
  }
}

TEST_CASE("growing the vocabulary keeps existing embeddings", "[encoder]") {
  std::mt19937_64 rng(1);
  TransformerEncoder enc(testing::tiny_encoder(12), rng);
  const auto before = enc.encode(toy_input());
  enc.resize_vocab(20, rng);
  CHECK(enc.config().vocab_size == 20);
  CHECK(enc.encode(toy_input()) == before);
}
