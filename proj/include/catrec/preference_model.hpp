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

#include <random>
#include <vector>

#include "catrec/catalog.hpp"
#include "catrec/encoder.hpp"
#include "catrec/encoder_input.hpp"
#include "catrec/nn.hpp"
#include "catrec/text.hpp"

namespace catrec {

/// Per-category interest in (0, 1), indexed by the category vocabulary.
struct CategoryPreference {
  nn::Vector values;

  std::size_t size() const { return static_cast<std::size_t>(values.size()); }
  double operator[](std::size_t i) const { return values(static_cast<Eigen::Index>(i)); }
};

/// Independent affine head per category: head i reads only the hidden
/// state of category token i.
class CategoryHeads {
 public:
  CategoryHeads() = default;
  CategoryHeads(std::size_t num_categories, std::size_t hidden_size);

  /// Small symmetric weights, zero biases: initial outputs sit near 0.5.
  void init(double stddev, std::mt19937_64& rng);

  std::size_t num_categories() const { return static_cast<std::size_t>(weight.value.rows()); }
  std::size_t hidden_size() const { return static_cast<std::size_t>(weight.value.cols()); }

  /// Pre-sigmoid scores, one per category.
  nn::Vector logits(const nn::Matrix& hiddens) const;
  /// Accumulates head gradients for d(loss)/d(pref); returns d(loss)/d(hiddens).
  nn::Matrix backward(const nn::Matrix& hiddens, const CategoryPreference& pref,
                      const nn::Vector& d_pref);

  nn::ParameterRefs parameters() { return {&weight, &bias}; }
  nn::ConstParameterRefs parameters() const { return {&weight, &bias}; }

  nn::Parameter weight;  // (C, hid)
  nn::Parameter bias;    // (C, 1)
};

/// sigmoid(W_i . h_i + b_i) for each category i; `hiddens` is (C, hid).
CategoryPreference predict_preferences(const nn::Matrix& hiddens, const CategoryHeads& heads);

/// sqrt(mean_i (pred_i - target_i)^2).
double rmse_loss(const CategoryPreference& pred, const std::vector<double>& target);
/// Gradient of rmse_loss w.r.t. pred (zero where the loss is zero).
nn::Vector rmse_loss_grad(const CategoryPreference& pred, const std::vector<double>& target);

/// Tokenizer, special tokens, encoder and heads: history in, preferences out.
class PreferenceModel {
 public:
  PreferenceModel(CategoryVocabulary categories, WordPieceTokenizer tokenizer,
                  const EncoderConfig& encoder_config, std::size_t max_len, std::mt19937_64& rng,
                  double head_init_std = 0.02);
  PreferenceModel(CategoryVocabulary categories, WordPieceTokenizer tokenizer,
                  TransformerEncoder encoder, CategoryHeads heads, std::size_t max_len);

  EncodedInput form(const std::vector<Utterance>& history) const;
  CategoryPreference predict(const std::vector<Utterance>& history) const;
  CategoryPreference predict(const EncodedInput& input) const;

  struct Trace {
    TransformerEncoder::Cache encoder;
    nn::Matrix hiddens;
    CategoryPreference pref;
    std::vector<std::size_t> cat_positions;
    std::size_t length = 0;
  };
  /// Training forward pass with dropout.
  CategoryPreference forward(const EncodedInput& input, Trace& trace, std::mt19937_64& rng) const;
  void backward(const Trace& trace, const nn::Vector& d_pref);

  const CategoryVocabulary& categories() const { return categories_; }
  const WordPieceTokenizer& tokenizer() const { return tokenizer_; }
  const SpecialTokens& specials() const { return specials_; }
  const TransformerEncoder& encoder() const { return encoder_; }
  const CategoryHeads& heads() const { return heads_; }
  std::size_t max_len() const { return max_len_; }

  nn::ParameterRefs parameters();
  nn::ConstParameterRefs parameters() const;

 private:
  CategoryVocabulary categories_;
  WordPieceTokenizer tokenizer_;
  SpecialTokens specials_;
  TransformerEncoder encoder_;
  CategoryHeads heads_;
  std::size_t max_len_;
};

}  // namespace catrec
