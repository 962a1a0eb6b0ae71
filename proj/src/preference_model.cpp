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

#include "catrec/preference_model.hpp"

#include <cmath>
#include <stdexcept>

namespace catrec {

CategoryHeads::CategoryHeads(std::size_t num_categories, std::size_t hidden_size)
    : weight("heads.weight", static_cast<Eigen::Index>(num_categories),
             static_cast<Eigen::Index>(hidden_size)),
      bias("heads.bias", static_cast<Eigen::Index>(num_categories), 1) {}

void CategoryHeads::init(double stddev, std::mt19937_64& rng) {
  nn::init_normal(weight, stddev, rng);
  bias.value.setZero();
}

nn::Vector CategoryHeads::logits(const nn::Matrix& hiddens) const {
  if (hiddens.rows() != weight.value.rows() || hiddens.cols() != weight.value.cols())
    throw std::invalid_argument("category heads: hidden state shape mismatch");
  return hiddens.cwiseProduct(weight.value).rowwise().sum() + bias.value.col(0);
}

nn::Matrix CategoryHeads::backward(const nn::Matrix& hiddens, const CategoryPreference& pref,
                                   const nn::Vector& d_pref) {
  const nn::Vector d_logit =
      d_pref.cwiseProduct(pref.values.cwiseProduct((1.0 - pref.values.array()).matrix()));
  weight.grad += (hiddens.array().colwise() * d_logit.array()).matrix();
  bias.grad.col(0) += d_logit;
  return (weight.value.array().colwise() * d_logit.array()).matrix();
}

CategoryPreference predict_preferences(const nn::Matrix& hiddens, const CategoryHeads& heads) {
  return {heads.logits(hiddens).unaryExpr([](double z) { return nn::sigmoid(z); })};
}

double rmse_loss(const CategoryPreference& pred, const std::vector<double>& target) {
  if (pred.size() != target.size()) throw std::invalid_argument("rmse_loss: length mismatch");
  double sum = 0.0;
  for (std::size_t i = 0; i < target.size(); ++i) {
    const double d = pred[i] - target[i];
    sum += d * d;
  }
  return std::sqrt(sum / static_cast<double>(target.size()));
}

nn::Vector rmse_loss_grad(const CategoryPreference& pred, const std::vector<double>& target) {
  const double loss = rmse_loss(pred, target);
  nn::Vector g = nn::Vector::Zero(pred.values.size());
  if (loss == 0.0) return g;
  const double n = static_cast<double>(target.size());
  for (std::size_t i = 0; i < target.size(); ++i)
    g(static_cast<Eigen::Index>(i)) = (pred[i] - target[i]) / (n * loss);
  return g;
}

// ---------------------------------------------------------------------------

PreferenceModel::PreferenceModel(CategoryVocabulary categories, WordPieceTokenizer tokenizer,
                                 const EncoderConfig& encoder_config, std::size_t max_len,
                                 std::mt19937_64& rng, double head_init_std)
    : categories_(std::move(categories)), tokenizer_(std::move(tokenizer)), max_len_(max_len) {
  specials_ = SpecialTokens::install(tokenizer_.mutable_vocab(), categories_);
  EncoderConfig cfg = encoder_config;
  cfg.vocab_size = tokenizer_.vocab().size();
  if (max_len_ > cfg.max_positions)
    throw std::invalid_argument("max_len exceeds the encoder's positional capacity");
  encoder_ = TransformerEncoder(cfg, rng);
  heads_ = CategoryHeads(categories_.size(), cfg.hidden_size);
  heads_.init(head_init_std, rng);
}

PreferenceModel::PreferenceModel(CategoryVocabulary categories, WordPieceTokenizer tokenizer,
                                 TransformerEncoder encoder, CategoryHeads heads,
                                 std::size_t max_len)
    : categories_(std::move(categories)),
      tokenizer_(std::move(tokenizer)),
      specials_(SpecialTokens::lookup(tokenizer_.vocab(), categories_)),
      encoder_(std::move(encoder)),
      heads_(std::move(heads)),
      max_len_(max_len) {
  if (heads_.num_categories() != categories_.size() ||
      heads_.hidden_size() != encoder_.hidden_size())
    throw std::invalid_argument("preference model: head shape does not match encoder/categories");
  if (encoder_.config().vocab_size != tokenizer_.vocab().size())
    throw std::invalid_argument("preference model: encoder vocabulary size mismatch");
  if (max_len_ > encoder_.config().max_positions)
    throw std::invalid_argument("max_len exceeds the encoder's positional capacity");
}

EncodedInput PreferenceModel::form(const std::vector<Utterance>& history) const {
  return form_input(history, tokenizer_, specials_, max_len_);
}

CategoryPreference PreferenceModel::predict(const EncodedInput& input) const {
  return predict_preferences(encoder_.encode(input), heads_);
}

CategoryPreference PreferenceModel::predict(const std::vector<Utterance>& history) const {
  return predict(form(history));
}

CategoryPreference PreferenceModel::forward(const EncodedInput& input, Trace& trace,
                                            std::mt19937_64& rng) const {
  const nn::Matrix h = encoder_.forward(input, &trace.encoder, &rng);
  trace.hiddens.resize(static_cast<Eigen::Index>(input.cat_positions.size()), h.cols());
  for (std::size_t i = 0; i < input.cat_positions.size(); ++i)
    trace.hiddens.row(static_cast<Eigen::Index>(i)) =
        h.row(static_cast<Eigen::Index>(input.cat_positions[i]));
  trace.cat_positions = input.cat_positions;
  trace.length = input.size();
  trace.pref = predict_preferences(trace.hiddens, heads_);
  return trace.pref;
}

void PreferenceModel::backward(const Trace& trace, const nn::Vector& d_pref) {
  const nn::Matrix d_hiddens = heads_.backward(trace.hiddens, trace.pref, d_pref);
  nn::Matrix d_out = nn::Matrix::Zero(static_cast<Eigen::Index>(trace.length), d_hiddens.cols());
  for (std::size_t i = 0; i < trace.cat_positions.size(); ++i)
    d_out.row(static_cast<Eigen::Index>(trace.cat_positions[i])) =
        d_hiddens.row(static_cast<Eigen::Index>(i));
  encoder_.backward(trace.encoder, d_out);
}

nn::ParameterRefs PreferenceModel::parameters() {
  auto out = encoder_.parameters();
  for (auto* p : heads_.parameters()) out.push_back(p);
  return out;
}

nn::ConstParameterRefs PreferenceModel::parameters() const {
  auto out = encoder_.parameters();
  for (const auto* p : heads_.parameters()) out.push_back(p);
  return out;
}

}  // namespace catrec
