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

#include "catrec/encoder.hpp"

#include <cmath>
#include <stdexcept>

namespace catrec {

using nn::Matrix;

std::map<std::string, std::string> EncoderConfig::to_map() const {
  auto s = [](auto v) { return std::to_string(v); };
  char buf[32];
  std::map<std::string, std::string> kv{{"encoder.vocab_size", s(vocab_size)},
                                        {"encoder.hidden_size", s(hidden_size)},
                                        {"encoder.num_layers", s(num_layers)},
                                        {"encoder.num_heads", s(num_heads)},
                                        {"encoder.intermediate_size", s(intermediate_size)},
                                        {"encoder.max_positions", s(max_positions)}};
  std::snprintf(buf, sizeof(buf), "%.17g", dropout);
  kv["encoder.dropout"] = buf;
  std::snprintf(buf, sizeof(buf), "%.17g", init_std);
  kv["encoder.init_std"] = buf;
  return kv;
}

EncoderConfig EncoderConfig::from_map(const std::map<std::string, std::string>& kv) {
  EncoderConfig c;
  auto size = [&](const char* key, std::size_t& field) {
    if (auto it = kv.find(key); it != kv.end()) field = std::stoul(it->second);
  };
  auto real = [&](const char* key, double& field) {
    if (auto it = kv.find(key); it != kv.end()) field = std::stod(it->second);
  };
  size("encoder.vocab_size", c.vocab_size);
  size("encoder.hidden_size", c.hidden_size);
  size("encoder.num_layers", c.num_layers);
  size("encoder.num_heads", c.num_heads);
  size("encoder.intermediate_size", c.intermediate_size);
  size("encoder.max_positions", c.max_positions);
  real("encoder.dropout", c.dropout);
  real("encoder.init_std", c.init_std);
  return c;
}

TransformerEncoder::TransformerEncoder(const EncoderConfig& config, std::mt19937_64& rng)
    : config_(config) {
  const auto hid = static_cast<Eigen::Index>(config.hidden_size);
  const auto ffn = static_cast<Eigen::Index>(config.intermediate_size);
  if (config.vocab_size == 0 || hid == 0 || config.num_heads == 0 ||
      config.hidden_size % config.num_heads != 0)
    throw std::invalid_argument("encoder config: hidden_size must be a multiple of num_heads");

  token_embedding_ = nn::Parameter("embeddings.token", static_cast<Eigen::Index>(config.vocab_size), hid);
  position_embedding_ =
      nn::Parameter("embeddings.position", static_cast<Eigen::Index>(config.max_positions), hid);
  segment_embedding_ = nn::Parameter("embeddings.segment", 2, hid);
  nn::init_normal(token_embedding_, config.init_std, rng);
  nn::init_normal(position_embedding_, config.init_std, rng);
  nn::init_normal(segment_embedding_, config.init_std, rng);
  ln_embedding_ = nn::LayerNorm("embeddings.norm", hid);

  for (std::size_t l = 0; l < config.num_layers; ++l) {
    const std::string p = "layer" + std::to_string(l) + ".";
    Layer layer{nn::Linear(p + "query", hid, hid),   nn::Linear(p + "key", hid, hid),
                nn::Linear(p + "value", hid, hid),   nn::Linear(p + "attn_out", hid, hid),
                nn::LayerNorm(p + "attn_norm", hid), nn::Linear(p + "ffn_in", hid, ffn),
                nn::Linear(p + "ffn_out", ffn, hid), nn::LayerNorm(p + "ffn_norm", hid)};
    for (auto* lin : {&layer.query, &layer.key, &layer.value, &layer.attn_out, &layer.ffn_in,
                      &layer.ffn_out})
      lin->init(config.init_std, rng);
    layers_.push_back(std::move(layer));
  }
}

void TransformerEncoder::resize_vocab(std::size_t vocab_size, std::mt19937_64& rng) {
  const auto old_rows = token_embedding_.value.rows();
  const auto rows = static_cast<Eigen::Index>(vocab_size);
  if (rows <= old_rows) return;
  nn::Parameter grown(token_embedding_.name, rows, token_embedding_.value.cols());
  nn::init_normal(grown, config_.init_std, rng);
  grown.value.topRows(old_rows) = token_embedding_.value;
  token_embedding_ = std::move(grown);
  config_.vocab_size = vocab_size;
}

Matrix TransformerEncoder::layer_forward(const Layer& layer, const Matrix& x, LayerCache* cache,
                                         std::mt19937_64* rng) const {
  const auto len = x.rows();
  const auto heads = static_cast<Eigen::Index>(config_.num_heads);
  const auto head_dim = static_cast<Eigen::Index>(config_.hidden_size) / heads;
  const double scale = 1.0 / std::sqrt(static_cast<double>(head_dim));
  const double p = rng ? config_.dropout : 0.0;

  Matrix q = layer.query.forward(x);
  Matrix k = layer.key.forward(x);
  Matrix v = layer.value.forward(x);
  Matrix context(len, x.cols());
  std::vector<Matrix> probs;
  for (Eigen::Index h = 0; h < heads; ++h) {
    const auto cols = Eigen::seqN(h * head_dim, head_dim);
    Matrix attn = nn::softmax_rows(scale * q(Eigen::all, cols) * k(Eigen::all, cols).transpose());
    context(Eigen::all, cols) = attn * v(Eigen::all, cols);
    if (cache) probs.push_back(std::move(attn));
  }

  Matrix attn_out = layer.attn_out.forward(context);
  Matrix attn_mask = rng ? nn::dropout_mask(len, x.cols(), p, *rng) : Matrix();
  if (attn_mask.size()) attn_out = attn_out.cwiseProduct(attn_mask);
  Matrix y1 = layer.ln_attn.forward(x + attn_out, cache ? &cache->ln_attn : nullptr);

  Matrix ffn_in = layer.ffn_in.forward(y1);
  Matrix ffn_act = nn::gelu(ffn_in);
  Matrix ffn_out = layer.ffn_out.forward(ffn_act);
  Matrix ffn_mask = rng ? nn::dropout_mask(len, x.cols(), p, *rng) : Matrix();
  if (ffn_mask.size()) ffn_out = ffn_out.cwiseProduct(ffn_mask);
  Matrix y2 = layer.ln_ffn.forward(y1 + ffn_out, cache ? &cache->ln_ffn : nullptr);

  if (cache) {
    cache->input = x;
    cache->q = std::move(q);
    cache->k = std::move(k);
    cache->v = std::move(v);
    cache->probs = std::move(probs);
    cache->context = std::move(context);
    cache->attn_mask = std::move(attn_mask);
    cache->attn_out_norm = std::move(y1);
    cache->ffn_in = std::move(ffn_in);
    cache->ffn_act = std::move(ffn_act);
    cache->ffn_mask = std::move(ffn_mask);
  }
  return y2;
}

Matrix TransformerEncoder::layer_backward(Layer& layer, const LayerCache& c, const Matrix& dy) {
  const auto heads = static_cast<Eigen::Index>(config_.num_heads);
  const auto head_dim = static_cast<Eigen::Index>(config_.hidden_size) / heads;
  const double scale = 1.0 / std::sqrt(static_cast<double>(head_dim));

  const Matrix d_res2 = layer.ln_ffn.backward(c.ln_ffn, dy);
  Matrix d_ffn_out = c.ffn_mask.size() ? Matrix(d_res2.cwiseProduct(c.ffn_mask)) : d_res2;
  const Matrix d_act = layer.ffn_out.backward(c.ffn_act, d_ffn_out);
  const Matrix d_ffn_in = nn::gelu_backward(c.ffn_in, d_act);
  Matrix d_y1 = d_res2 + layer.ffn_in.backward(c.attn_out_norm, d_ffn_in);

  const Matrix d_res1 = layer.ln_attn.backward(c.ln_attn, d_y1);
  Matrix d_attn_out = c.attn_mask.size() ? Matrix(d_res1.cwiseProduct(c.attn_mask)) : d_res1;
  const Matrix d_context = layer.attn_out.backward(c.context, d_attn_out);

  Matrix dq(c.q.rows(), c.q.cols()), dk(c.k.rows(), c.k.cols()), dv(c.v.rows(), c.v.cols());
  for (Eigen::Index h = 0; h < heads; ++h) {
    const auto cols = Eigen::seqN(h * head_dim, head_dim);
    const Matrix& probs = c.probs[static_cast<std::size_t>(h)];
    const Matrix d_ctx_h = d_context(Eigen::all, cols);
    dv(Eigen::all, cols) = probs.transpose() * d_ctx_h;
    const Matrix d_probs = d_ctx_h * c.v(Eigen::all, cols).transpose();
    const Eigen::VectorXd row_dot = d_probs.cwiseProduct(probs).rowwise().sum();
    const Matrix d_scores = probs.cwiseProduct(d_probs.colwise() - row_dot);
    dq(Eigen::all, cols) = scale * d_scores * c.k(Eigen::all, cols);
    dk(Eigen::all, cols) = scale * d_scores.transpose() * c.q(Eigen::all, cols);
  }
  Matrix dx = d_res1;
  dx += layer.query.backward(c.input, dq);
  dx += layer.key.backward(c.input, dk);
  dx += layer.value.backward(c.input, dv);
  return dx;
}

Matrix TransformerEncoder::forward(const EncodedInput& input, Cache* cache,
                                   std::mt19937_64* dropout_rng) const {
  const auto len = static_cast<Eigen::Index>(input.size());
  if (input.size() > config_.max_positions)
    throw std::length_error("encoder input of length " + std::to_string(input.size()) +
                            " exceeds positional capacity " +
                            std::to_string(config_.max_positions));
  if (input.segment_ids.size() != input.token_ids.size())
    throw std::invalid_argument("encoder input: segment/token length mismatch");

  Matrix emb(len, static_cast<Eigen::Index>(config_.hidden_size));
  for (Eigen::Index t = 0; t < len; ++t) {
    const TokenId id = input.token_ids[static_cast<std::size_t>(t)];
    if (id < 0 || static_cast<std::size_t>(id) >= config_.vocab_size)
      throw std::out_of_range("token id outside encoder vocabulary");
    emb.row(t) = token_embedding_.value.row(id) + position_embedding_.value.row(t) +
                 segment_embedding_.value.row(
                     static_cast<int>(input.segment_ids[static_cast<std::size_t>(t)]));
  }
  Matrix x = ln_embedding_.forward(emb, cache ? &cache->ln_emb : nullptr);
  Matrix emb_mask = dropout_rng ? nn::dropout_mask(x.rows(), x.cols(), config_.dropout, *dropout_rng)
                                : Matrix();
  if (emb_mask.size()) x = x.cwiseProduct(emb_mask);

  if (cache) {
    cache->token_ids = input.token_ids;
    cache->segment_ids = input.segment_ids;
    cache->emb_mask = std::move(emb_mask);
    cache->layers.resize(layers_.size());
  }
  for (std::size_t l = 0; l < layers_.size(); ++l)
    x = layer_forward(layers_[l], x, cache ? &cache->layers[l] : nullptr, dropout_rng);
  return x;
}

void TransformerEncoder::backward(const Cache& cache, const Matrix& d_output) {
  Matrix d = d_output;
  for (std::size_t l = layers_.size(); l-- > 0;) d = layer_backward(layers_[l], cache.layers[l], d);
  if (cache.emb_mask.size()) d = d.cwiseProduct(cache.emb_mask);
  const Matrix d_emb = ln_embedding_.backward(cache.ln_emb, d);
  for (Eigen::Index t = 0; t < d_emb.rows(); ++t) {
    token_embedding_.grad.row(cache.token_ids[static_cast<std::size_t>(t)]) += d_emb.row(t);
    position_embedding_.grad.row(t) += d_emb.row(t);
    segment_embedding_.grad.row(static_cast<int>(cache.segment_ids[static_cast<std::size_t>(t)])) +=
        d_emb.row(t);
  }
}

Matrix TransformerEncoder::encode(const EncodedInput& input) const {
  const Matrix h = forward(input);
  Matrix out(static_cast<Eigen::Index>(input.cat_positions.size()), h.cols());
  for (std::size_t i = 0; i < input.cat_positions.size(); ++i)
    out.row(static_cast<Eigen::Index>(i)) = h.row(static_cast<Eigen::Index>(input.cat_positions[i]));
  return out;
}

nn::ParameterRefs TransformerEncoder::parameters() {
  nn::ParameterRefs out{&token_embedding_, &position_embedding_, &segment_embedding_};
  ln_embedding_.collect(out);
  for (auto& layer : layers_) {
    layer.query.collect(out);
    layer.key.collect(out);
    layer.value.collect(out);
    layer.attn_out.collect(out);
    layer.ln_attn.collect(out);
    layer.ffn_in.collect(out);
    layer.ffn_out.collect(out);
    layer.ln_ffn.collect(out);
  }
  return out;
}

nn::ConstParameterRefs TransformerEncoder::parameters() const {
  auto refs = const_cast<TransformerEncoder*>(this)->parameters();
  return {refs.begin(), refs.end()};
}

}  // namespace catrec
