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
#include <map>
#include <random>
#include <string>
#include <vector>

#include "catrec/encoder_input.hpp"
#include "catrec/nn.hpp"

namespace catrec {

/// Shape of a bidirectional transformer encoder. Defaults are the standard
/// base-size configuration.
struct EncoderConfig {
  std::size_t vocab_size = 0;
  std::size_t hidden_size = 768;
  std::size_t num_layers = 12;
  std::size_t num_heads = 12;
  std::size_t intermediate_size = 3072;
  std::size_t max_positions = 512;
  double dropout = 0.1;
  double init_std = 0.02;

  std::map<std::string, std::string> to_map() const;
  static EncoderConfig from_map(const std::map<std::string, std::string>& kv);
};

/// Post-norm transformer encoder (token + position + segment embeddings,
/// multi-head self-attention, GELU feed-forward) with hand-written
/// backpropagation. `forward` is const; a null cache and rng give the
/// inference path, which is safe to call concurrently.
class TransformerEncoder {
 public:
  struct LayerCache {
    nn::Matrix input, q, k, v, context, attn_mask, ffn_in, ffn_act, ffn_mask, attn_out_norm;
    std::vector<nn::Matrix> probs;
    nn::LayerNorm::Cache ln_attn, ln_ffn;
  };
  struct Cache {
    std::vector<TokenId> token_ids;
    std::vector<Segment> segment_ids;
    nn::Matrix emb_mask;
    nn::LayerNorm::Cache ln_emb;
    std::vector<LayerCache> layers;
  };

  TransformerEncoder() = default;
  TransformerEncoder(const EncoderConfig& config, std::mt19937_64& rng);

  const EncoderConfig& config() const { return config_; }
  std::size_t hidden_size() const { return config_.hidden_size; }

  /// Hidden states for every position, shape (len, hidden).
  nn::Matrix forward(const EncodedInput& input, Cache* cache = nullptr,
                     std::mt19937_64* dropout_rng = nullptr) const;

  /// Backpropagates d(loss)/d(output) and accumulates parameter gradients.
  void backward(const Cache& cache, const nn::Matrix& d_output);

  /// Hidden states at `input.cat_positions`, one row per category.
  nn::Matrix encode(const EncodedInput& input) const;

  /// Grows the token embedding table; new rows are freshly initialized.
  void resize_vocab(std::size_t vocab_size, std::mt19937_64& rng);

  nn::ParameterRefs parameters();
  nn::ConstParameterRefs parameters() const;

 private:
  struct Layer {
    nn::Linear query, key, value, attn_out;
    nn::LayerNorm ln_attn;
    nn::Linear ffn_in, ffn_out;
    nn::LayerNorm ln_ffn;
  };

  nn::Matrix layer_forward(const Layer& layer, const nn::Matrix& x, LayerCache* cache,
                           std::mt19937_64* rng) const;
  nn::Matrix layer_backward(Layer& layer, const LayerCache& cache, const nn::Matrix& dy);

  EncoderConfig config_;
  nn::Parameter token_embedding_;
  nn::Parameter position_embedding_;
  nn::Parameter segment_embedding_;
  nn::LayerNorm ln_embedding_;
  std::vector<Layer> layers_;
};

}  // namespace catrec
