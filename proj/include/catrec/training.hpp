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
#include <iosfwd>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "catrec/catalog.hpp"
#include "catrec/checkpoint.hpp"
#include "catrec/config.hpp"
#include "catrec/corpus.hpp"
#include "catrec/encoder.hpp"

namespace catrec {

/// Raised when a loss turns non-finite.
class TrainingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct TrainingConfig {
  TrainingMode mode = TrainingMode::kTwoStage;
  /// Encoder fine-tuning stages (Stage 1, E2E).
  double learning_rate = 2e-5;
  std::size_t batch_size = 16;
  /// Scorer-only stage (Stage 2, oracle) and the scorer inside E2E.
  double scorer_learning_rate = 1e-3;
  std::size_t scorer_batch_size = 256;
  std::size_t max_epochs = 50;
  std::size_t patience = 5;
  std::uint64_t seed = 42;
  std::size_t max_len = kDefaultMaxLen;
  /// Preference-model directory to initialize the encoder from; empty means
  /// a freshly initialized encoder with a vocabulary built from training text.
  std::string encoder_checkpoint;
  EncoderConfig encoder;
  double head_init_std = 0.02;
  std::size_t tokenizer_min_count = 2;
  std::size_t tokenizer_max_words = 30000;
  /// Drop Stage-1 samples whose target vector is all 0.5.
  bool exclude_unknown_targets = false;

  std::string data_dir;
  std::string run_root = "runs";

  /// Reads every key above from a flat config; unknown keys are rejected.
  static TrainingConfig from_flat(const FlatConfig& cfg);
  void validate() const;
};

struct EpochRecord {
  std::size_t epoch = 0;
  double train_loss = 0.0;
  double validation_loss = 0.0;
};

struct TrainingReport {
  std::string stage;
  std::vector<EpochRecord> epochs;
  std::size_t best_epoch = 0;
  double best_validation_loss = 0.0;
  std::string stop_reason;
  double wall_seconds = 0.0;
  std::map<std::string, double> metrics;

  std::string to_string() const;
};

/// Tracks the best validation loss; stop() turns true once `patience`
/// epochs pass without improvement.
class EarlyStopping {
 public:
  explicit EarlyStopping(std::size_t patience);
  /// Returns true when this epoch is the new best.
  bool update(std::size_t epoch, double validation_loss);
  bool stop() const { return since_best_ >= patience_; }
  std::size_t best_epoch() const { return best_epoch_; }
  double best_loss() const { return best_loss_; }

 private:
  std::size_t patience_;
  std::size_t best_epoch_ = 0;
  double best_loss_ = 0.0;
  std::size_t since_best_ = 0;
  bool any_ = false;
};

struct TrainingResult {
  ModelBundle bundle;
  TrainingReport report;
};

/// New preference model: either loaded from `config.encoder_checkpoint`
/// (special tokens installed, heads re-initialized) or fresh with a
/// tokenizer trained on the history text of `train`.
PreferenceModel make_preference_model(const TrainingConfig& config,
                                      const CategoryVocabulary& categories,
                                      const std::vector<Sample>& train, std::mt19937_64& rng);

/// Fine-tunes encoder + heads on batch RMSE against target category vectors.
TrainingResult train_stage1(const Catalog& catalog, const std::vector<Sample>& train,
                            const std::vector<Sample>& validation, const TrainingConfig& config,
                            std::ostream* log = nullptr);

/// Trains only the item scorer on cross-entropy. Inputs are `source`'s
/// frozen preference predictions, or the target category vectors when
/// config.mode is oracle (then `source.preference` may be empty).
TrainingResult train_stage2(const ModelBundle& source, const Catalog& catalog,
                            const std::vector<Sample>& train,
                            const std::vector<Sample>& validation, const TrainingConfig& config,
                            std::ostream* log = nullptr);

/// Same architecture, trained end to end on item cross-entropy only.
TrainingResult train_e2e(const Catalog& catalog, const std::vector<Sample>& train,
                         const std::vector<Sample>& validation, const TrainingConfig& config,
                         std::ostream* log = nullptr);

/// Runs the full protocol for config.mode: two_stage = Stage 1 then Stage 2;
/// e2e; oracle = Stage 2 on ground-truth vectors. Reports are returned in
/// order.
struct PipelineResult {
  ModelBundle bundle;
  std::vector<TrainingReport> reports;
};
PipelineResult run_pipeline(const Catalog& catalog, const std::vector<Sample>& train,
                            const std::vector<Sample>& validation, const TrainingConfig& config,
                            std::ostream* log = nullptr);

}  // namespace catrec
