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

#include "catrec/training.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <ostream>
#include <set>
#include <sstream>

namespace catrec {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::vector<nn::Matrix> snapshot(const nn::ConstParameterRefs& params) {
  std::vector<nn::Matrix> out;
  out.reserve(params.size());
  for (const auto* p : params) out.push_back(p->value);
  return out;
}

void restore(const nn::ParameterRefs& params, const std::vector<nn::Matrix>& values) {
  for (std::size_t i = 0; i < params.size(); ++i) params[i]->value = values[i];
}

nn::ConstParameterRefs as_const(const nn::ParameterRefs& params) {
  return {params.begin(), params.end()};
}

void check_finite(double loss, const std::string& stage, std::size_t epoch, std::size_t step) {
  if (!std::isfinite(loss)) {
    std::ostringstream msg;
    msg << stage << ": non-finite loss (" << loss << ") at epoch " << epoch << ", step " << step
        << "; lower the learning rate or inspect the inputs";
    throw TrainingError(msg.str());
  }
}

std::vector<std::vector<std::size_t>> batches(std::size_t n, std::size_t batch_size,
                                              std::mt19937_64& rng) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<std::vector<std::size_t>> out;
  for (std::size_t start = 0; start < n; start += batch_size)
    out.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(start),
                     order.begin() + static_cast<std::ptrdiff_t>(std::min(n, start + batch_size)));
  return out;
}

void log_epoch(std::ostream* log, const std::string& stage, const EpochRecord& r, bool best) {
  if (!log) return;
  *log << "[" << stage << "] epoch " << r.epoch << " train_loss=" << r.train_loss
       << " validation_loss=" << r.validation_loss << (best ? " *" : "") << '\n';
}

bool all_unknown(const std::vector<double>& v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return x == kUnknownCategoryValue; });
}

/// Shared epoch loop: runs `train_epoch` and `validate`, keeps the best
/// parameters and stops after `patience` epochs without improvement.
template <typename TrainEpoch, typename Validate>
TrainingReport fit(const std::string& stage, const nn::ParameterRefs& params,
                   const TrainingConfig& config, std::ostream* log, TrainEpoch&& train_epoch,
                   Validate&& validate) {
  const auto start = Clock::now();
  TrainingReport report;
  report.stage = stage;
  EarlyStopping stopping(config.patience);
  std::vector<nn::Matrix> best = snapshot(as_const(params));
  report.stop_reason = "max_epochs";
  for (std::size_t epoch = 1; epoch <= config.max_epochs; ++epoch) {
    EpochRecord record;
    record.epoch = epoch;
    record.train_loss = train_epoch(epoch);
    record.validation_loss = validate();
    check_finite(record.validation_loss, stage + " validation", epoch, 0);
    const bool improved = stopping.update(epoch, record.validation_loss);
    if (improved) best = snapshot(as_const(params));
    report.epochs.push_back(record);
    log_epoch(log, stage, record, improved);
    if (stopping.stop()) {
      report.stop_reason = "early_stopping";
      break;
    }
  }
  restore(params, best);
  report.best_epoch = stopping.best_epoch();
  report.best_validation_loss = stopping.best_loss();
  report.wall_seconds = seconds_since(start);
  return report;
}

}  // namespace

// ---------------------------------------------------------------------------
// Config

TrainingConfig TrainingConfig::from_flat(const FlatConfig& cfg) {
  static const std::set<std::string> known = {
      "mode", "learning_rate", "batch_size", "scorer_learning_rate", "scorer_batch_size",
      "max_epochs", "patience", "seed", "max_len", "encoder.checkpoint", "encoder.hidden_size",
      "encoder.num_layers", "encoder.num_heads", "encoder.intermediate_size",
      "encoder.max_positions", "encoder.dropout", "encoder.init_std", "head_init_std",
      "tokenizer.min_count", "tokenizer.max_words", "exclude_unknown_targets", "data.dir",
      "run.root"};
  for (const auto& [key, value] : cfg.values())
    if (!known.count(key)) throw std::runtime_error("unknown config key '" + key + "'");

  TrainingConfig c;
  auto size = [&](const char* key, std::size_t fallback) {
    const long long v = cfg.get_int(key, static_cast<long long>(fallback));
    if (v < 0) throw std::runtime_error(std::string("config key '") + key + "' must be >= 0");
    return static_cast<std::size_t>(v);
  };
  c.mode = parse_mode(cfg.get_string("mode", "two_stage"));
  c.learning_rate = cfg.get_double("learning_rate", c.learning_rate);
  c.batch_size = size("batch_size", c.batch_size);
  c.scorer_learning_rate = cfg.get_double("scorer_learning_rate", c.scorer_learning_rate);
  c.scorer_batch_size = size("scorer_batch_size", c.scorer_batch_size);
  c.max_epochs = size("max_epochs", c.max_epochs);
  c.patience = size("patience", c.patience);
  c.seed = static_cast<std::uint64_t>(cfg.get_int("seed", static_cast<long long>(c.seed)));
  c.max_len = size("max_len", c.max_len);
  c.encoder_checkpoint = cfg.get_string("encoder.checkpoint", "");
  c.encoder.hidden_size = size("encoder.hidden_size", c.encoder.hidden_size);
  c.encoder.num_layers = size("encoder.num_layers", c.encoder.num_layers);
  c.encoder.num_heads = size("encoder.num_heads", c.encoder.num_heads);
  c.encoder.intermediate_size = size("encoder.intermediate_size", c.encoder.intermediate_size);
  c.encoder.max_positions = size("encoder.max_positions", c.encoder.max_positions);
  c.encoder.dropout = cfg.get_double("encoder.dropout", c.encoder.dropout);
  c.encoder.init_std = cfg.get_double("encoder.init_std", c.encoder.init_std);
  c.head_init_std = cfg.get_double("head_init_std", c.head_init_std);
  c.tokenizer_min_count = size("tokenizer.min_count", c.tokenizer_min_count);
  c.tokenizer_max_words = size("tokenizer.max_words", c.tokenizer_max_words);
  c.exclude_unknown_targets = cfg.get_bool("exclude_unknown_targets", c.exclude_unknown_targets);
  c.data_dir = cfg.get_string("data.dir", "");
  c.run_root = cfg.get_string("run.root", c.run_root);
  c.validate();
  return c;
}

void TrainingConfig::validate() const {
  if (patience < 1) throw std::runtime_error("patience must be >= 1");
  if (batch_size < 1 || scorer_batch_size < 1) throw std::runtime_error("batch sizes must be >= 1");
  if (max_epochs < 1) throw std::runtime_error("max_epochs must be >= 1");
  if (!(learning_rate > 0) || !(scorer_learning_rate > 0))
    throw std::runtime_error("learning rates must be positive");
  if (encoder.dropout < 0 || encoder.dropout >= 1) throw std::runtime_error("dropout must be in [0, 1)");
}

std::string TrainingReport::to_string() const {
  std::ostringstream out;
  out << "stage = " << stage << "\nbest_epoch = " << best_epoch
      << "\nbest_validation_loss = " << best_validation_loss << "\nstop_reason = " << stop_reason
      << "\nwall_seconds = " << wall_seconds << "\n";
  for (const auto& [k, v] : metrics) out << "metric." << k << " = " << v << "\n";
  for (const auto& e : epochs)
    out << "epoch." << e.epoch << " = " << e.train_loss << " " << e.validation_loss << "\n";
  return out.str();
}

EarlyStopping::EarlyStopping(std::size_t patience) : patience_(patience) {
  if (patience_ < 1) throw std::invalid_argument("patience must be >= 1");
}

bool EarlyStopping::update(std::size_t epoch, double validation_loss) {
  if (!any_ || validation_loss < best_loss_) {
    any_ = true;
    best_loss_ = validation_loss;
    best_epoch_ = epoch;
    since_best_ = 0;
    return true;
  }
  ++since_best_;
  return false;
}

// ---------------------------------------------------------------------------

PreferenceModel make_preference_model(const TrainingConfig& config,
                                      const CategoryVocabulary& categories,
                                      const std::vector<Sample>& train, std::mt19937_64& rng) {
  if (!config.encoder_checkpoint.empty()) {
    const PreferenceModel base = load_preference_model(config.encoder_checkpoint);
    WordPieceTokenizer tokenizer = base.tokenizer();
    SpecialTokens::install(tokenizer.mutable_vocab(), categories);
    TransformerEncoder encoder = base.encoder();
    encoder.resize_vocab(tokenizer.vocab().size(), rng);
    CategoryHeads heads(categories.size(), encoder.hidden_size());
    heads.init(config.head_init_std, rng);
    return PreferenceModel(categories, std::move(tokenizer), std::move(encoder), std::move(heads),
                           std::min(config.max_len, encoder.config().max_positions));
  }
  std::vector<std::string> texts;
  std::set<std::pair<std::string, std::size_t>> seen;
  for (const auto& s : train) {
    // Histories overlap heavily within a conversation; count each utterance once.
    for (std::size_t i = 0; i < s.history.size(); ++i)
      if (seen.emplace(s.conv_id, i).second) {
        std::string text = s.history[i].text;
        for (std::size_t p = 0; (p = text.find('@', p)) != std::string::npos; ++p)
          while (p + 1 < text.size() && std::isdigit(static_cast<unsigned char>(text[p + 1])))
            text.erase(p + 1, 1);
        texts.push_back(std::move(text));
      }
  }
  auto tokenizer =
      WordPieceTokenizer::train(texts, config.tokenizer_min_count, config.tokenizer_max_words);
  return PreferenceModel(categories, std::move(tokenizer), config.encoder, config.max_len, rng,
                         config.head_init_std);
}

TrainingResult train_stage1(const Catalog& catalog, const std::vector<Sample>& train,
                            const std::vector<Sample>& validation, const TrainingConfig& config,
                            std::ostream* log) {
  config.validate();
  std::mt19937_64 init_rng(config.seed);
  std::mt19937_64 shuffle_rng(config.seed + 1);
  std::mt19937_64 dropout_rng(config.seed + 2);

  PreferenceModel model = make_preference_model(config, catalog.vocabulary(), train, init_rng);

  auto usable = [&](const Sample& s) {
    return !(config.exclude_unknown_targets && all_unknown(s.target_category_vector));
  };
  struct Example {
    EncodedInput input;
    const std::vector<double>* target;
  };
  auto prepare = [&](const std::vector<Sample>& samples) {
    std::vector<Example> out;
    for (const auto& s : samples)
      if (usable(s)) out.push_back({model.form(s.history), &s.target_category_vector});
    return out;
  };
  const auto train_set = prepare(train);
  const auto val_set = prepare(validation);
  if (train_set.empty() || val_set.empty())
    throw std::runtime_error("stage1: empty training or validation set");

  auto params = model.parameters();
  nn::Adam adam(params, {.learning_rate = config.learning_rate});

  auto train_epoch = [&](std::size_t epoch) {
    double total = 0.0;
    std::size_t step = 0;
    for (const auto& batch : batches(train_set.size(), config.batch_size, shuffle_rng)) {
      nn::zero_grads(params);
      const double scale = 1.0 / static_cast<double>(batch.size());
      for (std::size_t idx : batch) {
        PreferenceModel::Trace trace;
        const auto& ex = train_set[idx];
        const auto pref = model.forward(ex.input, trace, dropout_rng);
        const double loss = rmse_loss(pref, *ex.target);
        check_finite(loss, "stage1", epoch, step);
        total += loss;
        model.backward(trace, scale * rmse_loss_grad(pref, *ex.target));
      }
      adam.step();
      ++step;
    }
    return total / static_cast<double>(train_set.size());
  };
  auto validate = [&] {
    double total = 0.0;
    for (const auto& ex : val_set) total += rmse_loss(model.predict(ex.input), *ex.target);
    return total / static_cast<double>(val_set.size());
  };

  TrainingReport report = fit("stage1", params, config, log, train_epoch, validate);
  report.metrics["validation_rmse"] = report.best_validation_loss;

  TrainingResult result;
  result.bundle.mode = config.mode;
  result.bundle.categories = catalog.vocabulary();
  result.bundle.catalog_fingerprint = catalog.fingerprint();
  result.bundle.data_dir = config.data_dir;
  result.bundle.preference = std::move(model);
  result.report = std::move(report);
  return result;
}

TrainingResult train_stage2(const ModelBundle& source, const Catalog& catalog,
                            const std::vector<Sample>& train,
                            const std::vector<Sample>& validation, const TrainingConfig& config,
                            std::ostream* log) {
  config.validate();
  const bool oracle = config.mode == TrainingMode::kOracle;
  if (!oracle) {
    if (!source.preference) throw std::runtime_error("stage2: source bundle has no Stage-1 model");
    source.check_catalog(catalog);
  }

  // Inputs are computed once: Stage 1 is frozen, so they never change.
  auto inputs = [&](const std::vector<Sample>& samples) {
    std::vector<nn::Vector> out;
    out.reserve(samples.size());
    for (const auto& s : samples) {
      if (s.target_item >= catalog.size()) throw DataError("stage2: target outside catalog");
      if (oracle)
        out.push_back(Eigen::Map<const nn::Vector>(s.target_category_vector.data(),
                                                   static_cast<Eigen::Index>(s.target_category_vector.size())));
      else
        out.push_back(source.preference->predict(s.history).values);
    }
    return out;
  };
  const auto train_x = inputs(train);
  const auto val_x = inputs(validation);
  if (train_x.empty() || val_x.empty())
    throw std::runtime_error("stage2: empty training or validation set");

  std::mt19937_64 shuffle_rng(config.seed + 1);
  ItemScorer scorer(catalog.size(), catalog.num_categories());
  auto params = scorer.parameters();
  nn::Adam adam(params, {.learning_rate = config.scorer_learning_rate});
  const std::string stage = oracle ? "oracle" : "stage2";

  auto train_epoch = [&](std::size_t epoch) {
    double total = 0.0;
    std::size_t step = 0;
    for (const auto& batch : batches(train_x.size(), config.scorer_batch_size, shuffle_rng)) {
      nn::zero_grads(params);
      const double scale = 1.0 / static_cast<double>(batch.size());
      for (std::size_t idx : batch) {
        const nn::Vector logits = scorer.logits(train_x[idx]);
        const double loss = cross_entropy_from_logits(logits, train[idx].target_item);
        check_finite(loss, stage, epoch, step);
        total += loss;
        scorer.backward(train_x[idx], scale * cross_entropy_grad(logits, train[idx].target_item));
      }
      adam.step();
      ++step;
    }
    return total / static_cast<double>(train_x.size());
  };
  auto validate = [&] {
    double total = 0.0;
    for (std::size_t i = 0; i < val_x.size(); ++i)
      total += cross_entropy_from_logits(scorer.logits(val_x[i]), validation[i].target_item);
    return total / static_cast<double>(val_x.size());
  };

  TrainingReport report = fit(stage, params, config, log, train_epoch, validate);
  report.metrics["validation_cross_entropy"] = report.best_validation_loss;

  TrainingResult result;
  result.bundle.mode = config.mode;
  result.bundle.categories = catalog.vocabulary();
  result.bundle.catalog_fingerprint = catalog.fingerprint();
  result.bundle.data_dir = config.data_dir;
  if (!oracle) result.bundle.preference = source.preference;
  result.bundle.scorer = std::move(scorer);
  result.report = std::move(report);
  return result;
}

TrainingResult train_e2e(const Catalog& catalog, const std::vector<Sample>& train,
                         const std::vector<Sample>& validation, const TrainingConfig& config,
                         std::ostream* log) {
  config.validate();
  std::mt19937_64 init_rng(config.seed);
  std::mt19937_64 shuffle_rng(config.seed + 1);
  std::mt19937_64 dropout_rng(config.seed + 2);

  PreferenceModel model = make_preference_model(config, catalog.vocabulary(), train, init_rng);
  ItemScorer scorer(catalog.size(), catalog.num_categories());

  struct Example {
    EncodedInput input;
    ItemIndex target;
  };
  auto prepare = [&](const std::vector<Sample>& samples) {
    std::vector<Example> out;
    for (const auto& s : samples) {
      if (s.target_item >= catalog.size()) throw DataError("e2e: target outside catalog");
      out.push_back({model.form(s.history), s.target_item});
    }
    return out;
  };
  const auto train_set = prepare(train);
  const auto val_set = prepare(validation);
  if (train_set.empty() || val_set.empty())
    throw std::runtime_error("e2e: empty training or validation set");

  auto model_params = model.parameters();
  auto scorer_params = scorer.parameters();
  nn::ParameterRefs all = model_params;
  all.insert(all.end(), scorer_params.begin(), scorer_params.end());
  nn::Adam model_adam(model_params, {.learning_rate = config.learning_rate});
  nn::Adam scorer_adam(scorer_params, {.learning_rate = config.scorer_learning_rate});

  auto train_epoch = [&](std::size_t epoch) {
    double total = 0.0;
    std::size_t step = 0;
    for (const auto& batch : batches(train_set.size(), config.batch_size, shuffle_rng)) {
      nn::zero_grads(all);
      const double scale = 1.0 / static_cast<double>(batch.size());
      for (std::size_t idx : batch) {
        PreferenceModel::Trace trace;
        const auto& ex = train_set[idx];
        const auto pref = model.forward(ex.input, trace, dropout_rng);
        const nn::Vector logits = scorer.logits(pref.values);
        const double loss = cross_entropy_from_logits(logits, ex.target);
        check_finite(loss, "e2e", epoch, step);
        total += loss;
        const nn::Vector d_pref =
            scorer.backward(pref.values, scale * cross_entropy_grad(logits, ex.target));
        model.backward(trace, d_pref);
      }
      model_adam.step();
      scorer_adam.step();
      ++step;
    }
    return total / static_cast<double>(train_set.size());
  };
  auto validate = [&] {
    double total = 0.0;
    for (const auto& ex : val_set)
      total += cross_entropy_from_logits(scorer.logits(model.predict(ex.input).values), ex.target);
    return total / static_cast<double>(val_set.size());
  };

  TrainingReport report = fit("e2e", all, config, log, train_epoch, validate);
  report.metrics["validation_cross_entropy"] = report.best_validation_loss;

  TrainingResult result;
  result.bundle.mode = TrainingMode::kE2E;
  result.bundle.categories = catalog.vocabulary();
  result.bundle.catalog_fingerprint = catalog.fingerprint();
  result.bundle.data_dir = config.data_dir;
  result.bundle.preference = std::move(model);
  result.bundle.scorer = std::move(scorer);
  result.report = std::move(report);
  return result;
}

PipelineResult run_pipeline(const Catalog& catalog, const std::vector<Sample>& train,
                            const std::vector<Sample>& validation, const TrainingConfig& config,
                            std::ostream* log) {
  PipelineResult out;
  switch (config.mode) {
    case TrainingMode::kTwoStage: {
      auto stage1 = train_stage1(catalog, train, validation, config, log);
      auto stage2 = train_stage2(stage1.bundle, catalog, train, validation, config, log);
      out.reports = {std::move(stage1.report), std::move(stage2.report)};
      out.bundle = std::move(stage2.bundle);
      break;
    }
    case TrainingMode::kE2E: {
      auto r = train_e2e(catalog, train, validation, config, log);
      out.reports = {std::move(r.report)};
      out.bundle = std::move(r.bundle);
      break;
    }
    case TrainingMode::kOracle: {
      auto r = train_stage2(ModelBundle{}, catalog, train, validation, config, log);
      out.reports = {std::move(r.report)};
      out.bundle = std::move(r.bundle);
      break;
    }
  }
  return out;
}

}  // namespace catrec
