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

// Acceptance suite. Prints one PASS/FAIL/SKIP line per criterion.
//
//   acceptance                 run every criterion; exit 1 if any fails
//   acceptance --criterion N   run one; exit 0 pass, 1 fail, 77 skip
//
// Criteria 6, 8 and 10 need the raw corpus: set CATREC_DATA_DIR to a
// directory holding train_data.jsonl, test_data.jsonl and movies.csv.
// Criterion 9 additionally needs CATREC_FULL_SCALE=1 and, optionally,
// CATREC_TRAIN_CONFIG pointing at a training config for the encoder runs.

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <numeric>
#include <optional>
#include <random>
#include <sstream>
#include <string>

#include "catrec/config.hpp"
#include "catrec/dataset.hpp"
#include "catrec/encoder_input.hpp"
#include "catrec/evaluation.hpp"
#include "catrec/preference_model.hpp"
#include "catrec/recommender_head.hpp"
#include "catrec/synthetic.hpp"
#include "catrec/training.hpp"

namespace fs = std::filesystem;
using namespace catrec;

namespace {

enum class Status { kPass, kFail, kSkip };

struct Outcome {
  Status status;
  std::string detail;
};

Outcome pass(std::string d) { return {Status::kPass, std::move(d)}; }
Outcome fail(std::string d) { return {Status::kFail, std::move(d)}; }
Outcome skip(std::string d) { return {Status::kSkip, std::move(d)}; }

Outcome verdict(bool ok, std::string detail) { return ok ? pass(std::move(detail)) : fail(std::move(detail)); }

std::string fmt(double v, int precision = 4) {
  std::ostringstream out;
  out.precision(precision);
  out << v;
  return out.str();
}

double seconds_since(std::chrono::steady_clock::time_point t) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t).count();
}

nn::Vector random_vector(Eigen::Index n, std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> normal(0.0, scale);
  nn::Vector v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = normal(rng);
  return v;
}

template <typename LossFn>
double max_rel_error(nn::Parameter& p, const nn::Matrix& grad, LossFn loss) {
  const double h = 1e-5;
  double worst = 0.0;
  for (Eigen::Index i = 0; i < p.value.size(); ++i) {
    const double orig = p.value.data()[i];
    p.value.data()[i] = orig + h;
    const double up = loss();
    p.value.data()[i] = orig - h;
    const double down = loss();
    p.value.data()[i] = orig;
    const double numeric = (up - down) / (2 * h);
    const double denom = std::max({std::abs(numeric), std::abs(grad.data()[i]), 1e-6});
    worst = std::max(worst, std::abs(numeric - grad.data()[i]) / denom);
  }
  return worst;
}

// ---------------------------------------------------------------------------

Outcome gradients() {
  const auto start = std::chrono::steady_clock::now();
  std::mt19937_64 rng(101);
  const int instances = 25;
  double worst = 0.0;
  for (int t = 0; t < instances; ++t) {
    // Category heads under RMSE.
    CategoryHeads heads(3, 8);
    heads.init(1.0, rng);
    const nn::Matrix h = Eigen::Map<nn::Matrix>(random_vector(24, rng).data(), 3, 8);
    std::vector<double> target(3);
    for (auto& v : target) v = std::uniform_real_distribution<double>(0, 1)(rng);
    auto rmse = [&] { return rmse_loss(predict_preferences(h, heads), target); };
    const auto pref = predict_preferences(h, heads);
    nn::zero_grads(heads.parameters());
    heads.backward(h, pref, rmse_loss_grad(pref, target));
    const nn::Matrix gw = heads.weight.grad, gb = heads.bias.grad;
    worst = std::max({worst, max_rel_error(heads.weight, gw, rmse), max_rel_error(heads.bias, gb, rmse)});

    // Item scorer under cross-entropy of the softmax.
    ItemScorer scorer(5, 3);
    nn::init_normal(scorer.weight, 1.0, rng);
    nn::init_normal(scorer.bias, 1.0, rng);
    const nn::Vector p = pref.values;
    const auto item = std::uniform_int_distribution<ItemIndex>(0, 4)(rng);
    auto ce = [&] { return cross_entropy_loss(score_items(p, scorer), item); };
    nn::zero_grads(scorer.parameters());
    scorer.backward(p, cross_entropy_grad(scorer.logits(p), item));
    const nn::Matrix sw = scorer.weight.grad, sb = scorer.bias.grad;
    worst = std::max({worst, max_rel_error(scorer.weight, sw, ce), max_rel_error(scorer.bias, sb, ce)});
  }
  const double secs = seconds_since(start);
  return verdict(worst <= 1e-4 && secs < 60,
                 std::to_string(instances) + " instances, max relative error " + fmt(worst, 3) +
                     ", " + fmt(secs, 3) + " s");
}

Outcome softmax_properties() {
  std::mt19937_64 rng(202);
  double worst_norm = 0.0, worst_shift = 0.0;
  for (int t = 0; t < 1000; ++t) {
    const auto n = std::uniform_int_distribution<Eigen::Index>(1, 200)(rng);
    const nn::Vector z = random_vector(n, rng, 20.0);
    const nn::Vector p = softmax(z);
    const double c = std::uniform_real_distribution<double>(-500, 500)(rng);
    worst_norm = std::max(worst_norm, std::abs(p.sum() - 1.0));
    worst_shift = std::max(worst_shift, (softmax((z.array() + c).matrix()) - p).cwiseAbs().maxCoeff());
  }
  return verdict(worst_norm <= 1e-6 && worst_shift <= 1e-9,
                 "1000 inputs, max |sum-1| " + fmt(worst_norm, 3) + ", max shift deviation " +
                     fmt(worst_shift, 3));
}

Outcome input_layout() {
  auto tokenizer = WordPieceTokenizer::train({"looking for comedies", "i loved it"}, 1, 100);
  const auto categories = CategoryVocabulary::movielens();
  const auto specials = SpecialTokens::install(tokenizer.mutable_vocab(), categories);
  const auto id = [&](const char* t) { return *tokenizer.vocab().find(t); };

  const auto in = form_input({{Sender::kSeeker, "Looking for comedies", {}}}, tokenizer, specials);
  std::vector<TokenId> tokens = specials.categories;
  for (TokenId t : {specials.sou, id("looking"), id("for"), id("comedies"), specials.eou}) tokens.push_back(t);
  std::vector<Segment> segments(19, Segment::kSystem);
  for (Segment s : {Segment::kSystem, Segment::kUser, Segment::kUser, Segment::kUser, Segment::kSystem})
    segments.push_back(s);
  const bool golden = in.token_ids == tokens && in.segment_ids == segments;

  const auto a = form_input({{Sender::kSeeker, "i loved @111776", {111776}}}, tokenizer, specials);
  const auto b = form_input({{Sender::kSeeker, "i loved @204974", {204974}}}, tokenizer, specials);
  const bool masked = a == b && std::count(a.token_ids.begin(), a.token_ids.end(), specials.im) == 1;
  return verdict(golden && masked, std::string("golden layout ") + (golden ? "exact" : "MISMATCH") +
                                       ", IM invariance " + (masked ? "holds" : "BROKEN"));
}

Dataset synthetic(std::size_t conversations, std::uint64_t seed, const std::string& tag) {
  const auto dir = fs::temp_directory_path() /
                   ("catrec_acceptance_" + tag + "_" + std::to_string(std::random_device{}()));
  const auto paths = write_synthetic_corpus(
      dir, generate_synthetic_corpus({.conversations = conversations, .seed = seed}));
  Dataset ds = ingest(paths, {.seed = seed});
  fs::remove_all(dir);
  return ds;
}

// Same settings as configs/toy.cfg.
TrainingConfig small_config(TrainingMode mode) {
  TrainingConfig c;
  c.mode = mode;
  c.learning_rate = 1e-3;
  c.batch_size = 8;
  c.scorer_learning_rate = 5e-2;
  c.scorer_batch_size = 16;
  c.max_epochs = 30;
  c.patience = 5;
  c.seed = 1;
  c.max_len = 64;
  c.encoder.hidden_size = 64;
  c.encoder.num_layers = 2;
  c.encoder.num_heads = 4;
  c.encoder.intermediate_size = 128;
  c.encoder.max_positions = 64;
  c.encoder.dropout = 0.0;
  c.tokenizer_min_count = 1;
  return c;
}

Outcome freeze_contract() {
  const Dataset ds = synthetic(100, 11, "freeze");
  auto cfg = small_config(TrainingMode::kTwoStage);
  cfg.max_epochs = 3;
  const auto stage1 = train_stage1(ds.catalog, ds.train, ds.validation, cfg);
  const auto before = nn::checksum(stage1.bundle.preference->parameters());
  const auto stage2 = train_stage2(stage1.bundle, ds.catalog, ds.train, ds.validation, cfg);
  const auto after = nn::checksum(stage2.bundle.preference->parameters());
  std::ostringstream detail;
  detail << ds.train.size() + ds.validation.size() + ds.test.size() << " samples, checksum " << std::hex
         << before << (before == after ? " == " : " != ") << after;
  return verdict(before == after && stage2.report.epochs.size() > 0, detail.str());
}

Outcome recall_oracle() {
  const std::size_t items = 50;
  std::vector<std::pair<RedialId, std::string>> movies;
  for (std::size_t i = 0; i < items; ++i)
    movies.emplace_back(static_cast<RedialId>(i + 1), "M" + std::to_string(i) + " (2000)");
  const Catalog catalog = build_catalog(movies, MovieLensIndex{}, CategoryVocabulary::movielens());

  std::mt19937_64 rng(505);
  std::vector<Sample> samples(200);
  std::vector<nn::Vector> scores;
  std::size_t hits1 = 0, hits10 = 0;
  bool ordered = true;
  for (auto& s : samples) {
    s.target_item = std::uniform_int_distribution<ItemIndex>(0, items - 1)(rng);
    nn::Vector v(static_cast<Eigen::Index>(items));
    for (Eigen::Index j = 0; j < v.size(); ++j) v(j) = std::uniform_int_distribution<int>(0, 30)(rng);
    const auto t = static_cast<Eigen::Index>(s.target_item);
    std::size_t rank = 0;
    for (Eigen::Index j = 0; j < v.size(); ++j)
      if (v(j) > v(t) || (v(j) == v(t) && j < t)) ++rank;
    hits1 += rank < 1;
    hits10 += rank < 10;
    const auto ranked = rank_items(v, 10);
    ordered = ordered && recall_at_n(ranked, s.target_item, 1) <= recall_at_n(ranked, s.target_item, 10);
    scores.push_back(v);
  }
  std::size_t next = 0;
  const auto report =
      evaluate_scores(samples, catalog, [&](const Sample&) { return scores[next++]; }, "planted");
  const double want1 = 100.0 * static_cast<double>(hits1) / 200.0;
  const double want10 = 100.0 * static_cast<double>(hits10) / 200.0;
  return verdict(report.rec_at_1_pct == want1 && report.rec_at_10_pct == want10 && ordered &&
                     report.rec_at_1_pct <= report.rec_at_10_pct,
                 "200 planted targets, Rec@1 " + fmt(report.rec_at_1_pct) + " (scan " + fmt(want1) +
                     "), Rec@10 " + fmt(report.rec_at_10_pct) + " (scan " + fmt(want10) + ")");
}

Outcome toy_learnability() {
  const auto start = std::chrono::steady_clock::now();
  const Dataset ds = synthetic(200, 7, "learnability");
  const auto cfg = small_config(TrainingMode::kTwoStage);
  const auto trained = run_pipeline(ds.catalog, ds.train, ds.validation, cfg);
  const auto report = evaluate(trained.bundle, ds.test, ds.catalog);
  std::size_t epochs = 0;
  for (const auto& r : trained.reports) epochs = std::max(epochs, r.epochs.size());
  const double secs = seconds_since(start);
  return verdict(report.rec_at_1_pct >= 90.0 && epochs <= 30 && secs < 300,
                 std::to_string(ds.train.size() + ds.validation.size() + ds.test.size()) +
                     " samples, test Rec@1 " + fmt(report.rec_at_1_pct) + "% on " +
                     std::to_string(report.sample_count) + " samples, " + std::to_string(epochs) +
                     " epochs, " + fmt(secs, 3) + " s");
}

// ---------------------------------------------------------------------------
// Criteria on the real corpus.

std::optional<fs::path> data_dir() {
  const char* dir = std::getenv("CATREC_DATA_DIR");
  if (!dir || !*dir) return std::nullopt;
  return fs::path(dir);
}

const Dataset& real_dataset() {
  static const Dataset ds = [] {
    const fs::path dir = *data_dir();
    return ingest({dir / "train_data.jsonl", dir / "test_data.jsonl", dir / "movies.csv"}, {.seed = 42});
  }();
  return ds;
}

constexpr const char* kNoData = "CATREC_DATA_DIR not set; needs the raw ReDial and MovieLens files";

Outcome ingestion_counts() {
  if (!data_dir()) return skip(kNoData);
  const Dataset& ds = real_dataset();
  const auto& p = ds.parse_report;
  const std::size_t mentions = p.mentions + p.unresolved_mentions;
  const double unmatched = 100.0 * ds.catalog_report.unmatched_fraction();
  return verdict(p.conversations == 10006 && mentions == 51699 && ds.catalog.size() == 6924 &&
                     unmatched >= 20.0 && unmatched <= 30.0,
                 "conversations " + std::to_string(p.conversations) + ", mentions " +
                     std::to_string(mentions) + ", items " + std::to_string(ds.catalog.size()) +
                     ", unmatched " + fmt(unmatched) + "%");
}

Outcome oracle_reproduction() {
  if (!data_dir()) return skip(kNoData);
  const Dataset& ds = real_dataset();
  TrainingConfig cfg;
  cfg.mode = TrainingMode::kOracle;
  cfg.max_epochs = 200;
  const auto start = std::chrono::steady_clock::now();
  const auto trained = train_stage2(ModelBundle{}, ds.catalog, ds.train, ds.validation, cfg);
  const auto r = evaluate(trained.bundle, ds.test, ds.catalog);
  return verdict(r.rec_at_1_pct >= 27 && r.rec_at_1_pct <= 37 && r.rec_at_10_pct >= 56 &&
                     r.rec_at_10_pct <= 69,
                 "oracle Rec@1 " + fmt(r.rec_at_1_pct) + ", Rec@10 " + fmt(r.rec_at_10_pct) + " over " +
                     std::to_string(r.sample_count) + " samples, " + fmt(seconds_since(start), 3) + " s");
}

Outcome full_model_reproduction() {
  if (!data_dir()) return skip(kNoData);
  const char* full = std::getenv("CATREC_FULL_SCALE");
  if (!full || std::string(full) != "1")
    return skip("encoder fine-tuning at full scale needs accelerator hardware; set CATREC_FULL_SCALE=1 "
                "to run it (criterion 7 stands in)");
  const Dataset& ds = real_dataset();
  TrainingConfig cfg;
  if (const char* path = std::getenv("CATREC_TRAIN_CONFIG"); path && *path)
    cfg = TrainingConfig::from_flat(FlatConfig::load(path));
  cfg.mode = TrainingMode::kTwoStage;
  const auto two_stage = evaluate(run_pipeline(ds.catalog, ds.train, ds.validation, cfg).bundle,
                                  ds.test, ds.catalog);
  cfg.mode = TrainingMode::kE2E;
  const auto e2e = evaluate(run_pipeline(ds.catalog, ds.train, ds.validation, cfg).bundle, ds.test,
                            ds.catalog);
  const bool in_range = two_stage.rec_at_1_pct >= 1.7 && two_stage.rec_at_1_pct <= 3.1 &&
                        two_stage.rec_at_10_pct >= 10 && two_stage.rec_at_10_pct <= 16.5;
  const bool ordered = two_stage.rec_at_1_pct > e2e.rec_at_1_pct && two_stage.rec_at_10_pct > e2e.rec_at_10_pct;
  return verdict(in_range && ordered, "two_stage " + fmt(two_stage.rec_at_1_pct) + "/" +
                                          fmt(two_stage.rec_at_10_pct) + ", e2e " +
                                          fmt(e2e.rec_at_1_pct) + "/" + fmt(e2e.rec_at_10_pct));
}

Outcome random_floor() {
  if (!data_dir()) return skip(kNoData);
  const Dataset& ds = real_dataset();
  const auto r = evaluate_scores(ds.test, ds.catalog, random_scorer(ds.catalog.size(), 42), "random");
  return verdict(r.rec_at_10_pct >= 0.05 && r.rec_at_10_pct <= 0.3,
                 "random Rec@10 " + fmt(r.rec_at_10_pct) + "% over " + std::to_string(r.sample_count) +
                     " samples (expected " + fmt(1000.0 / static_cast<double>(ds.catalog.size())) + "%)");
}

const std::map<int, std::pair<std::string, std::function<Outcome()>>>& criteria() {
  static const std::map<int, std::pair<std::string, std::function<Outcome()>>> all = {
      {1, {"loss gradients match finite differences", gradients}},
      {2, {"softmax normalization and shift invariance", softmax_properties}},
      {3, {"input formation golden layout and IM masking", input_layout}},
      {4, {"stage 1 frozen during stage 2", freeze_contract}},
      {5, {"recall matches a brute-force scan", recall_oracle}},
      {6, {"corpus ingestion counts", ingestion_counts}},
      {7, {"toy two-stage learnability", toy_learnability}},
      {8, {"oracle reproduction", oracle_reproduction}},
      {9, {"full model and e2e reproduction", full_model_reproduction}},
      {10, {"random scorer floor", random_floor}},
  };
  return all;
}

Status run(int n) {
  const auto& [name, fn] = criteria().at(n);
  Outcome o;
  try {
    o = fn();
  } catch (const std::exception& e) {
    o = fail(std::string("error: ") + e.what());
  }
  const char* label = o.status == Status::kPass ? "PASS" : o.status == Status::kFail ? "FAIL" : "SKIP";
  std::cout << "criterion " << n << " " << label << " " << name << ": " << o.detail << std::endl;
  return o.status;
}

}  // namespace

int main(int argc, char** argv) {
  if (argc == 3 && std::string(argv[1]) == "--criterion") {
    const int n = std::atoi(argv[2]);
    if (!criteria().count(n)) {
      std::cerr << "unknown criterion " << argv[2] << "\n";
      return 2;
    }
    const Status s = run(n);
    return s == Status::kPass ? 0 : s == Status::kSkip ? 77 : 1;
  }
  if (argc != 1) {
    std::cerr << "usage: acceptance [--criterion N]\n";
    return 2;
  }
  bool failed = false;
  for (const auto& [n, entry] : criteria()) failed |= run(n) == Status::kFail;
  return failed ? 1 : 0;
}
