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

#include "catrec/evaluation.hpp"

#include <algorithm>
#include <iomanip>
#include <limits>
#include <memory>
#include <random>
#include <set>
#include <sstream>

namespace catrec {

namespace {

struct Baseline {
  const char* name;
  double rec1;
  double rec10;
};

// Published reference numbers, reported for context only.
constexpr Baseline kBaselines[] = {{"ReDial", 1.50, 10.49}, {"KBRD", 2.15, 16.42}};

}  // namespace

int recall_at_n(const std::vector<ItemIndex>& ranked, ItemIndex target, std::size_t n) {
  if (ranked.size() < n) throw std::invalid_argument("recall_at_n: ranked list shorter than n");
  return std::find(ranked.begin(), ranked.begin() + static_cast<std::ptrdiff_t>(n), target) !=
                 ranked.begin() + static_cast<std::ptrdiff_t>(n)
             ? 1
             : 0;
}

int recall_at_n(const std::vector<RankedItem>& ranked, ItemIndex target, std::size_t n) {
  std::vector<ItemIndex> ids;
  ids.reserve(ranked.size());
  for (const auto& r : ranked) ids.push_back(r.item);
  return recall_at_n(ids, target, n);
}

std::string EvalReport::to_table() const {
  std::ostringstream out;
  out << std::fixed << std::setprecision(2);
  out << "Model            Rec@1    Rec@10\n";
  out << "---------------  -------  -------\n";
  for (const auto& b : kBaselines)
    out << std::left << std::setw(15) << b.name << "  " << std::right << std::setw(7) << b.rec1
        << "  " << std::setw(7) << b.rec10 << "   (published)\n";
  out << std::left << std::setw(15) << ("this:" + mode) << "  " << std::right << std::setw(7)
      << rec_at_1_pct << "  " << std::setw(7) << rec_at_10_pct << "\n";
  out << "samples: " << sample_count << "\n";
  return out.str();
}

std::string EvalReport::to_key_values() const {
  std::ostringstream out;
  out << std::setprecision(10);
  out << "mode = " << mode << "\nsample_count = " << sample_count
      << "\nrec_at_1_pct = " << rec_at_1_pct << "\nrec_at_10_pct = " << rec_at_10_pct << "\n";
  for (const auto& [k, v] : metadata) out << "meta." << k << " = " << v << "\n";
  return out.str();
}

EvalReport evaluate_scores(const std::vector<Sample>& samples, const Catalog& catalog,
                           const SampleScorer& scorer, const std::string& mode,
                           const EvalOptions& options) {
  if (samples.empty()) throw std::invalid_argument("evaluate: empty sample set");
  const std::size_t depth = std::min<std::size_t>(10, catalog.size());
  std::size_t hits1 = 0, hits10 = 0;
  for (const auto& s : samples) {
    nn::Vector scores = scorer(s);
    if (static_cast<std::size_t>(scores.size()) != catalog.size())
      throw std::runtime_error("evaluate: scorer output size differs from catalog");
    if (options.exclude_mentioned) {
      for (const auto& u : s.history)
        for (RedialId id : u.mentions)
          if (const Item* item = catalog.find(id); item && item->item_index != s.target_item)
            scores(static_cast<Eigen::Index>(item->item_index)) =
                -std::numeric_limits<double>::infinity();
    }
    const auto ranked = rank_items(scores, depth);
    hits1 += static_cast<std::size_t>(recall_at_n(ranked, s.target_item, 1));
    hits10 += static_cast<std::size_t>(recall_at_n(ranked, s.target_item, depth));
  }
  EvalReport report;
  report.mode = mode;
  report.sample_count = samples.size();
  report.rec_at_1_pct = 100.0 * static_cast<double>(hits1) / static_cast<double>(samples.size());
  report.rec_at_10_pct = 100.0 * static_cast<double>(hits10) / static_cast<double>(samples.size());
  report.metadata["catalog_fingerprint"] = catalog.fingerprint();
  report.metadata["exclude_mentioned"] = options.exclude_mentioned ? "true" : "false";
  return report;
}

EvalReport evaluate(const ModelBundle& bundle, const std::vector<Sample>& samples,
                    const Catalog& catalog, const EvalOptions& options) {
  bundle.check_catalog(catalog);
  if (!bundle.scorer) throw std::runtime_error("evaluate: bundle has no item scorer");
  const bool oracle = bundle.mode == TrainingMode::kOracle;
  if (!oracle && !bundle.preference)
    throw std::runtime_error("evaluate: bundle has no preference model");

  // Only the preference source differs between modes.
  auto preferences = [&](const Sample& s) -> nn::Vector {
    if (oracle)
      return Eigen::Map<const nn::Vector>(s.target_category_vector.data(),
                                          static_cast<Eigen::Index>(s.target_category_vector.size()));
    return bundle.preference->predict(s.history).values;
  };
  const SampleScorer scorer = [&](const Sample& s) {
    return score_items(preferences(s), *bundle.scorer).scores;
  };
  return evaluate_scores(samples, catalog, scorer, std::string(to_string(bundle.mode)), options);
}

SampleScorer random_scorer(std::size_t num_items, std::uint64_t seed) {
  auto rng = std::make_shared<std::mt19937_64>(seed);
  return [rng, num_items](const Sample&) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    nn::Vector v(static_cast<Eigen::Index>(num_items));
    for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = u(*rng);
    return v;
  };
}

}  // namespace catrec
