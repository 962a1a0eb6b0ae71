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

#include "catrec/checkpoint.hpp"

#include <fstream>

#include "catrec/config.hpp"

namespace catrec {

namespace fs = std::filesystem;

namespace {

constexpr std::string_view kBundleFormat = "catrec-bundle-v1";
constexpr std::string_view kPreferenceFormat = "catrec-preference-v1";

void write_manifest(const fs::path& path, const FlatConfig& cfg) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  cfg.write(out);
}

std::string require(const FlatConfig& cfg, const std::string& key, const fs::path& where) {
  auto v = cfg.find(key);
  if (!v) throw DataError(where.string() + ": missing key " + key);
  return *v;
}

}  // namespace

std::string_view to_string(TrainingMode mode) {
  switch (mode) {
    case TrainingMode::kTwoStage: return "two_stage";
    case TrainingMode::kE2E: return "e2e";
    case TrainingMode::kOracle: return "oracle";
  }
  return "?";
}

TrainingMode parse_mode(std::string_view name) {
  if (name == "two_stage") return TrainingMode::kTwoStage;
  if (name == "e2e") return TrainingMode::kE2E;
  if (name == "oracle") return TrainingMode::kOracle;
  throw std::invalid_argument("unknown mode '" + std::string(name) + "'");
}

void ModelBundle::check_catalog(const Catalog& catalog) const {
  if (catalog.fingerprint() != catalog_fingerprint)
    throw DataError("catalog fingerprint mismatch: model bound to " + catalog_fingerprint +
                    ", catalog is " + catalog.fingerprint());
  if (!(catalog.vocabulary() == categories))
    throw DataError("catalog category order differs from the model's");
  if (scorer && scorer->num_items() != catalog.size())
    throw DataError("scorer item count does not match catalog size");
}

void save_preference_model(const fs::path& dir, const PreferenceModel& model) {
  fs::create_directories(dir);
  FlatConfig manifest(model.encoder().config().to_map());
  manifest.set("format", std::string(kPreferenceFormat));
  manifest.set("categories", model.categories().serialize());
  manifest.set("max_len", std::to_string(model.max_len()));
  write_manifest(dir / "manifest.txt", manifest);
  model.tokenizer().vocab().save(dir / "vocab.txt");
  std::ofstream out(dir / "weights.bin", std::ios::binary);
  if (!out) throw DataError("cannot write " + (dir / "weights.bin").string());
  nn::write_parameters(out, model.parameters());
}

PreferenceModel load_preference_model(const fs::path& dir) {
  const auto manifest = FlatConfig::load(dir / "manifest.txt");
  if (require(manifest, "format", dir) != kPreferenceFormat)
    throw DataError(dir.string() + ": unsupported preference model format");
  auto categories = CategoryVocabulary::parse(require(manifest, "categories", dir));
  const auto max_len = static_cast<std::size_t>(manifest.get_int("max_len", kDefaultMaxLen));
  WordPieceTokenizer tokenizer(TokenVocabulary::load(dir / "vocab.txt"));

  EncoderConfig config = EncoderConfig::from_map(manifest.values());
  if (config.vocab_size != tokenizer.vocab().size())
    throw DataError(dir.string() + ": vocab.txt size does not match encoder.vocab_size");
  std::mt19937_64 rng(0);
  TransformerEncoder encoder(config, rng);
  CategoryHeads heads(categories.size(), config.hidden_size);

  nn::ParameterRefs params = encoder.parameters();
  for (auto* p : heads.parameters()) params.push_back(p);
  std::ifstream in(dir / "weights.bin", std::ios::binary);
  if (!in) throw DataError("cannot open " + (dir / "weights.bin").string());
  nn::read_parameters(in, params);
  return PreferenceModel(std::move(categories), std::move(tokenizer), std::move(encoder),
                         std::move(heads), max_len);
}

void save_bundle(const fs::path& dir, const ModelBundle& bundle) {
  fs::create_directories(dir);
  FlatConfig manifest;
  manifest.set("format", std::string(kBundleFormat));
  manifest.set("mode", std::string(to_string(bundle.mode)));
  manifest.set("categories", bundle.categories.serialize());
  manifest.set("catalog_fingerprint", bundle.catalog_fingerprint);
  manifest.set("data_dir", bundle.data_dir);
  manifest.set("has_preference", bundle.preference ? "true" : "false");
  manifest.set("has_scorer", bundle.scorer ? "true" : "false");
  if (bundle.scorer) manifest.set("num_items", std::to_string(bundle.scorer->num_items()));
  write_manifest(dir / "manifest.txt", manifest);
  if (bundle.preference) save_preference_model(dir / "preference", *bundle.preference);
  if (bundle.scorer) {
    std::ofstream out(dir / "scorer.bin", std::ios::binary);
    if (!out) throw DataError("cannot write " + (dir / "scorer.bin").string());
    nn::write_parameters(out, bundle.scorer->parameters());
  }
}

ModelBundle load_bundle(const fs::path& dir) {
  const auto manifest = FlatConfig::load(dir / "manifest.txt");
  if (require(manifest, "format", dir) != kBundleFormat)
    throw DataError(dir.string() + ": not a model bundle");
  ModelBundle bundle;
  bundle.mode = parse_mode(require(manifest, "mode", dir));
  bundle.categories = CategoryVocabulary::parse(require(manifest, "categories", dir));
  bundle.catalog_fingerprint = require(manifest, "catalog_fingerprint", dir);
  bundle.data_dir = manifest.get_string("data_dir", "");
  if (manifest.get_bool("has_preference", false)) {
    bundle.preference = load_preference_model(dir / "preference");
    if (!(bundle.preference->categories() == bundle.categories))
      throw DataError(dir.string() + ": preference model category order differs from manifest");
  }
  if (manifest.get_bool("has_scorer", false)) {
    std::ifstream in(dir / "scorer.bin", std::ios::binary);
    if (!in) throw DataError("cannot open " + (dir / "scorer.bin").string());
    const auto items = static_cast<std::size_t>(manifest.get_int("num_items", 0));
    if (items == 0) throw DataError(dir.string() + ": manifest lacks num_items");
    ItemScorer scorer(items, bundle.categories.size());
    nn::read_parameters(in, scorer.parameters());
    bundle.scorer = std::move(scorer);
  }
  return bundle;
}

}  // namespace catrec
