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
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace catrec {

/// Unrecoverable problem with an input file or with catalog consistency.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Ordered list of category labels. The order is part of every model
/// contract: heads, category vectors and explanations are indexed by it.
class CategoryVocabulary {
 public:
  /// The 19 MovieLens genres in their canonical order.
  static CategoryVocabulary movielens();

  explicit CategoryVocabulary(std::vector<std::string> names);

  std::size_t size() const { return names_.size(); }
  const std::string& name(std::size_t i) const { return names_.at(i); }
  const std::vector<std::string>& names() const { return names_; }
  std::optional<std::size_t> index_of(std::string_view name) const;

  /// Pipe-joined names, as persisted in catalog and checkpoint files.
  std::string serialize() const;
  static CategoryVocabulary parse(std::string_view joined);

  bool operator==(const CategoryVocabulary& other) const = default;

 private:
  std::vector<std::string> names_;
};

using RedialId = std::int64_t;
using ItemIndex = std::size_t;

inline constexpr double kUnknownCategoryValue = 0.5;

struct Item {
  ItemIndex item_index = 0;
  RedialId redial_id = 0;
  std::string title;
  std::optional<int> year;
  std::vector<double> category_vector;
  bool matched = false;
};

struct TitleKey {
  std::string title;
  std::optional<int> year;
};

/// Lowercases, extracts a trailing "(YYYY)", replaces punctuation with
/// spaces and strips a leading or trailing article.
TitleKey normalize_title(std::string_view raw);

/// Genre table keyed by normalized title. One title may map to several
/// releases with different years.
class MovieLensIndex {
 public:
  struct Entry {
    std::optional<int> year;
    std::set<std::string> genres;
  };

  void add(const TitleKey& key, std::set<std::string> genres);

  /// Exact (title, year) match; if either side has no year, falls back to
  /// the unique title-only entry.
  const std::set<std::string>* find(const TitleKey& key) const;

  std::size_t size() const { return count_; }

 private:
  std::unordered_map<std::string, std::vector<Entry>> by_title_;
  std::size_t count_ = 0;
};

struct MovieLensReport {
  std::size_t data_rows = 0;
  std::size_t skipped_rows = 0;
  std::vector<std::string> warnings;
};

/// Parses a MovieLens movies.csv (movieId,title,genres). Malformed rows
/// are skipped and recorded in `report`.
MovieLensIndex load_movielens(const std::filesystem::path& path,
                              MovieLensReport* report = nullptr);
MovieLensIndex parse_movielens(std::istream& in, MovieLensReport* report = nullptr);

/// Splits one CSV record honoring double-quoted fields. Returns nullopt on
/// an unterminated quote.
std::optional<std::vector<std::string>> split_csv_record(std::string_view line);

struct CatalogReport {
  std::size_t items = 0;
  std::size_t matched = 0;
  std::size_t unmatched = 0;
  std::size_t linked_without_genres = 0;
  std::size_t unknown_genre_labels = 0;

  double unmatched_fraction() const {
    return items == 0 ? 0.0 : static_cast<double>(unmatched) / static_cast<double>(items);
  }
  std::string to_string() const;
};

class Catalog {
 public:
  Catalog(CategoryVocabulary vocabulary, std::vector<Item> items);

  const CategoryVocabulary& vocabulary() const { return vocabulary_; }
  const std::vector<Item>& items() const { return items_; }
  std::size_t size() const { return items_.size(); }
  std::size_t num_categories() const { return vocabulary_.size(); }
  const Item& item(ItemIndex index) const { return items_.at(index); }
  const Item* find(RedialId id) const;

  /// FNV-1a over the item list (index, id, title) and category order.
  std::string fingerprint() const;

  void save(const std::filesystem::path& path) const;
  static Catalog load(const std::filesystem::path& path);
  void write(std::ostream& out) const;
  static Catalog read(std::istream& in);

 private:
  CategoryVocabulary vocabulary_;
  std::vector<Item> items_;
  std::unordered_map<RedialId, ItemIndex> by_redial_id_;
};

/// Links every ReDial movie to MovieLens genres. Items are indexed in
/// ascending redial_id order. Throws DataError on a duplicate redial_id.
Catalog build_catalog(const std::vector<std::pair<RedialId, std::string>>& redial_movies,
                      const MovieLensIndex& movielens, const CategoryVocabulary& vocabulary,
                      CatalogReport* report = nullptr);

}  // namespace catrec
