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

#include "catrec/catalog.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

#include "catrec/hash.hpp"

namespace catrec {

namespace {

constexpr std::string_view kCatalogHeader = "# catrec-catalog v1";
constexpr std::string_view kNoGenres = "(no genres listed)";

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split(std::string_view s, char delim) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(delim, start);
    if (pos == std::string_view::npos) {
      out.push_back(s.substr(start));
      return out;
    }
    out.push_back(s.substr(start, pos - start));
    start = pos + 1;
  }
}

template <typename T>
std::optional<T> parse_number(std::string_view s) {
  T value{};
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, value);
  if (ec != std::errc() || ptr != end) return std::nullopt;
  return value;
}

bool is_article(std::string_view w) { return w == "the" || w == "a" || w == "an"; }

std::string format_value(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

// ---------------------------------------------------------------------------
// CategoryVocabulary

CategoryVocabulary CategoryVocabulary::movielens() {
  return CategoryVocabulary({"Comedy", "IMAX", "Romance", "Western", "Crime", "Sci-Fi", "Animation",
                             "Thriller", "Fantasy", "Film-Noir", "Mystery", "Action", "Horror",
                             "Adventure", "Musical", "Children", "Drama", "War", "Documentary"});
}

CategoryVocabulary::CategoryVocabulary(std::vector<std::string> names) : names_(std::move(names)) {
  if (names_.empty()) throw DataError("category vocabulary is empty");
  std::set<std::string> seen;
  for (const auto& n : names_) {
    if (n.empty() || n.find('|') != std::string::npos)
      throw DataError("invalid category name '" + n + "'");
    if (!seen.insert(n).second) throw DataError("duplicate category name '" + n + "'");
  }
}

std::optional<std::size_t> CategoryVocabulary::index_of(std::string_view name) const {
  for (std::size_t i = 0; i < names_.size(); ++i)
    if (names_[i] == name) return i;
  return std::nullopt;
}

std::string CategoryVocabulary::serialize() const {
  std::string out;
  for (std::size_t i = 0; i < names_.size(); ++i) {
    if (i) out += '|';
    out += names_[i];
  }
  return out;
}

CategoryVocabulary CategoryVocabulary::parse(std::string_view joined) {
  std::vector<std::string> names;
  for (auto part : split(trim(joined), '|')) names.emplace_back(part);
  return CategoryVocabulary(std::move(names));
}

// ---------------------------------------------------------------------------
// Title normalization and MovieLens

TitleKey normalize_title(std::string_view raw) {
  std::string s(trim(raw));
  TitleKey key;

  // Trailing "(YYYY)".
  if (s.size() >= 6 && s.back() == ')') {
    const auto open = s.rfind('(');
    if (open != std::string::npos && s.size() - open == 6) {
      if (auto year = parse_number<int>(std::string_view(s).substr(open + 1, 4))) {
        key.year = *year;
        s.erase(open);
      }
    }
  }

  std::string cleaned;
  cleaned.reserve(s.size());
  for (char c : s) {
    const auto uc = static_cast<unsigned char>(c);
    if (std::isalnum(uc) || uc >= 0x80) {
      cleaned += static_cast<char>(std::tolower(uc));
    } else if (c == '\'') {
      // "Schindler's" and "Schindlers" should collide.
    } else {
      cleaned += ' ';
    }
  }

  std::vector<std::string> words;
  std::istringstream ws(cleaned);
  for (std::string w; ws >> w;) words.push_back(std::move(w));
  if (words.size() > 1 && is_article(words.front())) words.erase(words.begin());
  if (words.size() > 1 && is_article(words.back())) words.pop_back();

  for (std::size_t i = 0; i < words.size(); ++i) {
    if (i) key.title += ' ';
    key.title += words[i];
  }
  return key;
}

void MovieLensIndex::add(const TitleKey& key, std::set<std::string> genres) {
  by_title_[key.title].push_back(Entry{key.year, std::move(genres)});
  ++count_;
}

const std::set<std::string>* MovieLensIndex::find(const TitleKey& key) const {
  const auto it = by_title_.find(key.title);
  if (it == by_title_.end()) return nullptr;
  const auto& entries = it->second;
  if (key.year) {
    for (const auto& e : entries)
      if (e.year == key.year) return &e.genres;
    // Year present on our side; fall back only to a unique year-less entry.
    const Entry* yearless = nullptr;
    std::size_t n = 0;
    for (const auto& e : entries) {
      if (!e.year) {
        yearless = &e;
        ++n;
      }
    }
    return n == 1 ? &yearless->genres : nullptr;
  }
  return entries.size() == 1 ? &entries.front().genres : nullptr;
}

std::optional<std::vector<std::string>> split_csv_record(std::string_view line) {
  std::vector<std::string> fields;
  std::string field;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(field));
      field.clear();
    } else {
      field += c;
    }
  }
  if (quoted) return std::nullopt;
  fields.push_back(std::move(field));
  return fields;
}

MovieLensIndex parse_movielens(std::istream& in, MovieLensReport* report) {
  MovieLensReport local;
  MovieLensReport& rep = report ? *report : local;
  MovieLensIndex index;

  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!header_seen) {
      header_seen = true;
      if (trim(line) != "movieId,title,genres")
        throw DataError("movies.csv: unexpected header '" + line + "'");
      continue;
    }
    if (trim(line).empty()) continue;
    ++rep.data_rows;

    auto fields = split_csv_record(line);
    if (!fields || fields->size() != 3 || !parse_number<long long>(trim((*fields)[0]))) {
      ++rep.skipped_rows;
      rep.warnings.push_back("movies.csv:" + std::to_string(line_no) + ": malformed row skipped");
      continue;
    }
    std::set<std::string> genres;
    const auto genre_field = trim((*fields)[2]);
    if (genre_field != kNoGenres) {
      for (auto g : split(genre_field, '|')) {
        g = trim(g);
        if (!g.empty()) genres.emplace(g);
      }
    }
    index.add(normalize_title((*fields)[1]), std::move(genres));
  }
  if (!header_seen) throw DataError("movies.csv: empty file");
  return index;
}

MovieLensIndex load_movielens(const std::filesystem::path& path, MovieLensReport* report) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open MovieLens file " + path.string());
  return parse_movielens(in, report);
}

// ---------------------------------------------------------------------------
// Catalog

std::string CatalogReport::to_string() const {
  std::ostringstream out;
  out << "items=" << items << "\nmatched=" << matched << "\nunmatched=" << unmatched
      << "\nlinked_without_genres=" << linked_without_genres
      << "\nunknown_genre_labels=" << unknown_genre_labels
      << "\nunmatched_fraction=" << unmatched_fraction() << "\n";
  return out.str();
}

Catalog::Catalog(CategoryVocabulary vocabulary, std::vector<Item> items)
    : vocabulary_(std::move(vocabulary)), items_(std::move(items)) {
  for (std::size_t i = 0; i < items_.size(); ++i) {
    const Item& item = items_[i];
    if (item.item_index != i) throw DataError("catalog item indices are not contiguous");
    if (item.category_vector.size() != vocabulary_.size())
      throw DataError("category vector length mismatch for item " + std::to_string(i));
    if (!by_redial_id_.emplace(item.redial_id, i).second)
      throw DataError("duplicate redial_id " + std::to_string(item.redial_id));
  }
}

const Item* Catalog::find(RedialId id) const {
  const auto it = by_redial_id_.find(id);
  return it == by_redial_id_.end() ? nullptr : &items_[it->second];
}

std::string Catalog::fingerprint() const {
  Fnv1a h;
  h.update(vocabulary_.serialize());
  for (const auto& item : items_) {
    h.update("\n");
    h.update(std::to_string(item.item_index));
    h.update("\t");
    h.update(std::to_string(item.redial_id));
    h.update("\t");
    h.update(item.title);
  }
  return h.hex();
}

void Catalog::write(std::ostream& out) const {
  out << kCatalogHeader << '\n';
  out << "categories\t" << vocabulary_.serialize() << '\n';
  for (const auto& item : items_) {
    std::string title = item.title;
    std::replace(title.begin(), title.end(), '\t', ' ');
    std::replace(title.begin(), title.end(), '\n', ' ');
    out << item.item_index << '\t' << item.redial_id << '\t' << title << '\t'
        << (item.year ? std::to_string(*item.year) : "-") << '\t' << (item.matched ? 1 : 0)
        << '\t';
    for (std::size_t c = 0; c < item.category_vector.size(); ++c) {
      if (c) out << ',';
      out << format_value(item.category_vector[c]);
    }
    out << '\n';
  }
}

Catalog Catalog::read(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kCatalogHeader)
    throw DataError("catalog: missing or unsupported header");
  if (!std::getline(in, line) || line.rfind("categories\t", 0) != 0)
    throw DataError("catalog: missing categories line");
  auto vocab = CategoryVocabulary::parse(std::string_view(line).substr(11));

  std::vector<Item> items;
  std::size_t line_no = 2;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto fields = split(line, '\t');
    auto fail = [&](const std::string& what) {
      return DataError("catalog:" + std::to_string(line_no) + ": " + what);
    };
    if (fields.size() != 6) throw fail("expected 6 fields");
    Item item;
    auto index = parse_number<std::size_t>(fields[0]);
    auto id = parse_number<RedialId>(fields[1]);
    if (!index || !id) throw fail("bad index or id");
    item.item_index = *index;
    item.redial_id = *id;
    item.title = std::string(fields[2]);
    if (fields[3] != "-") {
      auto year = parse_number<int>(fields[3]);
      if (!year) throw fail("bad year");
      item.year = *year;
    }
    item.matched = fields[4] == "1";
    for (auto v : split(fields[5], ',')) {
      auto value = parse_number<double>(v);
      if (!value) throw fail("bad category value");
      item.category_vector.push_back(*value);
    }
    items.push_back(std::move(item));
  }
  return Catalog(std::move(vocab), std::move(items));
}

void Catalog::save(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write catalog " + path.string());
  write(out);
}

Catalog Catalog::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open catalog " + path.string());
  return read(in);
}

Catalog build_catalog(const std::vector<std::pair<RedialId, std::string>>& redial_movies,
                      const MovieLensIndex& movielens, const CategoryVocabulary& vocabulary,
                      CatalogReport* report) {
  if (redial_movies.empty()) throw DataError("build_catalog: no ReDial movies");
  CatalogReport local;
  CatalogReport& rep = report ? *report : local;
  rep = CatalogReport{};

  std::vector<std::pair<RedialId, std::string>> sorted = redial_movies;
  std::sort(sorted.begin(), sorted.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  for (std::size_t i = 1; i < sorted.size(); ++i)
    if (sorted[i].first == sorted[i - 1].first)
      throw DataError("duplicate redial_id " + std::to_string(sorted[i].first));

  std::vector<Item> items;
  items.reserve(sorted.size());
  for (auto& [id, title] : sorted) {
    Item item;
    item.item_index = items.size();
    item.redial_id = id;
    item.title = std::string(trim(title));
    const TitleKey key = normalize_title(title);
    item.year = key.year;
    item.category_vector.assign(vocabulary.size(), kUnknownCategoryValue);

    if (const auto* genres = key.title.empty() ? nullptr : movielens.find(key)) {
      std::vector<double> v(vocabulary.size(), 0.0);
      bool any = false;
      for (const auto& g : *genres) {
        if (auto c = vocabulary.index_of(g)) {
          v[*c] = 1.0;
          any = true;
        } else {
          ++rep.unknown_genre_labels;
        }
      }
      if (any) {
        item.category_vector = std::move(v);
        item.matched = true;
      } else {
        ++rep.linked_without_genres;
      }
    }
    if (item.matched)
      ++rep.matched;
    else
      ++rep.unmatched;
    items.push_back(std::move(item));
  }
  rep.items = items.size();
  return Catalog(vocabulary, std::move(items));
}

}  // namespace catrec
