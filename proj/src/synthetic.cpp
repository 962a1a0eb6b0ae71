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

#include "catrec/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>

#include <json.hpp>

namespace catrec {

namespace {

using nlohmann::json;

// Genres whose names are single lowercase words, so each maps to one keyword.
const std::vector<std::string> kKeywordGenres = {"Comedy",  "Horror", "Romance",     "Western",
                                                 "Animation", "Thriller", "Documentary", "War",
                                                 "Musical", "Crime",  "Fantasy",     "Mystery"};

const std::vector<std::string> kAdjectives = {"Silent", "Golden", "Broken", "Hidden", "Last",
                                              "Electric", "Crimson", "Frozen", "Wild", "Lonely",
                                              "Burning", "Secret", "Distant", "Savage", "Gentle"};
const std::vector<std::string> kNouns = {"River", "Empire", "Garden", "Signal", "Harbor",
                                         "Mirror", "Canyon", "Orchard", "Circus", "Lighthouse",
                                         "Frontier", "Station", "Kingdom", "Voyage", "Island"};

const std::vector<std::string> kSeekerTemplates = {
    "hi ! i am looking for a {0} movie with some {1}",
    "hello , can you suggest something {0} and {1} ?",
    "i am in the mood for {0} mixed with {1} tonight",
    "any good {0} {1} films ?",
    "i really enjoy {0} , especially when there is {1} too",
};
const std::vector<std::string> kRecommenderIntros = {"you might like", "have you seen",
                                                     "i would recommend", "try", "how about"};

std::string fill(std::string tmpl, const std::vector<std::string>& words) {
  for (std::size_t i = 0; i < words.size(); ++i) {
    const std::string key = "{" + std::to_string(i) + "}";
    for (auto pos = tmpl.find(key); pos != std::string::npos; pos = tmpl.find(key))
      tmpl.replace(pos, key.size(), words[i]);
  }
  return tmpl;
}

std::string join_keywords(const std::vector<std::string>& genres, std::size_t from) {
  std::string out;
  for (std::size_t i = from; i < genres.size(); ++i) {
    if (i > from) out += " and ";
    out += genres[i];
  }
  return out;
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

std::string csv_quote(const std::string& s) {
  if (s.find_first_of(",\"") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

struct Movie {
  RedialId id;
  std::string title;  // ReDial display form, "Title (Year)"
  int year;
  std::vector<std::string> genres;
};

void combinations(std::size_t n, std::size_t k, std::size_t start, std::vector<std::size_t>& cur,
                  std::vector<std::vector<std::size_t>>& out) {
  if (cur.size() == k) {
    out.push_back(cur);
    return;
  }
  for (std::size_t i = start; i < n; ++i) {
    cur.push_back(i);
    combinations(n, k, i + 1, cur, out);
    cur.pop_back();
  }
}

}  // namespace

SyntheticCorpus generate_synthetic_corpus(const SyntheticOptions& options) {
  if (options.genre_pool < options.genres_per_item || options.genre_pool > kKeywordGenres.size() ||
      options.genres_per_item == 0)
    throw std::invalid_argument("synthetic corpus: invalid genre pool / genres per item");
  std::mt19937_64 rng(options.seed);
  auto pick = [&](const auto& v) -> const auto& {
    return v[std::uniform_int_distribution<std::size_t>(0, v.size() - 1)(rng)];
  };

  std::vector<std::vector<std::size_t>> combos;
  std::vector<std::size_t> cur;
  combinations(options.genre_pool, options.genres_per_item, 0, cur, combos);
  if (combos.size() + options.unlinked_movies + 1 > kAdjectives.size() * kNouns.size())
    throw std::invalid_argument("synthetic corpus: too many movies for the title generator");

  std::vector<std::pair<std::size_t, std::size_t>> title_slots;
  for (std::size_t a = 0; a < kAdjectives.size(); ++a)
    for (std::size_t n = 0; n < kNouns.size(); ++n) title_slots.emplace_back(a, n);
  std::shuffle(title_slots.begin(), title_slots.end(), rng);
  std::size_t next_slot = 0;
  auto make_title = [&](bool article) {
    const auto [a, n] = title_slots[next_slot++];
    return std::string(article ? "The " : "") + kAdjectives[a] + " " + kNouns[n];
  };

  SyntheticCorpus corpus;
  std::string csv = "movieId,title,genres\n";
  int ml_id = 1;

  std::vector<Movie> targets;
  for (std::size_t k = 0; k < combos.size(); ++k) {
    const bool article = k % 3 == 0;
    const std::string base = make_title(article);
    const int year = 1980 + static_cast<int>(k % 40);
    Movie m{100000 + static_cast<RedialId>(k), base + " (" + std::to_string(year) + ")", year, {}};
    for (std::size_t g : combos[k]) m.genres.push_back(kKeywordGenres[g]);
    // MovieLens files move leading articles to the end: "Title, The (Year)".
    const std::string ml_title =
        article ? base.substr(4) + ", The (" + std::to_string(year) + ")" : m.title;
    std::string genre_field;
    for (const auto& g : m.genres) genre_field += (genre_field.empty() ? "" : "|") + g;
    csv += std::to_string(ml_id++) + "," + csv_quote(ml_title) + "," + genre_field + "\n";
    targets.push_back(std::move(m));
  }

  std::vector<Movie> others;
  for (std::size_t j = 0; j < options.unlinked_movies; ++j)
    others.push_back({200000 + static_cast<RedialId>(j), make_title(false) + " (2001)", 2001, {}});
  {
    // Linked, but MovieLens lists no genres for it.
    Movie m{300000, make_title(false) + " (1999)", 1999, {}};
    csv += std::to_string(ml_id++) + "," + csv_quote(m.title) + ",(no genres listed)\n";
    others.push_back(std::move(m));
  }
  // Unrelated MovieLens rows.
  csv += std::to_string(ml_id++) + ",\"Toy Story (1995)\",Adventure|Animation|Children|Comedy|Fantasy\n";
  csv += std::to_string(ml_id++) + ",Heat (1995),Action|Crime|Thriller\n";
  corpus.movies_csv = std::move(csv);

  std::vector<std::size_t> order(options.conversations);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::shuffle(order.begin(), order.end(), rng);
  const auto n_test = static_cast<std::size_t>(
      std::lround(options.test_fraction * static_cast<double>(options.conversations)));
  std::vector<bool> is_test(options.conversations, false);
  for (std::size_t i = 0; i < n_test; ++i) is_test[order[i]] = true;

  long long message_id = 1;
  for (std::size_t c = 0; c < options.conversations; ++c) {
    const long long seeker = 1000 + 2 * static_cast<long long>(c);
    const long long recommender = seeker + 1;
    const Movie& target = pick(targets);
    std::vector<std::string> words;
    for (const auto& g : target.genres) words.push_back(lower(g));
    std::shuffle(words.begin(), words.end(), rng);
    // Templates take two slots; extra genres are folded into the second.
    std::vector<std::string> slots = {words[0], words.size() > 1 ? join_keywords(words, 1) : words[0]};

    json mentions = json::object();
    json messages = json::array();
    int offset = 0;
    auto say = [&](long long who, const std::string& text) {
      messages.push_back({{"timeOffset", offset},
                          {"text", text},
                          {"senderWorkerId", who},
                          {"messageId", message_id++}});
      offset += 7;
    };

    std::string opening = fill(pick(kSeekerTemplates), slots);
    if (!others.empty() && std::uniform_real_distribution<double>(0, 1)(rng) < 0.3) {
      const Movie& seen = pick(others);
      opening += " . i already saw @" + std::to_string(seen.id);
      mentions[std::to_string(seen.id)] = seen.title;
    }
    say(seeker, opening);
    say(recommender, pick(kRecommenderIntros) + " @" + std::to_string(target.id) + " ?");
    mentions[std::to_string(target.id)] = target.title;
    for (std::size_t t = 0; t < options.follow_up_turns; ++t) {
      say(seeker, "sounds great , thanks ! anything similar ?");
      say(recommender, "well , @" + std::to_string(target.id) + " is still my top pick");
    }
    say(seeker, "thanks , bye");

    json record = {{"movieMentions", std::move(mentions)},
                   {"respondentQuestions", json::object()},
                   {"messages", std::move(messages)},
                   {"conversationId", std::to_string(20000 + c)},
                   {"respondentWorkerId", recommender},
                   {"initiatorWorkerId", seeker},
                   {"initiatorQuestions", json::object()}};
    (is_test[c] ? corpus.test_lines : corpus.train_lines).push_back(record.dump());
  }
  return corpus;
}

DatasetPaths write_synthetic_corpus(const std::filesystem::path& dir, const SyntheticCorpus& corpus) {
  std::filesystem::create_directories(dir);
  DatasetPaths paths{dir / "train_data.jsonl", dir / "test_data.jsonl", dir / "movies.csv"};
  auto write_lines = [](const std::filesystem::path& p, const std::vector<std::string>& lines) {
    std::ofstream out(p);
    if (!out) throw DataError("cannot write " + p.string());
    for (const auto& l : lines) out << l << '\n';
  };
  write_lines(paths.redial_train, corpus.train_lines);
  write_lines(paths.redial_test, corpus.test_lines);
  std::ofstream out(paths.movielens);
  if (!out) throw DataError("cannot write " + paths.movielens.string());
  out << corpus.movies_csv;
  return paths;
}

}  // namespace catrec
