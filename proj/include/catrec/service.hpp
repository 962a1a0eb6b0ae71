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

#include <chrono>
#include <cstddef>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "catrec/catalog.hpp"
#include "catrec/checkpoint.hpp"
#include "catrec/corpus.hpp"
#include "catrec/explain.hpp"

namespace httplib {
class Server;
}

namespace catrec {

class SessionNotFound : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};
class InvalidRequest : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};
class CapacityExceeded : public std::runtime_error {
 public:
  CapacityExceeded(const std::string& what, int retry_after_seconds)
      : std::runtime_error(what), retry_after_seconds(retry_after_seconds) {}
  int retry_after_seconds;
};

struct ServiceConfig {
  std::size_t top_k = 10;
  std::chrono::seconds session_ttl{30 * 60};
  std::size_t max_sessions = 10000;
  int retry_after_seconds = 5;
};

struct ScoredTitle {
  ItemIndex item_index = 0;
  RedialId redial_id = 0;
  std::string title;
  std::optional<int> year;
  double score = 0.0;
};

struct TurnResponse {
  std::vector<std::pair<std::string, double>> cat_pref;
  std::vector<ScoredTitle> top_k;
  Explanation explanation;
  std::size_t history_length = 0;

  nlohmann::json to_json() const;
};

/// Read-only inference over one loaded bundle: preferences, top-k and
/// explanation for a dialogue history.
class RecommendationPipeline {
 public:
  RecommendationPipeline(ModelBundle bundle, Catalog catalog);

  TurnResponse respond(const std::vector<Utterance>& history, std::size_t k) const;
  const Catalog& catalog() const { return catalog_; }
  const ModelBundle& bundle() const { return bundle_; }

 private:
  ModelBundle bundle_;
  Catalog catalog_;
};

/// In-memory sessions over a shared pipeline. Requests to different
/// sessions run concurrently; requests to one session are serialized.
class RecommenderService {
 public:
  using Clock = std::function<std::chrono::steady_clock::time_point()>;

  RecommenderService(std::shared_ptr<const RecommendationPipeline> pipeline, ServiceConfig config,
                     Clock clock = {});

  std::string create_session();
  TurnResponse post_message(const std::string& session_id, const std::string& text,
                            Sender sender = Sender::kSeeker);
  /// Appends a recommender utterance; an accepted item is recorded as a mention.
  std::size_t record_system_turn(const std::string& session_id, const std::string& text,
                                 std::optional<ItemIndex> accepted_item);
  std::vector<Utterance> history(const std::string& session_id);
  void delete_session(const std::string& session_id);

  /// Drops sessions idle for longer than the TTL; returns how many.
  std::size_t evict_expired();
  std::size_t session_count() const;

  nlohmann::json session_json(const std::string& session_id);
  const RecommendationPipeline& pipeline() const { return *pipeline_; }
  const ServiceConfig& config() const { return config_; }

 private:
  struct Session {
    std::mutex mutex;
    std::vector<Utterance> history;
    std::chrono::steady_clock::time_point created;
    std::chrono::steady_clock::time_point last_active;
  };
  std::shared_ptr<Session> find(const std::string& session_id);
  std::string new_id();

  std::shared_ptr<const RecommendationPipeline> pipeline_;
  ServiceConfig config_;
  Clock clock_;
  mutable std::mutex mutex_;
  std::map<std::string, std::shared_ptr<Session>> sessions_;
  std::mt19937_64 id_rng_;
};

/// Binds the JSON endpoints onto `server`:
///   POST /sessions, POST /sessions/{id}/messages,
///   POST /sessions/{id}/system-turns, GET /sessions/{id},
///   DELETE /sessions/{id}, GET /health.
void register_routes(httplib::Server& server, RecommenderService& service);

}  // namespace catrec
