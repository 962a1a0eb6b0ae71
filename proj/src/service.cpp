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

#include "catrec/service.hpp"

#include <algorithm>
#include <cstdio>

#include <httplib.h>

#include "catrec/recommender_head.hpp"

namespace catrec {

using nlohmann::json;

nlohmann::json TurnResponse::to_json() const {
  json prefs = json::array();
  for (const auto& [name, value] : cat_pref) prefs.push_back({{"category", name}, {"value", value}});
  json items = json::array();
  for (const auto& t : top_k)
    items.push_back({{"item_index", t.item_index},
                     {"redial_id", t.redial_id},
                     {"title", t.title},
                     {"year", t.year ? json(*t.year) : json(nullptr)},
                     {"score", t.score}});
  json entries = json::array();
  for (const auto& e : explanation.entries)
    entries.push_back({{"category", e.category}, {"percent", e.percent}});
  return {{"cat_pref", std::move(prefs)},
          {"top_k", std::move(items)},
          {"explanation", explanation.text},
          {"explanation_entries", std::move(entries)},
          {"history_length", history_length}};
}

// ---------------------------------------------------------------------------

RecommendationPipeline::RecommendationPipeline(ModelBundle bundle, Catalog catalog)
    : bundle_(std::move(bundle)), catalog_(std::move(catalog)) {
  if (!bundle_.preference || !bundle_.scorer)
    throw std::invalid_argument(
        "serving needs a bundle with both a preference model and a scorer (oracle bundles cannot "
        "serve)");
  bundle_.check_catalog(catalog_);
}

TurnResponse RecommendationPipeline::respond(const std::vector<Utterance>& history,
                                             std::size_t k) const {
  const auto pref = bundle_.preference->predict(history);
  const auto scores = score_items(pref.values, *bundle_.scorer);
  TurnResponse r;
  for (std::size_t i = 0; i < pref.size(); ++i)
    r.cat_pref.emplace_back(bundle_.categories.name(i), pref[i]);
  for (const auto& ranked : rank_items(scores, std::min(k, catalog_.size()))) {
    const Item& item = catalog_.item(ranked.item);
    r.top_k.push_back({item.item_index, item.redial_id, item.title, item.year, ranked.score});
  }
  r.explanation = make_explanation(pref, bundle_.categories);
  r.history_length = history.size();
  return r;
}

// ---------------------------------------------------------------------------

RecommenderService::RecommenderService(std::shared_ptr<const RecommendationPipeline> pipeline,
                                       ServiceConfig config, Clock clock)
    : pipeline_(std::move(pipeline)),
      config_(config),
      clock_(clock ? std::move(clock) : Clock([] { return std::chrono::steady_clock::now(); })),
      id_rng_(std::random_device{}()) {
  if (config_.top_k < 1) throw std::invalid_argument("top_k must be >= 1");
}

std::string RecommenderService::new_id() {
  char buf[33];
  std::snprintf(buf, sizeof(buf), "%016llx%016llx", static_cast<unsigned long long>(id_rng_()),
                static_cast<unsigned long long>(id_rng_()));
  return buf;
}

std::string RecommenderService::create_session() {
  evict_expired();
  std::lock_guard lock(mutex_);
  if (sessions_.size() >= config_.max_sessions)
    throw CapacityExceeded("session capacity reached; retry in " +
                           std::to_string(config_.retry_after_seconds) + "s",
                           config_.retry_after_seconds);
  std::string id;
  do {
    id = new_id();
  } while (sessions_.count(id));
  auto session = std::make_shared<Session>();
  session->created = session->last_active = clock_();
  sessions_.emplace(id, std::move(session));
  return id;
}

std::shared_ptr<RecommenderService::Session> RecommenderService::find(const std::string& id) {
  std::lock_guard lock(mutex_);
  const auto it = sessions_.find(id);
  if (it == sessions_.end()) throw SessionNotFound("unknown session '" + id + "'");
  return it->second;
}

TurnResponse RecommenderService::post_message(const std::string& session_id,
                                              const std::string& text, Sender sender) {
  if (text.find_first_not_of(" \t\r\n") == std::string::npos)
    throw InvalidRequest("message text must not be empty");
  auto session = find(session_id);
  std::lock_guard lock(session->mutex);
  Utterance u;
  u.sender = sender;
  u.text = text;
  for (RedialId id : extract_mentions(text))
    if (pipeline_->catalog().find(id)) u.mentions.push_back(id);
  session->history.push_back(std::move(u));
  session->last_active = clock_();
  return pipeline_->respond(session->history, config_.top_k);
}

std::size_t RecommenderService::record_system_turn(const std::string& session_id,
                                                   const std::string& text,
                                                   std::optional<ItemIndex> accepted_item) {
  auto session = find(session_id);
  const Catalog& catalog = pipeline_->catalog();
  if (accepted_item && *accepted_item >= catalog.size())
    throw InvalidRequest("unknown item index " + std::to_string(*accepted_item));
  Utterance u;
  u.sender = Sender::kRecommender;
  u.text = text;
  for (RedialId id : extract_mentions(text))
    if (catalog.find(id)) u.mentions.push_back(id);
  if (accepted_item) {
    const RedialId id = catalog.item(*accepted_item).redial_id;
    if (std::find(u.mentions.begin(), u.mentions.end(), id) == u.mentions.end()) {
      if (!u.text.empty()) u.text += ' ';
      u.text += "@" + std::to_string(id);
      u.mentions.push_back(id);
    }
  }
  if (u.text.find_first_not_of(" \t\r\n") == std::string::npos)
    throw InvalidRequest("system turn needs text or an accepted item");
  std::lock_guard lock(session->mutex);
  session->history.push_back(std::move(u));
  session->last_active = clock_();
  return session->history.size();
}

std::vector<Utterance> RecommenderService::history(const std::string& session_id) {
  auto session = find(session_id);
  std::lock_guard lock(session->mutex);
  return session->history;
}

json RecommenderService::session_json(const std::string& session_id) {
  auto session = find(session_id);
  std::lock_guard lock(session->mutex);
  json h = json::array();
  for (const auto& u : session->history)
    h.push_back({{"sender", to_string(u.sender)}, {"text", u.text}, {"mentions", u.mentions}});
  const auto age = [&](auto tp) {
    return std::chrono::duration_cast<std::chrono::seconds>(clock_() - tp).count();
  };
  return {{"session_id", session_id},
          {"history", std::move(h)},
          {"age_seconds", age(session->created)},
          {"idle_seconds", age(session->last_active)}};
}

void RecommenderService::delete_session(const std::string& session_id) {
  std::lock_guard lock(mutex_);
  if (sessions_.erase(session_id) == 0) throw SessionNotFound("unknown session '" + session_id + "'");
}

std::size_t RecommenderService::evict_expired() {
  const auto now = clock_();
  std::lock_guard lock(mutex_);
  std::size_t evicted = 0;
  for (auto it = sessions_.begin(); it != sessions_.end();) {
    std::unique_lock session_lock(it->second->mutex, std::try_to_lock);
    // A session busy with a request is active by definition.
    if (session_lock.owns_lock() && now - it->second->last_active > config_.session_ttl) {
      session_lock.unlock();
      it = sessions_.erase(it);
      ++evicted;
    } else {
      ++it;
    }
  }
  return evicted;
}

std::size_t RecommenderService::session_count() const {
  std::lock_guard lock(mutex_);
  return sessions_.size();
}

// ---------------------------------------------------------------------------
// HTTP binding

namespace {

void reply(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void reply_error(httplib::Response& res, int status, const std::string& message) {
  reply(res, status, {{"error", message}});
}

json parse_body(const httplib::Request& req) {
  if (req.body.empty()) return json::object();
  json body = json::parse(req.body, nullptr, false);
  if (body.is_discarded() || !body.is_object()) throw InvalidRequest("body must be a JSON object");
  return body;
}

template <typename Handler>
httplib::Server::Handler guarded(Handler handler) {
  return [handler](const httplib::Request& req, httplib::Response& res) {
    try {
      handler(req, res);
    } catch (const SessionNotFound& e) {
      reply_error(res, 404, e.what());
    } catch (const InvalidRequest& e) {
      reply_error(res, 400, e.what());
    } catch (const json::exception& e) {
      reply_error(res, 400, e.what());
    } catch (const CapacityExceeded& e) {
      res.set_header("Retry-After", std::to_string(e.retry_after_seconds));
      reply_error(res, 503, e.what());
    } catch (const std::exception& e) {
      reply_error(res, 500, e.what());
    }
  };
}

}  // namespace

void register_routes(httplib::Server& server, RecommenderService& service) {
  server.set_default_headers({{"Access-Control-Allow-Origin", "*"},
                              {"Access-Control-Allow-Headers", "Content-Type"},
                              {"Access-Control-Allow-Methods", "GET, POST, DELETE, OPTIONS"}});
  server.Options(R"(/.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });

  server.Get("/health", guarded([&service](const httplib::Request&, httplib::Response& res) {
               const auto& catalog = service.pipeline().catalog();
               reply(res, 200,
                     {{"status", "ok"},
                      {"items", catalog.size()},
                      {"categories", catalog.vocabulary().names()},
                      {"sessions", service.session_count()},
                      {"top_k", service.config().top_k}});
             }));

  server.Post("/sessions", guarded([&service](const httplib::Request&, httplib::Response& res) {
                reply(res, 201, {{"session_id", service.create_session()}});
              }));

  server.Post(R"(/sessions/([0-9a-f]+)/messages)",
              guarded([&service](const httplib::Request& req, httplib::Response& res) {
                const json body = parse_body(req);
                if (!body.contains("text") || !body["text"].is_string())
                  throw InvalidRequest("field 'text' (string) is required");
                Sender sender = Sender::kSeeker;
                if (body.contains("sender")) {
                  const auto s = body["sender"].get<std::string>();
                  if (s == "recommender")
                    sender = Sender::kRecommender;
                  else if (s != "seeker")
                    throw InvalidRequest("sender must be 'seeker' or 'recommender'");
                }
                const auto turn = service.post_message(req.matches[1], body["text"], sender);
                reply(res, 200, turn.to_json());
              }));

  server.Post(R"(/sessions/([0-9a-f]+)/system-turns)",
              guarded([&service](const httplib::Request& req, httplib::Response& res) {
                const json body = parse_body(req);
                const std::string text = body.value("text", "");
                std::optional<ItemIndex> item;
                if (body.contains("accepted_item") && !body["accepted_item"].is_null()) {
                  if (!body["accepted_item"].is_number_unsigned())
                    throw InvalidRequest("accepted_item must be a non-negative item index");
                  item = body["accepted_item"].get<ItemIndex>();
                }
                const auto n = service.record_system_turn(req.matches[1], text, item);
                reply(res, 200, {{"history_length", n}});
              }));

  server.Get(R"(/sessions/([0-9a-f]+))",
             guarded([&service](const httplib::Request& req, httplib::Response& res) {
               reply(res, 200, service.session_json(req.matches[1]));
             }));

  server.Delete(R"(/sessions/([0-9a-f]+))",
                guarded([&service](const httplib::Request& req, httplib::Response& res) {
                  service.delete_session(req.matches[1]);
                  res.status = 204;
                }));
}

}  // namespace catrec
