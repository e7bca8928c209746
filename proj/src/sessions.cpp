// Copyright 2026 The objexplore Authors
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

#include "objexplore/sessions.hpp"

#include <algorithm>

#include "json.hpp"
#include "objexplore/digest.hpp"
#include "objexplore/error.hpp"
#include "objexplore/log.hpp"
#include "util.hpp"

namespace objexplore {

using nlohmann::json;

namespace {

std::int64_t to_millis(std::chrono::system_clock::time_point tp) {
  return std::chrono::duration_cast<std::chrono::milliseconds>(tp.time_since_epoch()).count();
}

}  // namespace

SessionStore::SessionStore(std::filesystem::path journal, std::chrono::seconds ttl,
                           WallClock clock)
    : path_(std::move(journal)), ttl_(ttl), clock_(std::move(clock)) {
  replay();
}

void SessionStore::replay() {
  if (!std::filesystem::exists(path_)) return;
  const std::string text = detail::read_text(path_);
  std::size_t line_no = 0;
  for (auto line : detail::split_lines(text)) {
    ++line_no;
    if (detail::trim(line).empty()) continue;
    try {
      json j = json::parse(line);
      const std::string op = j.at("op");
      const std::string id = j.at("session_id");
      if (op == "create") {
        auto e = std::make_unique<Entry>();
        e->session.id = id;
        e->session.created_at = std::chrono::system_clock::time_point(
            std::chrono::milliseconds(j.at("created_at_ms").get<std::int64_t>()));
        sessions_[id] = std::move(e);
        continue;
      }
      auto it = sessions_.find(id);
      if (it == sessions_.end()) continue;
      auto& favs = it->second->session.favorites;
      const std::string det = j.at("detection_id");
      auto pos = std::find(favs.begin(), favs.end(), det);
      if (op == "save" && pos == favs.end()) favs.push_back(det);
      if (op == "unsave" && pos != favs.end()) favs.erase(pos);
    } catch (const json::exception& e) {
      logger()->warn("{}:{}: skipping unreadable session record: {}", path_.string(), line_no,
                     e.what());
    }
  }
  const auto now = clock_();
  std::erase_if(sessions_, [&](const auto& kv) { return kv.second->session.created_at + ttl_ <= now; });
}

void SessionStore::journal(const std::string& line) {
  std::lock_guard lock(journal_mu_);
  detail::append_line(path_, line);
}

Session SessionStore::create() {
  auto e = std::make_unique<Entry>();
  e->session.id = random_hex(16);
  e->session.created_at = std::chrono::system_clock::time_point(
      std::chrono::milliseconds(to_millis(clock_())));
  Session copy = e->session;
  journal(json{{"op", "create"},
               {"session_id", copy.id},
               {"created_at_ms", to_millis(copy.created_at)}}
              .dump());
  std::unique_lock lock(map_mu_);
  sessions_[copy.id] = std::move(e);
  return copy;
}

SessionStore::Entry& SessionStore::live_entry(const std::string& id) const {
  std::shared_lock lock(map_mu_);
  auto it = sessions_.find(id);
  if (it == sessions_.end() || it->second->session.created_at + ttl_ <= clock_()) {
    throw Error(ErrorCode::kUnknownSession, "unknown or expired session " + id);
  }
  return *it->second;
}

Session SessionStore::get(const std::string& id) const {
  Entry& e = live_entry(id);
  std::lock_guard lock(e.mu);
  return e.session;
}

std::vector<std::string> SessionStore::favorites(const std::string& id) const {
  return get(id).favorites;
}

bool SessionStore::is_favorite(const std::string& id, const std::string& detection_id) const {
  const auto favs = favorites(id);
  return std::find(favs.begin(), favs.end(), detection_id) != favs.end();
}

std::vector<std::string> SessionStore::add_favorite(const std::string& id,
                                                    const std::string& detection_id) {
  Entry& e = live_entry(id);
  std::lock_guard lock(e.mu);
  auto& favs = e.session.favorites;
  if (std::find(favs.begin(), favs.end(), detection_id) == favs.end()) {
    journal(json{{"op", "save"}, {"session_id", id}, {"detection_id", detection_id}}.dump());
    favs.push_back(detection_id);
  }
  return favs;
}

std::vector<std::string> SessionStore::remove_favorite(const std::string& id,
                                                       const std::string& detection_id) {
  Entry& e = live_entry(id);
  std::lock_guard lock(e.mu);
  auto& favs = e.session.favorites;
  auto pos = std::find(favs.begin(), favs.end(), detection_id);
  if (pos != favs.end()) {
    journal(json{{"op", "unsave"}, {"session_id", id}, {"detection_id", detection_id}}.dump());
    favs.erase(pos);
  }
  return favs;
}

}  // namespace objexplore
