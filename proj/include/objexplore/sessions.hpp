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

#pragma once

#include <chrono>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <shared_mutex>
#include <string>
#include <vector>

namespace objexplore {

using WallClock = std::function<std::chrono::system_clock::time_point()>;

inline std::chrono::system_clock::time_point system_now() {
  return std::chrono::system_clock::now();
}

inline constexpr std::chrono::hours kDefaultSessionTtl{24 * 7};

struct Session {
  std::string id;
  std::chrono::system_clock::time_point created_at;
  std::vector<std::string> favorites;  // save order, no duplicates
};

/// Anonymous sessions with favorites, journaled to a JSONL file and replayed
/// on open. A session expires `ttl` after creation.
class SessionStore {
 public:
  SessionStore(std::filesystem::path journal, std::chrono::seconds ttl,
               WallClock clock = system_now);

  SessionStore(const SessionStore&) = delete;
  SessionStore& operator=(const SessionStore&) = delete;

  Session create();

  // All of these throw Error(kUnknownSession) for unknown or expired ids.
  Session get(const std::string& id) const;
  std::vector<std::string> favorites(const std::string& id) const;
  bool is_favorite(const std::string& id, const std::string& detection_id) const;
  std::vector<std::string> add_favorite(const std::string& id, const std::string& detection_id);
  std::vector<std::string> remove_favorite(const std::string& id,
                                           const std::string& detection_id);

  std::chrono::seconds ttl() const { return ttl_; }
  std::chrono::system_clock::time_point now() const { return clock_(); }

 private:
  struct Entry {
    Session session;
    mutable std::mutex mu;
  };

  void replay();
  Entry& live_entry(const std::string& id) const;
  void journal(const std::string& line);

  std::filesystem::path path_;
  std::chrono::seconds ttl_;
  WallClock clock_;
  mutable std::shared_mutex map_mu_;
  std::map<std::string, std::unique_ptr<Entry>> sessions_;
  std::mutex journal_mu_;
};

}  // namespace objexplore
