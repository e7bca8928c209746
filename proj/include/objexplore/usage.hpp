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

#include <cstddef>
#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "objexplore/taxonomy.hpp"

namespace objexplore {

enum class EventKind { kScreenEnter, kScreenLeave, kSaveObject, kUnsaveObject, kGenerateImage };

std::string_view to_string(EventKind k);

inline constexpr std::string_view kScreens[] = {"Home",    "Category",  "Object",
                                                "Painting", "Favorites", "Canvas"};

bool is_screen(std::string_view name);

struct SessionEvent {
  std::string session_id;
  double timestamp = 0;  // seconds, any epoch shared by the session
  EventKind kind = EventKind::kScreenEnter;
  std::string payload;  // screen name for enter/leave, otherwise an object or job id
  std::optional<Category> category;

  friend bool operator==(const SessionEvent&, const SessionEvent&) = default;
};

/// Throws Error(kMalformedEvent).
SessionEvent parse_event(const nlohmann::json& j);
nlohmann::json to_json(const SessionEvent& e);

/// Append-only JSONL event log, loaded into memory on open.
class EventLog {
 public:
  explicit EventLog(std::filesystem::path path);

  void append(const SessionEvent& e);
  std::vector<SessionEvent> events() const;

 private:
  std::filesystem::path path_;
  mutable std::mutex mu_;
  std::vector<SessionEvent> events_;
};

struct Distribution {
  std::size_t count = 0;
  double mean = 0;
  double median = 0;
  double min = 0;
  double max = 0;
};

struct ScreenUsage {
  double avg_seconds = 0;  // mean over visiting sessions of their total dwell
  std::size_t sessions = 0;
  std::size_t visits = 0;
};

struct UsageReport {
  std::size_t events = 0;
  std::size_t sessions = 0;
  std::map<std::string, ScreenUsage> per_screen;
  std::map<Category, std::size_t> category_visits;
  Distribution saves_per_session;
  std::size_t unpaired_leaves = 0;
  std::size_t unclosed_enters = 0;
};

/// Pairs each leave with the open enter of the same screen in the same
/// session, in timestamp order (log order breaks ties).
UsageReport compute_usage(std::span<const SessionEvent> events);

nlohmann::json to_json(const UsageReport& r);
std::string format_usage(const UsageReport& r);

/// "3 Minutes & 22 Seconds".
std::string format_duration(double seconds);

}  // namespace objexplore
