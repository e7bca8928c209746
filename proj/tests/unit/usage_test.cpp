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

#include "objexplore/usage.hpp"

#include <chrono>

#include "gtest/gtest.h"
#include "objexplore/error.hpp"
#include "objexplore/sessions.hpp"
#include "test_util.hpp"

using namespace objexplore;
using testing_util::TempDir;

namespace {

SessionEvent ev(const std::string& sid, double t, EventKind k, const std::string& payload,
                std::optional<Category> c = std::nullopt) {
  return {sid, t, k, payload, c};
}

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected an error";
  return ErrorCode::kIo;
}

}  // namespace

TEST(Usage, SingleObjectVisit) {
  std::vector<SessionEvent> events{ev("s", 0, EventKind::kScreenEnter, "Object"),
                                   ev("s", 202, EventKind::kScreenLeave, "Object")};
  auto r = compute_usage(events);
  EXPECT_EQ(r.per_screen.at("Object").avg_seconds, 202.0);
  EXPECT_EQ(format_duration(202), "3 Minutes & 22 Seconds");
  EXPECT_EQ(format_duration(1), "1 Second");
}

TEST(Usage, FixtureMatchesHandComputedValues) {
  // s1: Home 30, Category 45, Object 202, Painting 123, three saves.
  // s2: Home 10, Category 30, Object 60, one unpaired leave, one unclosed enter.
  EventLog log(testing_util::fixture("events/usage_events.jsonl"));
  auto r = compute_usage(log.events());
  EXPECT_EQ(r.events, 19u);
  EXPECT_EQ(r.sessions, 2u);
  EXPECT_EQ(r.per_screen.at("Home").avg_seconds, 20.0);
  EXPECT_EQ(r.per_screen.at("Category").avg_seconds, 37.5);
  EXPECT_EQ(r.per_screen.at("Object").avg_seconds, 131.0);
  EXPECT_EQ(r.per_screen.at("Painting").avg_seconds, 123.0);
  EXPECT_EQ(r.per_screen.at("Painting").sessions, 1u);
  EXPECT_EQ(r.per_screen.count("Canvas"), 0u);
  EXPECT_EQ(r.category_visits, (std::map<Category, std::size_t>{{Category::kOccultism, 1},
                                                                 {Category::kAnimal, 2}}));
  EXPECT_EQ(r.unpaired_leaves, 1u);
  EXPECT_EQ(r.unclosed_enters, 1u);
  EXPECT_EQ(r.saves_per_session.mean, 1.5);
  EXPECT_EQ(r.saves_per_session.median, 1.5);
  EXPECT_EQ(r.saves_per_session.max, 3.0);
}

TEST(Usage, CategoryVisitsAcrossSessions) {
  std::vector<SessionEvent> events;
  for (std::string sid : {"a", "b"}) {
    for (int i = 0; i < 6; ++i) {
      events.push_back(ev(sid, i * 10, EventKind::kScreenEnter, "Category", Category::kFood));
      events.push_back(ev(sid, i * 10 + 5, EventKind::kScreenLeave, "Category"));
    }
  }
  auto r = compute_usage(events);
  EXPECT_EQ(r.category_visits.at(Category::kFood), 12u);
  EXPECT_EQ(r.per_screen.at("Category").visits, 12u);
  EXPECT_EQ(r.per_screen.at("Category").avg_seconds, 30.0);
}

TEST(Usage, EmptyLog) {
  auto r = compute_usage({});
  EXPECT_EQ(r.events, 0u);
  EXPECT_TRUE(r.per_screen.empty());
  EXPECT_TRUE(r.category_visits.empty());
  EXPECT_EQ(r.unpaired_leaves + r.unclosed_enters, 0u);
}

TEST(Usage, OutOfOrderArrivalIsSortedByTimestamp) {
  std::vector<SessionEvent> events{ev("s", 50, EventKind::kScreenLeave, "Painting"),
                                   ev("s", 20, EventKind::kScreenEnter, "Painting")};
  auto r = compute_usage(events);
  EXPECT_EQ(r.per_screen.at("Painting").avg_seconds, 30.0);
  EXPECT_EQ(r.unpaired_leaves, 0u);
}

TEST(Events, ParseRejectsMalformed) {
  using nlohmann::json;
  auto bad = [](const char* text) {
    return code_of([&] { parse_event(json::parse(text)); });
  };
  EXPECT_EQ(bad(R"({"timestamp":1,"kind":"screen_enter","payload":"Home"})"),
            ErrorCode::kMalformedEvent);
  EXPECT_EQ(bad(R"({"session_id":"s","kind":"screen_enter","payload":"Home"})"),
            ErrorCode::kMalformedEvent);
  EXPECT_EQ(bad(R"({"session_id":"s","timestamp":1,"kind":"jump","payload":"Home"})"),
            ErrorCode::kMalformedEvent);
  EXPECT_EQ(bad(R"({"session_id":"s","timestamp":1,"kind":"screen_enter","payload":"Lobby"})"),
            ErrorCode::kMalformedEvent);
  EXPECT_EQ(bad(R"({"session_id":"s","timestamp":1,"kind":"save_object"})"),
            ErrorCode::kMalformedEvent);
  EXPECT_EQ(bad(R"({"session_id":"s","timestamp":1,"kind":"screen_enter","payload":"Home",
                   "category":"Dinosaurs"})"),
            ErrorCode::kMalformedEvent);
  auto e = parse_event(json::parse(
      R"({"session_id":"s","timestamp":1.5,"kind":"screen_enter","payload":"Category","category":"Food"})"));
  EXPECT_EQ(parse_event(to_json(e)), e);
}

TEST(Events, LogIsReproducibleAfterReopen) {
  TempDir dir;
  UsageReport before;
  {
    EventLog log(dir / "events.jsonl");
    log.append(ev("s", 0, EventKind::kScreenEnter, "Canvas"));
    log.append(ev("s", 90, EventKind::kScreenLeave, "Canvas"));
    log.append(ev("s", 91, EventKind::kGenerateImage, "job1"));
    before = compute_usage(log.events());
  }
  EventLog reopened(dir / "events.jsonl");
  EXPECT_EQ(to_json(compute_usage(reopened.events())), to_json(before));
  EXPECT_EQ(reopened.events().size(), 3u);
}

TEST(Sessions, FavoritesAreIdempotentOrderedAndIsolated) {
  TempDir dir;
  SessionStore store(dir / "sessions.jsonl", std::chrono::hours(1));
  auto a = store.create();
  auto b = store.create();
  EXPECT_NE(a.id, b.id);
  store.add_favorite(a.id, "x");
  store.add_favorite(a.id, "x");
  EXPECT_EQ(store.favorites(a.id), std::vector<std::string>{"x"});
  EXPECT_TRUE(store.favorites(b.id).empty());
  for (std::string id : {"1", "2", "3", "4", "5"}) store.add_favorite(b.id, id);
  store.remove_favorite(a.id, "x");
  store.remove_favorite(a.id, "x");
  EXPECT_TRUE(store.favorites(a.id).empty());
  EXPECT_EQ(store.favorites(b.id), (std::vector<std::string>{"1", "2", "3", "4", "5"}));
  EXPECT_EQ(code_of([&] { store.favorites("nope"); }), ErrorCode::kUnknownSession);
}

TEST(Sessions, JournalReplayAndTtl) {
  TempDir dir;
  auto now = std::chrono::system_clock::time_point(std::chrono::hours(1000));
  WallClock clock = [&] { return now; };
  std::string id;
  {
    SessionStore store(dir / "sessions.jsonl", std::chrono::hours(24), clock);
    id = store.create().id;
    store.add_favorite(id, "p");
    store.add_favorite(id, "q");
    store.remove_favorite(id, "p");
  }
  now += std::chrono::hours(23);
  {
    SessionStore store(dir / "sessions.jsonl", std::chrono::hours(24), clock);
    EXPECT_EQ(store.favorites(id), std::vector<std::string>{"q"});
    now += std::chrono::hours(1);
    EXPECT_EQ(code_of([&] { store.get(id); }), ErrorCode::kUnknownSession);
  }
}
