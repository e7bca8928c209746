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

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "objexplore/error.hpp"
#include "objexplore/log.hpp"
#include "util.hpp"

namespace objexplore {

using nlohmann::json;

namespace {

constexpr std::pair<EventKind, std::string_view> kKinds[] = {
    {EventKind::kScreenEnter, "screen_enter"},   {EventKind::kScreenLeave, "screen_leave"},
    {EventKind::kSaveObject, "save_object"},     {EventKind::kUnsaveObject, "unsave_object"},
    {EventKind::kGenerateImage, "generate_image"},
};

[[noreturn]] void malformed(const std::string& why) {
  throw Error(ErrorCode::kMalformedEvent, why);
}

Distribution summarize(std::vector<double> values) {
  Distribution d;
  d.count = values.size();
  if (values.empty()) return d;
  std::sort(values.begin(), values.end());
  double sum = 0;
  for (double v : values) sum += v;
  d.mean = sum / static_cast<double>(values.size());
  const std::size_t mid = values.size() / 2;
  d.median = values.size() % 2 ? values[mid] : (values[mid - 1] + values[mid]) / 2.0;
  d.min = values.front();
  d.max = values.back();
  return d;
}

}  // namespace

std::string_view to_string(EventKind k) {
  for (const auto& [kind, name] : kKinds) {
    if (kind == k) return name;
  }
  return "unknown";
}

bool is_screen(std::string_view name) {
  return std::find(std::begin(kScreens), std::end(kScreens), name) != std::end(kScreens);
}

SessionEvent parse_event(const json& j) {
  if (!j.is_object()) malformed("event must be an object");
  SessionEvent e;
  auto sid = j.find("session_id");
  if (sid == j.end() || !sid->is_string() || sid->get<std::string>().empty()) {
    malformed("session_id must be a non-empty string");
  }
  e.session_id = *sid;
  auto ts = j.find("timestamp");
  if (ts == j.end() || !ts->is_number() || !std::isfinite(ts->get<double>())) {
    malformed("timestamp must be a finite number of seconds");
  }
  e.timestamp = *ts;
  auto kind = j.find("kind");
  if (kind == j.end() || !kind->is_string()) malformed("kind must be a string");
  bool known = false;
  for (const auto& [k, name] : kKinds) {
    if (name == kind->get<std::string>()) {
      e.kind = k;
      known = true;
    }
  }
  if (!known) malformed("unknown kind '" + kind->get<std::string>() + "'");
  auto payload = j.find("payload");
  if (payload != j.end() && !payload->is_string()) malformed("payload must be a string");
  if (payload != j.end()) e.payload = *payload;

  const bool screen_event = e.kind == EventKind::kScreenEnter || e.kind == EventKind::kScreenLeave;
  if (screen_event && !is_screen(e.payload)) malformed("unknown screen '" + e.payload + "'");
  if ((e.kind == EventKind::kSaveObject || e.kind == EventKind::kUnsaveObject) &&
      e.payload.empty()) {
    malformed("save events need the object id as payload");
  }
  auto cat = j.find("category");
  if (cat != j.end() && !cat->is_null()) {
    if (!cat->is_string()) malformed("category must be a string");
    auto c = parse_category(cat->get<std::string>());
    if (!c) malformed("unknown category '" + cat->get<std::string>() + "'");
    e.category = *c;
  }
  return e;
}

json to_json(const SessionEvent& e) {
  json j{{"session_id", e.session_id},
         {"timestamp", e.timestamp},
         {"kind", to_string(e.kind)},
         {"payload", e.payload}};
  if (e.category) j["category"] = to_string(*e.category);
  return j;
}

EventLog::EventLog(std::filesystem::path path) : path_(std::move(path)) {
  if (!std::filesystem::exists(path_)) return;
  const std::string text = detail::read_text(path_);
  std::size_t line_no = 0;
  for (auto line : detail::split_lines(text)) {
    ++line_no;
    if (detail::trim(line).empty()) continue;
    try {
      events_.push_back(parse_event(json::parse(line)));
    } catch (const std::exception& e) {
      logger()->warn("{}:{}: skipping unreadable event: {}", path_.string(), line_no, e.what());
    }
  }
}

void EventLog::append(const SessionEvent& e) {
  const std::string line = to_json(e).dump();
  std::lock_guard lock(mu_);
  detail::append_line(path_, line);
  events_.push_back(e);
}

std::vector<SessionEvent> EventLog::events() const {
  std::lock_guard lock(mu_);
  return events_;
}

UsageReport compute_usage(std::span<const SessionEvent> events) {
  UsageReport r;
  r.events = events.size();

  std::map<std::string, std::vector<std::size_t>> by_session;
  for (std::size_t i = 0; i < events.size(); ++i) by_session[events[i].session_id].push_back(i);
  r.sessions = by_session.size();

  std::map<std::string, std::vector<double>> dwell_per_screen;  // one entry per session
  std::vector<double> saves;
  for (auto& [sid, idx] : by_session) {
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
      return events[a].timestamp < events[b].timestamp;
    });
    std::map<std::string, double> open;  // screen -> enter time
    std::map<std::string, double> total;
    std::size_t session_saves = 0;
    for (std::size_t i : idx) {
      const SessionEvent& e = events[i];
      switch (e.kind) {
        case EventKind::kScreenEnter:
          if (open.count(e.payload)) ++r.unclosed_enters;
          open[e.payload] = e.timestamp;
          if (e.category) ++r.category_visits[*e.category];
          break;
        case EventKind::kScreenLeave: {
          auto it = open.find(e.payload);
          if (it == open.end()) {
            ++r.unpaired_leaves;
            break;
          }
          total[e.payload] += e.timestamp - it->second;
          ++r.per_screen[e.payload].visits;
          open.erase(it);
          break;
        }
        case EventKind::kSaveObject:
          ++session_saves;
          break;
        default:
          break;
      }
    }
    r.unclosed_enters += open.size();
    for (const auto& [screen, secs] : total) dwell_per_screen[screen].push_back(secs);
    saves.push_back(static_cast<double>(session_saves));
  }
  for (const auto& [screen, totals] : dwell_per_screen) {
    double sum = 0;
    for (double t : totals) sum += t;
    ScreenUsage& u = r.per_screen[screen];
    u.sessions = totals.size();
    u.avg_seconds = sum / static_cast<double>(totals.size());
  }
  r.saves_per_session = summarize(std::move(saves));
  return r;
}

json to_json(const UsageReport& r) {
  json screens = json::object();
  for (const auto& [name, u] : r.per_screen) {
    screens[name] = {{"avg_seconds", u.avg_seconds}, {"sessions", u.sessions}, {"visits", u.visits}};
  }
  json cats = json::object();
  for (const auto& [c, n] : r.category_visits) cats[std::string(to_string(c))] = n;
  const auto& d = r.saves_per_session;
  return json{{"events", r.events},
              {"sessions", r.sessions},
              {"per_screen", screens},
              {"category_visits", cats},
              {"saves_per_session",
               {{"count", d.count}, {"mean", d.mean}, {"median", d.median}, {"min", d.min},
                {"max", d.max}}},
              {"warnings",
               {{"unpaired_leaves", r.unpaired_leaves}, {"unclosed_enters", r.unclosed_enters}}}};
}

std::string format_duration(double seconds) {
  const long long total = std::llround(seconds);
  const long long m = total / 60, s = total % 60;
  std::ostringstream out;
  if (m > 0) out << m << (m == 1 ? " Minute & " : " Minutes & ");
  out << s << (s == 1 ? " Second" : " Seconds");
  return out.str();
}

std::string format_usage(const UsageReport& r) {
  std::ostringstream out;
  out << r.events << " events from " << r.sessions << " sessions\n\n";
  out << "Average time per screen\n";
  for (auto name : kScreens) {
    auto it = r.per_screen.find(std::string(name));
    if (it == r.per_screen.end()) continue;
    out << "  " << name << ": " << format_duration(it->second.avg_seconds) << " ("
        << it->second.sessions << " sessions)\n";
  }
  out << "\nVisits per category\n";
  std::vector<std::pair<Category, std::size_t>> cats(r.category_visits.begin(),
                                                     r.category_visits.end());
  std::stable_sort(cats.begin(), cats.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  for (const auto& [c, n] : cats) out << "  " << to_string(c) << ": " << n << "\n";
  const auto& d = r.saves_per_session;
  out << "\nSaved objects per session: mean " << d.mean << ", median " << d.median << ", range "
      << d.min << "-" << d.max << "\n";
  if (r.unpaired_leaves || r.unclosed_enters) {
    out << "warnings: " << r.unpaired_leaves << " unpaired leaves, " << r.unclosed_enters
        << " unclosed enters\n";
  }
  return out.str();
}

}  // namespace objexplore
