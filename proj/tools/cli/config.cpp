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

#include "config.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>

#include "objexplore/error.hpp"

namespace objexplore::cli {

using nlohmann::json;

namespace {

[[noreturn]] void bad(const std::string& msg) { throw Error(ErrorCode::kConfig, msg); }

template <typename T>
void take(const json& j, const char* key, T& out) {
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception&) {
    bad(std::string("setting '") + key + "' has the wrong type");
  }
}

void take_path(const json& j, const char* key, std::filesystem::path& out) {
  std::string s;
  take(j, key, s);
  out = s;
}

void check(bool ok, const std::string& msg) {
  if (!ok) bad(msg);
}

}  // namespace

std::filesystem::path RunConfig::resolved_cache_dir() const {
  return cache_dir.empty() ? catalog / "cache" : cache_dir;
}

std::filesystem::path RunConfig::resolved_state_dir() const {
  return state_dir.empty() ? catalog / "service" : state_dir;
}

json to_json(const RunConfig& c) {
  return json{{"catalog", c.catalog.string()},
              {"taxonomy", c.taxonomy.string()},
              {"cache_dir", c.cache_dir.string()},
              {"state_dir", c.state_dir.string()},
              {"collection_url", c.collection_url},
              {"collection_key", c.collection_key},
              {"collection_key_header", c.collection_key_header},
              {"collection_fixture", c.collection_fixture.string()},
              {"object_type", c.object_type},
              {"detector_url", c.detector_url},
              {"detector_timeout_ms", c.detector_timeout_ms},
              {"cutoff", c.cutoff},
              {"k_per_label", c.k_per_label},
              {"min_side", c.min_side},
              {"workers", c.workers},
              {"host", c.host},
              {"port", c.port},
              {"provider", c.provider},
              {"provider_key", c.provider_key},
              {"provider_key_header", c.provider_key_header},
              {"provider_timeout_ms", c.provider_timeout_ms},
              {"provider_max_side", c.provider_max_side},
              {"session_ttl_hours", c.session_ttl_hours},
              {"generation_workers", c.generation_workers},
              {"home_examples", c.home_examples}};
}

std::string env_name(const std::string& key) {
  std::string out = "OBJEXPLORE_";
  for (char ch : key) out += static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
  return out;
}

json parse_setting(const std::string& key, const std::string& text) {
  static const json defaults = to_json(RunConfig{});
  auto it = defaults.find(key);
  if (it == defaults.end()) bad("unknown setting '" + key + "'");
  try {
    std::size_t used = 0;
    if (it->is_number_integer()) {
      long long v = std::stoll(text, &used);
      if (used != text.size()) throw std::invalid_argument(text);
      return v;
    }
    if (it->is_number_float()) {
      double v = std::stod(text, &used);
      if (used != text.size()) throw std::invalid_argument(text);
      return v;
    }
  } catch (const std::exception&) {
    bad("setting '" + key + "' expects a number, got '" + text + "'");
  }
  if (it->is_array()) {
    json list = json::array();
    std::size_t start = 0;
    while (start <= text.size()) {
      std::size_t comma = text.find(',', start);
      std::string item = text.substr(start, comma == std::string::npos ? std::string::npos
                                                                       : comma - start);
      if (!item.empty()) list.push_back(item);
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    return list;
  }
  return text;
}

RunConfig resolve_config(const std::optional<std::filesystem::path>& file, const EnvLookup& env,
                         const json& flags) {
  json merged = to_json(RunConfig{});
  if (file) {
    std::ifstream in(*file);
    if (!in) bad("cannot read config file " + file->string());
    json doc = json::parse(in, nullptr, false);
    if (doc.is_discarded() || !doc.is_object()) bad(file->string() + " is not a JSON object");
    for (auto& [k, v] : doc.items()) {
      if (!merged.contains(k)) bad("unknown setting '" + k + "' in " + file->string());
      merged[k] = v;
    }
  }
  for (auto& [k, v] : merged.items()) {
    if (auto text = env(env_name(k))) v = parse_setting(k, *text);
  }
  for (auto& [k, v] : flags.items()) {
    if (!merged.contains(k)) bad("unknown setting '" + k + "'");
    merged[k] = v;
  }

  RunConfig c;
  take_path(merged, "catalog", c.catalog);
  take_path(merged, "taxonomy", c.taxonomy);
  take_path(merged, "cache_dir", c.cache_dir);
  take_path(merged, "state_dir", c.state_dir);
  take(merged, "collection_url", c.collection_url);
  take(merged, "collection_key", c.collection_key);
  take(merged, "collection_key_header", c.collection_key_header);
  take_path(merged, "collection_fixture", c.collection_fixture);
  take(merged, "object_type", c.object_type);
  take(merged, "detector_url", c.detector_url);
  take(merged, "detector_timeout_ms", c.detector_timeout_ms);
  take(merged, "cutoff", c.cutoff);
  take(merged, "k_per_label", c.k_per_label);
  take(merged, "min_side", c.min_side);
  take(merged, "workers", c.workers);
  take(merged, "host", c.host);
  take(merged, "port", c.port);
  take(merged, "provider", c.provider);
  take(merged, "provider_key", c.provider_key);
  take(merged, "provider_key_header", c.provider_key_header);
  take(merged, "provider_timeout_ms", c.provider_timeout_ms);
  take(merged, "provider_max_side", c.provider_max_side);
  take(merged, "session_ttl_hours", c.session_ttl_hours);
  take(merged, "generation_workers", c.generation_workers);
  take(merged, "home_examples", c.home_examples);

  check(!c.catalog.empty(), "catalog path is empty");
  check(c.cutoff >= 0.0 && c.cutoff <= 1.0, "cutoff must lie in [0, 1]");
  check(c.k_per_label >= 1, "k_per_label must be at least 1");
  check(c.min_side >= 1, "min_side must be at least 1");
  check(c.workers >= 0, "workers must not be negative");
  check(c.port >= 0 && c.port <= 65535, "port must lie in [0, 65535]");
  check(c.detector_timeout_ms > 0 && c.provider_timeout_ms > 0, "timeouts must be positive");
  check(c.provider_max_side >= 1, "provider_max_side must be at least 1");
  check(c.session_ttl_hours >= 1, "session_ttl_hours must be at least 1");
  check(c.generation_workers >= 1, "generation_workers must be at least 1");
  check(!c.provider.empty(), "provider must be 'mock' or a URL");
  return c;
}

}  // namespace objexplore::cli
