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

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

namespace objexplore::cli {

/// Operator settings shared by all commands. Resolution order, lowest to
/// highest: built-in defaults, config file, OBJEXPLORE_<KEY> environment
/// variables, command-line flags.
struct RunConfig {
  std::filesystem::path catalog = "catalog";
  std::filesystem::path taxonomy;   // empty: built-in label table
  std::filesystem::path cache_dir;  // empty: <catalog>/cache
  std::filesystem::path state_dir;  // empty: <catalog>/service

  std::string collection_url;
  std::string collection_key;
  std::string collection_key_header = "X-Api-Key";
  std::filesystem::path collection_fixture;
  std::string object_type = "painting";

  std::string detector_url;
  std::int64_t detector_timeout_ms = 60000;
  double cutoff = 0.25;

  std::int64_t k_per_label = 100;
  std::int64_t min_side = 32;
  std::int64_t workers = 0;

  std::string host = "127.0.0.1";
  std::int64_t port = 8080;
  std::string provider = "mock";  // "mock" or an outpainting service base URL
  std::string provider_key;
  std::string provider_key_header = "Authorization";
  std::int64_t provider_timeout_ms = 60000;
  std::int64_t provider_max_side = 1024;
  std::int64_t session_ttl_hours = 24 * 7;
  std::int64_t generation_workers = 2;
  std::vector<std::string> home_examples;

  std::filesystem::path resolved_cache_dir() const;
  std::filesystem::path resolved_state_dir() const;
};

nlohmann::json to_json(const RunConfig& c);

using EnvLookup = std::function<std::optional<std::string>(const std::string&)>;

/// Parses a textual value (from the environment or a flag) for `key` using
/// the type of its default. Lists are comma separated.
nlohmann::json parse_setting(const std::string& key, const std::string& text);

/// Throws Error(kConfig) for unknown keys, wrong types or out-of-range values.
RunConfig resolve_config(const std::optional<std::filesystem::path>& file, const EnvLookup& env,
                         const nlohmann::json& flags);

std::string env_name(const std::string& key);

}  // namespace objexplore::cli
