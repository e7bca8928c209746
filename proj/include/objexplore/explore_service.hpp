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
#include <condition_variable>
#include <deque>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"
#include "objexplore/canvas.hpp"
#include "objexplore/catalog.hpp"
#include "objexplore/error.hpp"
#include "objexplore/sessions.hpp"
#include "objexplore/usage.hpp"

namespace httplib {
class Server;
}

namespace objexplore {

struct ServiceConfig {
  std::filesystem::path state_dir;  // sessions.jsonl and events.jsonl
  std::chrono::seconds session_ttl = kDefaultSessionTtl;
  std::vector<std::string> home_examples;  // detection ids for the Home slider
  unsigned generation_workers = 2;
  std::size_t default_page_size = 24;
  std::size_t max_page_size = 100;
  WallClock clock = system_now;
};

enum class JobStatus { kQueued, kRunning, kDone, kFailed };
std::string_view to_string(JobStatus s);

/// HTTP status used for an error code.
int http_status(ErrorCode code);
nlohmann::json error_document(ErrorCode code, const std::string& message);

/// The exploration API. Each document method throws Error; mount() exposes
/// them over HTTP with error bodies {"error": {"code", "message"}}.
class ExploreService {
 public:
  ExploreService(Catalog& catalog, std::shared_ptr<OutpaintProvider> provider,
                 ServiceConfig config);
  ~ExploreService();

  ExploreService(const ExploreService&) = delete;
  ExploreService& operator=(const ExploreService&) = delete;

  nlohmann::json categories() const;
  nlohmann::json objects(const std::map<std::string, std::string>& params) const;
  nlohmann::json painting(const std::string& artwork_id) const;
  nlohmann::json home() const;

  nlohmann::json create_session();
  nlohmann::json favorites(const std::string& session_id) const;
  nlohmann::json add_favorite(const std::string& session_id, const std::string& detection_id);
  nlohmann::json remove_favorite(const std::string& session_id, const std::string& detection_id);

  nlohmann::json post_events(const nlohmann::json& body);
  nlohmann::json usage_report() const;

  nlohmann::json submit_canvas(const std::string& session_id, const nlohmann::json& body);
  nlohmann::json generation(const std::string& job_id) const;

  std::filesystem::path crop_file(const std::string& detection_id) const;
  std::filesystem::path generation_file(const std::string& job_id) const;
  std::filesystem::path painting_image_file(const std::string& artwork_id) const;

  void mount(httplib::Server& server);

  /// Blocks until no generation job is queued or running.
  bool wait_idle(std::chrono::milliseconds timeout);

 private:
  struct Job {
    std::string id;
    std::string session_id;
    CanvasComposition composition;
    JobStatus status = JobStatus::kQueued;
    std::optional<ErrorCode> error_code;
    std::string error_message;
    std::vector<std::string> used_detection_ids;
    std::string created_at;
  };

  nlohmann::json object_document(const Detection& d,
                                 const std::optional<ObjectCrop>& crop) const;
  nlohmann::json job_document(const Job& job) const;
  void worker_loop(std::stop_token stop);
  void run_job(const std::string& job_id);

  Catalog& catalog_;
  std::shared_ptr<OutpaintProvider> provider_;
  ServiceConfig config_;
  SessionStore sessions_;
  EventLog events_;

  mutable std::mutex jobs_mu_;
  std::condition_variable_any jobs_cv_;
  std::condition_variable idle_cv_;
  std::map<std::string, Job> jobs_;
  std::deque<std::string> queue_;
  std::set<std::string> active_sessions_;
  std::vector<std::jthread> workers_;
};

}  // namespace objexplore
