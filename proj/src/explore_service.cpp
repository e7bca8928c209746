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

#include "objexplore/explore_service.hpp"

#include <algorithm>

#include "httplib.h"
#include "objexplore/digest.hpp"
#include "objexplore/log.hpp"
#include "util.hpp"

namespace objexplore {

using nlohmann::json;

std::string_view to_string(JobStatus s) {
  switch (s) {
    case JobStatus::kQueued: return "queued";
    case JobStatus::kRunning: return "running";
    case JobStatus::kDone: return "done";
    case JobStatus::kFailed: return "failed";
  }
  return "unknown";
}

int http_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::kNotFound:
    case ErrorCode::kUnknownSession:
      return 404;
    case ErrorCode::kNotFavorited:
      return 422;
    case ErrorCode::kGenerationInProgress:
    case ErrorCode::kConflictingWrite:
      return 409;
    case ErrorCode::kCategoryRequired:
    case ErrorCode::kInvalidCursor:
    case ErrorCode::kInvalidArgument:
    case ErrorCode::kUnknownLabel:
    case ErrorCode::kUnknownCategory:
    case ErrorCode::kLabelCategoryMismatch:
    case ErrorCode::kMalformedEvent:
    case ErrorCode::kMalformedDocument:
    case ErrorCode::kInvalidComposition:
    case ErrorCode::kNothingPlaced:
    case ErrorCode::kOutOfBounds:
      return 400;
    default:
      return 500;
  }
}

json error_document(ErrorCode code, const std::string& message) {
  return json{{"error", {{"code", to_string(code)}, {"message", message}}}};
}

namespace {

json box_json(const BoundingBox& b) { return json::array({b.x_min, b.y_min, b.x_max, b.y_max}); }

std::size_t parse_page_size(const std::string& text, std::size_t max) {
  std::size_t value = 0;
  bool ok = !text.empty() && text.size() <= 6 &&
            std::all_of(text.begin(), text.end(), [](char c) { return c >= '0' && c <= '9'; });
  if (ok) value = std::stoul(text);
  if (!ok || value == 0 || value > max) {
    throw Error(ErrorCode::kInvalidArgument,
                "page_size must be an integer in [1, " + std::to_string(max) + "]");
  }
  return value;
}

}  // namespace

ExploreService::ExploreService(Catalog& catalog, std::shared_ptr<OutpaintProvider> provider,
                               ServiceConfig config)
    : catalog_(catalog),
      provider_(std::move(provider)),
      config_(std::move(config)),
      sessions_(config_.state_dir / "sessions.jsonl", config_.session_ttl, config_.clock),
      events_(config_.state_dir / "events.jsonl") {
  const unsigned n = std::max(1u, config_.generation_workers);
  for (unsigned i = 0; i < n; ++i) {
    workers_.emplace_back([this](std::stop_token st) { worker_loop(st); });
  }
}

ExploreService::~ExploreService() {
  for (auto& w : workers_) w.request_stop();
  jobs_cv_.notify_all();
  workers_.clear();
}

json ExploreService::object_document(const Detection& d,
                                     const std::optional<ObjectCrop>& crop) const {
  json j{{"detection_id", d.id},
         {"label", d.label},
         {"category", d.category ? json(to_string(*d.category)) : json(nullptr)},
         {"confidence", d.confidence},
         {"artwork_id", d.artwork_id},
         {"box", box_json(d.box)}};
  if (crop) {
    j["crop"] = {{"url", "/crops/" + d.id}, {"width", crop->width}, {"height", crop->height}};
  } else {
    j["crop"] = nullptr;
  }
  return j;
}

json ExploreService::categories() const {
  json list = json::array();
  for (Category c : catalog_.taxonomy().categories()) {
    auto top = catalog_.top_object(c);
    list.push_back({{"category", to_string(c)},
                    {"count", catalog_.count_objects(c)},
                    {"representative",
                     top ? object_document(top->detection, top->crop) : json(nullptr)}});
  }
  return json{{"categories", list}};
}

json ExploreService::objects(const std::map<std::string, std::string>& params) const {
  ObjectQuery q;
  auto param = [&](const char* k) -> const std::string* {
    auto it = params.find(k);
    return it == params.end() || it->second.empty() ? nullptr : &it->second;
  };
  const std::string* category = param("category");
  if (!category) throw Error(ErrorCode::kCategoryRequired, "category required");
  q.category = parse_category(*category);
  if (!q.category) throw Error(ErrorCode::kUnknownCategory, "unknown category " + *category);
  if (auto* label = param("label")) q.label = *label;
  if (auto* cursor = param("cursor")) q.cursor = *cursor;
  q.page_size = config_.default_page_size;
  if (auto* ps = param("page_size")) q.page_size = parse_page_size(*ps, config_.max_page_size);

  auto page = catalog_.query_objects(q);
  json items = json::array();
  for (const auto& item : page.items) items.push_back(object_document(item.detection, item.crop));
  return json{{"items", items},
              {"next_cursor", page.next_cursor ? json(*page.next_cursor) : json(nullptr)},
              {"total", page.total}};
}

json ExploreService::painting(const std::string& artwork_id) const {
  auto detail = catalog_.get_painting_detail(artwork_id);
  const Artwork& a = detail.artwork;
  json year = nullptr;
  if (a.production_year) {
    year = {{"start", a.production_year->start}, {"end", a.production_year->end}};
  }
  json objects = json::array();
  for (const auto& o : detail.objects) objects.push_back(object_document(o.detection, o.crop));
  return json{{"artwork",
               {{"id", a.id},
                {"title", a.title},
                {"artist", a.artist},
                {"technique", a.technique},
                {"production_year", year},
                {"image_url", "/paintings/" + a.id + "/image"},
                {"width", a.image_width},
                {"height", a.image_height},
                {"palette", a.palette}}},
              {"objects", objects}};
}

json ExploreService::home() const {
  json examples = json::array();
  for (const auto& id : config_.home_examples) {
    auto d = catalog_.detection(id);
    auto crop = catalog_.crop(id);
    if (!d || !crop) {
      logger()->warn("home example {} has no crop; skipped", id);
      continue;
    }
    examples.push_back(object_document(*d, crop));
  }
  if (config_.home_examples.empty()) {
    auto page = catalog_.query_objects({std::nullopt, std::nullopt, std::nullopt, 3});
    for (const auto& item : page.items) {
      examples.push_back(object_document(item.detection, item.crop));
    }
  }
  return json{{"examples", examples}};
}

json ExploreService::create_session() {
  Session s = sessions_.create();
  return json{{"session_id", s.id},
              {"created_at", detail::format_utc(s.created_at)},
              {"expires_at", detail::format_utc(s.created_at + sessions_.ttl())}};
}

json ExploreService::favorites(const std::string& session_id) const {
  json list = json::array();
  for (const auto& id : sessions_.favorites(session_id)) {
    auto d = catalog_.detection(id);
    if (d) list.push_back(object_document(*d, catalog_.crop(id)));
  }
  return json{{"session_id", session_id}, {"favorites", list}};
}

json ExploreService::add_favorite(const std::string& session_id,
                                  const std::string& detection_id) {
  sessions_.get(session_id);
  if (!catalog_.crop(detection_id)) {
    throw Error(ErrorCode::kNotFound, "no object " + detection_id);
  }
  sessions_.add_favorite(session_id, detection_id);
  return favorites(session_id);
}

json ExploreService::remove_favorite(const std::string& session_id,
                                     const std::string& detection_id) {
  sessions_.remove_favorite(session_id, detection_id);
  return favorites(session_id);
}

json ExploreService::post_events(const json& body) {
  std::vector<SessionEvent> batch;
  if (body.is_array()) {
    for (const auto& e : body) batch.push_back(parse_event(e));
  } else if (body.is_object() && body.contains("events")) {
    if (!body["events"].is_array()) throw Error(ErrorCode::kMalformedEvent, "events must be a list");
    for (const auto& e : body["events"]) batch.push_back(parse_event(e));
  } else {
    batch.push_back(parse_event(body));
  }
  for (const auto& e : batch) sessions_.get(e.session_id);
  for (const auto& e : batch) events_.append(e);
  return json{{"accepted", batch.size()}};
}

json ExploreService::usage_report() const {
  auto all = events_.events();
  return to_json(compute_usage(all));
}

json ExploreService::submit_canvas(const std::string& session_id, const json& body) {
  const auto favs = sessions_.favorites(session_id);
  CanvasComposition comp;
  try {
    comp = body.get<CanvasComposition>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kInvalidComposition, std::string("unreadable composition: ") + e.what());
  }
  if (comp.placements.empty()) throw Error(ErrorCode::kNothingPlaced, "nothing placed");
  for (const auto& p : comp.placements) {
    if (std::find(favs.begin(), favs.end(), p.detection_id) == favs.end()) {
      throw Error(ErrorCode::kNotFavorited, p.detection_id + " is not in the session favorites");
    }
  }
  if (comp.prompt.empty()) throw Error(ErrorCode::kInvalidComposition, "prompt required");
  if (comp.side > provider_->max_side()) {
    throw Error(ErrorCode::kInvalidComposition,
                "canvas side exceeds provider limit " + std::to_string(provider_->max_side()));
  }
  validate(comp, CatalogCropSource(catalog_));

  Job job;
  job.id = random_hex(12);
  job.session_id = session_id;
  job.composition = comp;
  job.created_at = detail::format_utc(config_.clock());
  {
    std::lock_guard lock(jobs_mu_);
    if (active_sessions_.count(session_id)) {
      throw Error(ErrorCode::kGenerationInProgress, "a generation is already running");
    }
    active_sessions_.insert(session_id);
    queue_.push_back(job.id);
    jobs_.emplace(job.id, job);
  }
  jobs_cv_.notify_one();
  return json{{"job_id", job.id}, {"status", to_string(JobStatus::kQueued)}};
}

json ExploreService::job_document(const Job& job) const {
  json used = json::array();
  for (const auto& id : job.used_detection_ids) {
    auto d = catalog_.detection(id);
    used.push_back({{"detection_id", id},
                    {"label", d ? json(d->label) : json(nullptr)},
                    {"artwork_id", d ? json(d->artwork_id) : json(nullptr)}});
  }
  json error = nullptr;
  if (job.error_code) error = error_document(*job.error_code, job.error_message)["error"];
  return json{{"job_id", job.id},
              {"session_id", job.session_id},
              {"status", to_string(job.status)},
              {"composition", job.composition},
              {"created_at", job.created_at},
              {"image_url", job.status == JobStatus::kDone
                                ? json("/generations/" + job.id + "/image")
                                : json(nullptr)},
              {"used_objects", used},
              {"error", error}};
}

json ExploreService::generation(const std::string& job_id) const {
  {
    std::lock_guard lock(jobs_mu_);
    auto it = jobs_.find(job_id);
    if (it != jobs_.end()) return job_document(it->second);
  }
  auto rec = catalog_.generation(job_id);
  if (!rec) throw Error(ErrorCode::kNotFound, "no generation " + job_id);
  Job job;
  job.id = rec->job_id;
  job.session_id = rec->session_id;
  job.composition = rec->composition.get<CanvasComposition>();
  job.status = JobStatus::kDone;
  job.used_detection_ids = rec->used_detection_ids;
  job.created_at = rec->created_at;
  return job_document(job);
}

void ExploreService::worker_loop(std::stop_token stop) {
  while (true) {
    std::string job_id;
    {
      std::unique_lock lock(jobs_mu_);
      if (!jobs_cv_.wait(lock, stop, [&] { return !queue_.empty(); })) return;
      job_id = queue_.front();
      queue_.pop_front();
      jobs_.at(job_id).status = JobStatus::kRunning;
    }
    run_job(job_id);
  }
}

void ExploreService::run_job(const std::string& job_id) {
  CanvasComposition comp;
  std::string session_id, created_at;
  {
    std::lock_guard lock(jobs_mu_);
    const Job& job = jobs_.at(job_id);
    comp = job.composition;
    session_id = job.session_id;
    created_at = job.created_at;
  }
  std::optional<ErrorCode> code;
  std::string message;
  std::vector<std::string> used;
  try {
    GeneratedImage g = generate(*provider_, comp, CatalogCropSource(catalog_));
    GenerationRecord rec{job_id, session_id, g.provider_id, json(g.composition),
                         g.used_detection_ids, "", "", created_at};
    catalog_.store_generation(rec, g.image);
    used = g.used_detection_ids;
  } catch (const Error& e) {
    code = e.code();
    message = e.what();
  } catch (const std::exception& e) {
    code = ErrorCode::kProviderFailure;
    message = e.what();
  }
  if (code) logger()->warn("generation {} failed: {} ({})", job_id, to_string(*code), message);
  {
    std::lock_guard lock(jobs_mu_);
    Job& job = jobs_.at(job_id);
    job.status = code ? JobStatus::kFailed : JobStatus::kDone;
    job.error_code = code;
    job.error_message = message;
    job.used_detection_ids = used;
    active_sessions_.erase(session_id);
  }
  idle_cv_.notify_all();
}

bool ExploreService::wait_idle(std::chrono::milliseconds timeout) {
  std::unique_lock lock(jobs_mu_);
  return idle_cv_.wait_for(lock, timeout, [&] { return active_sessions_.empty(); });
}

std::filesystem::path ExploreService::crop_file(const std::string& detection_id) const {
  if (!catalog_.crop(detection_id)) throw Error(ErrorCode::kNotFound, "no crop " + detection_id);
  return catalog_.crop_file(detection_id);
}

std::filesystem::path ExploreService::generation_file(const std::string& job_id) const {
  auto rec = catalog_.generation(job_id);
  if (!rec) throw Error(ErrorCode::kNotFound, "no generated image for " + job_id);
  return catalog_.root() / rec->image_path;
}

std::filesystem::path ExploreService::painting_image_file(const std::string& artwork_id) const {
  auto a = catalog_.artwork(artwork_id);
  if (!a) throw Error(ErrorCode::kNotFound, "no painting " + artwork_id);
  return a->image_ref;
}

namespace {

void send_json(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

template <typename Fn>
httplib::Server::Handler guarded(Fn fn) {
  return [fn](const httplib::Request& req, httplib::Response& res) {
    try {
      fn(req, res);
    } catch (const Error& e) {
      send_json(res, http_status(e.code()), error_document(e.code(), e.what()));
    } catch (const json::exception& e) {
      send_json(res, 400,
                error_document(ErrorCode::kMalformedDocument, std::string("bad JSON: ") + e.what()));
    } catch (const std::exception& e) {
      logger()->error("{} {}: {}", req.method, req.path, e.what());
      send_json(res, 500, error_document(ErrorCode::kIo, e.what()));
    }
  };
}

json parse_body(const httplib::Request& req) {
  if (req.body.empty()) return json::object();
  return json::parse(req.body);
}

void send_file(httplib::Response& res, const std::filesystem::path& path) {
  const std::string ref = path.string();
  if (ref.rfind("http://", 0) == 0 || ref.rfind("https://", 0) == 0) {
    res.set_redirect(ref);
    return;
  }
  auto bytes = detail::read_bytes(path);
  std::string type = "application/octet-stream";
  if (bytes.size() >= 4 && bytes[0] == 0x89 && bytes[1] == 'P') type = "image/png";
  if (bytes.size() >= 2 && bytes[0] == 0xff && bytes[1] == 0xd8) type = "image/jpeg";
  res.set_content(std::string(bytes.begin(), bytes.end()), type);
}

}  // namespace

void ExploreService::mount(httplib::Server& s) {
  s.set_default_headers({{"Access-Control-Allow-Origin", "*"}});
  s.Get("/categories", guarded([this](const auto&, auto& res) { send_json(res, 200, categories()); }));
  s.Get("/objects", guarded([this](const httplib::Request& req, auto& res) {
          std::map<std::string, std::string> params(req.params.begin(), req.params.end());
          send_json(res, 200, objects(params));
        }));
  s.Get(R"(/paintings/([^/]+)/image)", guarded([this](const httplib::Request& req, auto& res) {
          send_file(res, painting_image_file(req.matches[1]));
        }));
  s.Get(R"(/paintings/([^/]+))", guarded([this](const httplib::Request& req, auto& res) {
          send_json(res, 200, painting(req.matches[1]));
        }));
  s.Get("/home", guarded([this](const auto&, auto& res) { send_json(res, 200, home()); }));
  s.Post("/sessions", guarded([this](const auto&, auto& res) {
           send_json(res, 201, create_session());
         }));
  s.Get(R"(/sessions/([^/]+)/favorites)", guarded([this](const httplib::Request& req, auto& res) {
          send_json(res, 200, favorites(req.matches[1]));
        }));
  s.Post(R"(/sessions/([^/]+)/favorites/([^/]+))",
         guarded([this](const httplib::Request& req, auto& res) {
           send_json(res, 200, add_favorite(req.matches[1], req.matches[2]));
         }));
  s.Delete(R"(/sessions/([^/]+)/favorites/([^/]+))",
           guarded([this](const httplib::Request& req, auto& res) {
             send_json(res, 200, remove_favorite(req.matches[1], req.matches[2]));
           }));
  s.Post(R"(/sessions/([^/]+)/canvas)", guarded([this](const httplib::Request& req, auto& res) {
           send_json(res, 202, submit_canvas(req.matches[1], parse_body(req)));
         }));
  s.Get(R"(/generations/([^/]+)/image)", guarded([this](const httplib::Request& req, auto& res) {
          send_file(res, generation_file(req.matches[1]));
        }));
  s.Get(R"(/generations/([^/]+))", guarded([this](const httplib::Request& req, auto& res) {
          send_json(res, 200, generation(req.matches[1]));
        }));
  s.Get(R"(/crops/([^/]+))", guarded([this](const httplib::Request& req, auto& res) {
          send_file(res, crop_file(req.matches[1]));
        }));
  s.Post("/events", guarded([this](const httplib::Request& req, auto& res) {
           json body;
           try {
             body = json::parse(req.body);
           } catch (const json::exception&) {
             throw Error(ErrorCode::kMalformedEvent, "event body is not JSON");
           }
           send_json(res, 202, post_events(body));
         }));
  s.Get("/reports/usage", guarded([this](const auto&, auto& res) {
          send_json(res, 200, usage_report());
        }));
  s.Get("/healthz", [](const auto&, httplib::Response& res) {
    send_json(res, 200, json{{"status", "ok"}});
  });
  s.set_error_handler([](const httplib::Request& req, httplib::Response& res) {
    if (res.status == 404 && res.body.empty()) {
      send_json(res, 404, error_document(ErrorCode::kNotFound, "no route " + req.path));
    }
  });
}

}  // namespace objexplore
