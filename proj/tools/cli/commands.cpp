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

#include <algorithm>
#include <memory>
#include <optional>
#include <ostream>

#include "CLI11.hpp"
#include "cli.hpp"
#include "httplib.h"
#include "objexplore/canvas.hpp"
#include "objexplore/catalog.hpp"
#include "objexplore/curation.hpp"
#include "objexplore/explore_service.hpp"
#include "objexplore/ingestion.hpp"
#include "objexplore/log.hpp"
#include "objexplore/metrics.hpp"
#include "objexplore/usage.hpp"

namespace objexplore::cli {

using nlohmann::json;

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::kConfig:
      return kExitUsage;
    case ErrorCode::kNetwork:
    case ErrorCode::kTimeout:
    case ErrorCode::kProtocolViolation:
    case ErrorCode::kProviderFailure:
    case ErrorCode::kProviderContract:
      return kExitExternal;
    case ErrorCode::kConflictingWrite:
    case ErrorCode::kDanglingReference:
    case ErrorCode::kLabelCategoryMismatch:
      return kExitIntegrity;
    case ErrorCode::kLocked:
      return kExitLocked;
    case ErrorCode::kNotFound:
      return kExitPrerequisite;
    case ErrorCode::kIo:
      return kExitInternal;
    default:
      return kExitInput;
  }
}

namespace {

struct Outcome {
  json result;
  std::string text;
  int exit_code = kExitOk;
};

struct Options {
  std::optional<std::filesystem::path> config_file;
  json flags = json::object();
  bool machine = false;
  std::string log_level = "info";

  std::filesystem::path preds, gt, snapshot_dir, events_file, detections_file;
  double eval_cutoff = 0.0;
  std::vector<std::string> artworks;
};

Taxonomy load_configured_taxonomy(const RunConfig& c) {
  return c.taxonomy.empty() ? default_taxonomy() : load_taxonomy_file(c.taxonomy);
}

json skipped_json(const std::vector<SkippedRecord>& skipped) {
  json list = json::array();
  for (const auto& s : skipped) list.push_back({{"id", s.id}, {"reason", s.reason}});
  return list;
}

std::string bullet_list(const std::string& title, const json& items, const char* a,
                        const char* b) {
  if (items.empty()) return {};
  std::string out = title + ":\n";
  for (const auto& i : items) {
    out += "  " + i[a].dump() + ": " + i[b].get<std::string>() + "\n";
  }
  return out;
}

Outcome cmd_ingest(const RunConfig& c) {
  if (c.collection_url.empty() && c.collection_fixture.empty()) {
    throw Error(ErrorCode::kConfig, "set collection_url or collection_fixture");
  }
  CollectionConfig cc;
  cc.base_url = c.collection_url;
  cc.api_key = c.collection_key;
  cc.api_key_header = c.collection_key_header;
  cc.fixture_path = c.collection_fixture;

  Taxonomy tax = load_configured_taxonomy(c);
  CatalogLock lock(c.catalog);
  Catalog catalog(c.catalog, tax);
  ImageCache cache(c.resolved_cache_dir());

  std::size_t inserted = 0, unchanged = 0;
  json conflicts = json::array(), image_failures = json::array();
  FetchStats stats = fetch_artworks(cc, c.object_type, [&](Artwork a) {
    if (!a.dimensions_known() || a.palette.empty()) {
      try {
        auto blob = cache.fetch(a);
        if (a.palette.empty()) a.palette = compute_palette(read_image(blob));
      } catch (const Error& e) {
        image_failures.push_back({{"id", a.id}, {"reason", e.what()}});
      }
    }
    try {
      (catalog.put_artwork(a) == PutResult::kInserted ? inserted : unchanged)++;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kConflictingWrite) throw;
      conflicts.push_back({{"id", a.id}, {"reason", e.what()}});
    }
  });

  Outcome o;
  o.result = {{"fetched", stats.yielded},
              {"pages", stats.pages},
              {"inserted", inserted},
              {"unchanged", unchanged},
              {"skipped", skipped_json(stats.skipped)},
              {"image_failures", image_failures},
              {"conflicts", conflicts},
              {"network_transfers", cache.network_transfers()}};
  o.text = "fetched " + std::to_string(stats.yielded) + " artworks: " +
           std::to_string(inserted) + " new, " + std::to_string(unchanged) + " unchanged, " +
           std::to_string(stats.skipped.size()) + " skipped\n" +
           bullet_list("skipped", o.result["skipped"], "id", "reason") +
           bullet_list("image failures", image_failures, "id", "reason") +
           bullet_list("conflicts", conflicts, "id", "reason");
  if (!conflicts.empty()) o.exit_code = kExitIntegrity;
  return o;
}

Outcome cmd_detect(const RunConfig& c, const std::vector<std::string>& only) {
  if (c.detector_url.empty()) throw Error(ErrorCode::kConfig, "set detector_url");
  Taxonomy tax = load_configured_taxonomy(c);
  CatalogLock lock(c.catalog);
  Catalog catalog(c.catalog, tax);
  DetectorEndpoint endpoint;
  endpoint.url = c.detector_url;
  endpoint.timeout = std::chrono::milliseconds(c.detector_timeout_ms);

  std::vector<Artwork> targets;
  if (only.empty()) {
    targets = catalog.artworks();
  } else {
    for (const auto& id : only) {
      auto a = catalog.artwork(id);
      if (!a) throw Error(ErrorCode::kNotFound, "artwork " + id + " is not in the catalog");
      targets.push_back(*a);
    }
  }
  if (targets.empty()) throw Error(ErrorCode::kNotFound, "catalog has no artworks; run ingest");

  std::size_t inserted = 0, unchanged = 0, below = 0, dropped = 0;
  json failures = json::array();
  for (const auto& a : targets) {
    try {
      const bool remote = a.image_ref.rfind("http://", 0) == 0 || a.image_ref.rfind("https://", 0) == 0;
      std::filesystem::path local = a.image_ref;
      auto outcome = request_detections(endpoint, a, remote ? nullptr : &local, tax, c.cutoff);
      below += outcome.below_cutoff;
      dropped += outcome.dropped.size();
      for (const auto& d : outcome.detections) {
        (catalog.put_detection(d) == PutResult::kInserted ? inserted : unchanged)++;
      }
    } catch (const Error& e) {
      failures.push_back({{"artwork_id", a.id}, {"code", std::string(to_string(e.code()))}, {"reason", e.what()}});
    }
  }
  Outcome o;
  o.result = {{"artworks", targets.size()},
              {"inserted", inserted},
              {"unchanged", unchanged},
              {"below_cutoff", below},
              {"dropped_after_clamp", dropped},
              {"failures", failures}};
  o.text = "detected on " + std::to_string(targets.size() - failures.size()) + "/" +
           std::to_string(targets.size()) + " artworks: " + std::to_string(inserted) + " new, " +
           std::to_string(unchanged) + " unchanged, " + std::to_string(below) +
           " below cutoff, " + std::to_string(dropped) + " empty after clamp\n" +
           bullet_list("failures", failures, "artwork_id", "reason");
  if (!failures.empty()) o.exit_code = kExitExternal;
  return o;
}

Outcome cmd_import(const RunConfig& c, const std::filesystem::path& file) {
  Taxonomy tax = load_configured_taxonomy(c);
  CatalogLock lock(c.catalog);
  Catalog catalog(c.catalog, tax);
  ImportResult imported = import_detections(file, tax);
  std::size_t inserted = 0, unchanged = 0;
  json rejected = json::array();
  for (const auto& r : imported.rejected) rejected.push_back({{"line", r.line}, {"reason", r.reason}});
  for (const auto& d : imported.detections) {
    try {
      (catalog.put_detection(d) == PutResult::kInserted ? inserted : unchanged)++;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kDanglingReference) throw;
      rejected.push_back({{"line", nullptr}, {"reason", e.what()}});
    }
  }
  Outcome o;
  o.result = {{"accepted", imported.detections.size()},
              {"inserted", inserted},
              {"unchanged", unchanged},
              {"duplicates", imported.duplicates},
              {"rejected", rejected}};
  o.text = "imported " + std::to_string(imported.detections.size()) + " detections: " +
           std::to_string(inserted) + " new, " + std::to_string(unchanged) + " unchanged, " +
           std::to_string(imported.duplicates) + " duplicates, " +
           std::to_string(rejected.size()) + " rejected\n" +
           bullet_list("rejected", rejected, "line", "reason");
  return o;
}

Outcome cmd_curate(const RunConfig& c) {
  Taxonomy tax = load_configured_taxonomy(c);
  CatalogLock lock(c.catalog);
  Catalog catalog(c.catalog, tax);
  if (catalog.detections().empty()) {
    throw Error(ErrorCode::kNotFound, "catalog has no detections; run detect or import-detections");
  }
  ImageCache cache(c.resolved_cache_dir());
  PipelineConfig pc;
  pc.subset.k_per_label = static_cast<std::size_t>(c.k_per_label);
  pc.min_side = static_cast<int>(c.min_side);
  pc.workers = static_cast<unsigned>(c.workers);
  PipelineReport report = run_pipeline(catalog, pc, make_image_loader(&cache));
  Outcome o{to_json(report), format_report(report), kExitOk};
  if (report.failed > 0) o.exit_code = kExitExternal;
  return o;
}

Outcome cmd_eval(const Options& opt) {
  auto preds = read_detection_records(opt.preds);
  auto gts = read_ground_truth(opt.gt);
  if (opt.eval_cutoff > 0) preds = filter_by_confidence(preds, opt.eval_cutoff);
  auto report = evaluate_by_label(preds, gts);
  return {to_json(report), format_report(report), kExitOk};
}

Outcome cmd_stats(const RunConfig& c) {
  Taxonomy tax = load_configured_taxonomy(c);
  Catalog catalog(c.catalog, tax);
  auto stats = compute_stats(catalog.detections(), tax);
  return {to_json(stats), format_stats(stats), kExitOk};
}

Outcome cmd_audit(const RunConfig& c) {
  Taxonomy tax = load_configured_taxonomy(c);
  Catalog catalog(c.catalog, tax);
  auto r = catalog.audit();
  Outcome o;
  o.result = {{"artworks", r.artworks},
              {"detections", r.detections},
              {"crops", r.crops},
              {"generations", r.generations},
              {"violations", r.violations}};
  o.text = std::to_string(r.artworks) + " artworks, " + std::to_string(r.detections) +
           " detections, " + std::to_string(r.crops) + " crops, " +
           std::to_string(r.generations) + " generations\n";
  for (const auto& v : r.violations) o.text += "violation: " + v + "\n";
  o.text += r.ok() ? "audit passed\n" : "audit FAILED\n";
  o.exit_code = r.ok() ? kExitOk : kExitIntegrity;
  return o;
}

Outcome cmd_report(const RunConfig& c, const std::filesystem::path& events_file) {
  std::filesystem::path path =
      events_file.empty() ? c.resolved_state_dir() / "events.jsonl" : events_file;
  if (!events_file.empty() && !std::filesystem::exists(path)) {
    throw Error(ErrorCode::kNotFound, "no event log at " + path.string());
  }
  EventLog log(path);
  auto report = compute_usage(log.events());
  return {to_json(report), format_usage(report), kExitOk};
}

Outcome cmd_export(const RunConfig& c, const std::filesystem::path& dir) {
  Taxonomy tax = load_configured_taxonomy(c);
  CatalogLock lock(c.catalog);
  Catalog catalog(c.catalog, tax);
  catalog.export_snapshot(dir);
  auto r = catalog.audit();
  Outcome o;
  o.result = {{"snapshot", dir.string()},
              {"artworks", r.artworks},
              {"detections", r.detections},
              {"crops", r.crops},
              {"generations", r.generations}};
  o.text = "snapshot written to " + dir.string() + "\n";
  return o;
}

Outcome cmd_import_snapshot(const RunConfig& c, const std::filesystem::path& dir) {
  Taxonomy tax = load_configured_taxonomy(c);
  std::filesystem::create_directories(c.catalog);
  CatalogLock lock(c.catalog);
  auto catalog = Catalog::import_snapshot(dir, c.catalog, tax);
  auto r = catalog->audit();
  Outcome o;
  o.result = {{"catalog", c.catalog.string()},
              {"artworks", r.artworks},
              {"detections", r.detections},
              {"crops", r.crops},
              {"violations", r.violations}};
  o.text = "restored " + std::to_string(r.detections) + " detections into " + c.catalog.string() + "\n";
  o.exit_code = r.ok() ? kExitOk : kExitIntegrity;
  return o;
}

Outcome cmd_serve(const RunConfig& c, CliContext& ctx) {
  Taxonomy tax = load_configured_taxonomy(c);
  CatalogLock lock(c.catalog);
  Catalog catalog(c.catalog, tax);
  std::shared_ptr<OutpaintProvider> provider;
  if (c.provider == "mock") {
    provider = std::make_shared<MockOutpaintProvider>(static_cast<int>(c.provider_max_side));
  } else {
    provider = std::make_shared<HttpOutpaintProvider>(
        OutpaintEndpoint{c.provider, c.provider_key, c.provider_key_header,
                         std::chrono::milliseconds(c.provider_timeout_ms),
                         static_cast<int>(c.provider_max_side)});
  }
  ServiceConfig sc;
  sc.state_dir = c.resolved_state_dir();
  sc.session_ttl = std::chrono::hours(c.session_ttl_hours);
  sc.home_examples = c.home_examples;
  sc.generation_workers = static_cast<unsigned>(c.generation_workers);
  ExploreService service(catalog, provider, sc);

  httplib::Server server;
  service.mount(server);
  int port = static_cast<int>(c.port);
  if (port == 0) {
    port = server.bind_to_any_port(c.host);
  } else if (!server.bind_to_port(c.host, port)) {
    port = -1;
  }
  if (port < 0) throw Error(ErrorCode::kConfig, "cannot bind " + c.host + ":" + std::to_string(c.port));
  logger()->info("serving {} on http://{}:{} (provider {})", c.catalog.string(), c.host, port,
                 provider->id());
  std::thread notifier;
  if (ctx.on_listening) {
    notifier = std::thread([&] {
      server.wait_until_ready();
      ctx.on_listening(server, port);
    });
  }
  server.listen_after_bind();
  if (notifier.joinable()) notifier.join();
  service.wait_idle(std::chrono::seconds(30));
  Outcome o;
  o.result = {{"host", c.host}, {"port", port}};
  o.text = "server stopped\n";
  return o;
}

void emit(CliContext& ctx, const Options& opt, const std::string& command, const Outcome& o) {
  if (opt.machine) {
    json doc{{"command", command}, {"ok", o.exit_code == kExitOk}, {"exit_code", o.exit_code},
             {"result", o.result}};
    ctx.out << doc.dump(2) << "\n";
  } else {
    ctx.out << o.text;
  }
}

void emit_error(CliContext& ctx, const Options& opt, const std::string& command, ErrorCode code,
                const std::string& message, int exit_code) {
  if (opt.machine) {
    json doc{{"command", command},
             {"ok", false},
             {"exit_code", exit_code},
             {"error", {{"code", std::string(to_string(code))}, {"message", message}}}};
    ctx.out << doc.dump(2) << "\n";
  } else {
    ctx.err << "error[" << to_string(code) << "]: " << message << "\n";
  }
}

}  // namespace

int run_cli(const std::vector<std::string>& args, CliContext& ctx) {
  Options opt;
  CLI::App app{"Object-first exploration of a painting collection", "objexplore"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_version_flag("--version", "objexplore 1.0.0");

  app.add_option("--config", opt.config_file, "JSON config file (also OBJEXPLORE_CONFIG)");
  std::string output = "human";
  app.add_option("--output", output, "human or machine")
      ->check(CLI::IsMember({"human", "machine"}));
  app.add_option("--log-level", opt.log_level, "trace, debug, info, warn, error or off");

  auto setting = [&](CLI::App* sub, const std::string& flag, const std::string& key,
                     const std::string& help) {
    sub->add_option_function<std::string>(
        flag, [&opt, key](const std::string& v) { opt.flags[key] = parse_setting(key, v); }, help);
  };
  setting(&app, "--catalog", "catalog", "catalog directory");
  setting(&app, "--taxonomy", "taxonomy", "label table file (default: built-in)");
  setting(&app, "--cache-dir", "cache_dir", "image cache directory");

  auto* ingest = app.add_subcommand("ingest", "fetch artwork metadata and images into the catalog");
  setting(ingest, "--collection-url", "collection_url", "collection API base URL");
  setting(ingest, "--collection-key", "collection_key", "collection API key");
  setting(ingest, "--fixture", "collection_fixture", "JSONL file or directory used instead of the API");
  setting(ingest, "--object-type", "object_type", "object type filter");

  auto* detect = app.add_subcommand("detect", "run the detector service over catalog artworks");
  setting(detect, "--detector-url", "detector_url", "detector base URL");
  setting(detect, "--cutoff", "cutoff", "minimum confidence kept");
  detect->add_option("--artwork", opt.artworks, "limit to these artwork ids");

  auto* import = app.add_subcommand("import-detections", "load detections from a JSONL file");
  import->add_option("--file", opt.detections_file, "detection records")->required()->check(CLI::ExistingFile);

  auto* curate = app.add_subcommand("curate", "select the per-label subset and cut crops");
  setting(curate, "--k", "k_per_label", "objects kept per label");
  setting(curate, "--min-side", "min_side", "minimum crop side in pixels");
  setting(curate, "--workers", "workers", "parallel image workers (0: all cores)");

  auto* eval = app.add_subcommand("eval-ap", "COCO-style AP of predictions against ground truth");
  eval->add_option("--preds", opt.preds, "prediction records (JSONL)")->required()->check(CLI::ExistingFile);
  eval->add_option("--gt", opt.gt, "ground-truth boxes (JSONL)")->required()->check(CLI::ExistingFile);
  eval->add_option("--cutoff", opt.eval_cutoff, "drop predictions below this confidence")
      ->check(CLI::Range(0.0, 1.0));

  auto* stats = app.add_subcommand("stats", "detection counts per label and category");
  auto* audit = app.add_subcommand("audit", "check catalog integrity");

  auto* serve = app.add_subcommand("serve", "run the exploration API");
  setting(serve, "--host", "host", "bind address");
  setting(serve, "--port", "port", "port (0: any free port)");
  setting(serve, "--provider", "provider", "'mock' or outpainting service URL");
  setting(serve, "--state-dir", "state_dir", "sessions and event log directory");

  auto* report = app.add_subcommand("report", "usage report from the event log");
  setting(report, "--state-dir", "state_dir", "sessions and event log directory");
  report->add_option("--events", opt.events_file, "event log file (default: <state-dir>/events.jsonl)");

  auto* exp = app.add_subcommand("export-snapshot", "write a deterministic catalog snapshot");
  exp->add_option("--dir", opt.snapshot_dir, "snapshot directory")->required();
  auto* imp = app.add_subcommand("import-snapshot", "restore a snapshot into an empty catalog");
  imp->add_option("--from", opt.snapshot_dir, "snapshot directory")->required()->check(CLI::ExistingDirectory);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  std::string command = "objexplore";
  try {
    app.parse(reversed);
  } catch (const CLI::Error& e) {
    int code = app.exit(e, ctx.out, ctx.err);
    return code == 0 ? kExitOk : kExitUsage;
  } catch (const Error& e) {
    opt.machine = output == "machine";
    emit_error(ctx, opt, command, e.code(), e.what(), kExitUsage);
    return kExitUsage;
  }
  opt.machine = output == "machine";
  command = app.get_subcommands().front()->get_name();

  if (auto level = spdlog::level::from_str(opt.log_level); level != spdlog::level::off ||
                                                           opt.log_level == "off") {
    logger()->set_level(level);
  }

  try {
    if (!opt.config_file) {
      if (auto env_file = ctx.env("OBJEXPLORE_CONFIG")) opt.config_file = *env_file;
    }
    RunConfig cfg = resolve_config(opt.config_file, ctx.env, opt.flags);
    Outcome o;
    auto* sub = app.get_subcommands().front();
    if (sub == ingest) o = cmd_ingest(cfg);
    else if (sub == detect) o = cmd_detect(cfg, opt.artworks);
    else if (sub == import) o = cmd_import(cfg, opt.detections_file);
    else if (sub == curate) o = cmd_curate(cfg);
    else if (sub == eval) o = cmd_eval(opt);
    else if (sub == stats) o = cmd_stats(cfg);
    else if (sub == audit) o = cmd_audit(cfg);
    else if (sub == serve) o = cmd_serve(cfg, ctx);
    else if (sub == report) o = cmd_report(cfg, opt.events_file);
    else if (sub == exp) o = cmd_export(cfg, opt.snapshot_dir);
    else if (sub == imp) o = cmd_import_snapshot(cfg, opt.snapshot_dir);
    emit(ctx, opt, command, o);
    return o.exit_code;
  } catch (const Error& e) {
    int code = exit_code_for(e.code());
    emit_error(ctx, opt, command, e.code(), e.what(), code);
    return code;
  } catch (const std::exception& e) {
    emit_error(ctx, opt, command, ErrorCode::kIo, e.what(), kExitInternal);
    return kExitInternal;
  }
}

}  // namespace objexplore::cli
