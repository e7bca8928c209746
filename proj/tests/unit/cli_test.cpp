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

#include <gtest/gtest.h>

#include <sstream>

#include "cli/cli.hpp"
#include "httplib.h"
#include "objexplore/catalog.hpp"
#include "test_util.hpp"

namespace objexplore::cli {
namespace {

using nlohmann::json;
using testing_util::fixture;
using testing_util::TempDir;

struct Run {
  int code;
  std::string out;
  std::string err;
  json doc() const { return json::parse(out); }
};

Run run(std::vector<std::string> args, std::map<std::string, std::string> env = {},
        std::function<void(httplib::Server&, int)> on_listening = {}) {
  std::ostringstream out, err;
  CliContext ctx{[env](const std::string& k) -> std::optional<std::string> {
                   auto it = env.find(k);
                   if (it == env.end()) return std::nullopt;
                   return it->second;
                 },
                 out, err, std::move(on_listening)};
  int code = run_cli(args, ctx);
  return {code, out.str(), err.str()};
}

Run machine(const std::filesystem::path& catalog, std::vector<std::string> args) {
  args.insert(args.begin(), {"--output", "machine", "--catalog", catalog.string()});
  return run(args);
}

void build_pipeline(const std::filesystem::path& catalog, const std::string& k = "100") {
  auto dir = fixture("pipeline");
  ASSERT_EQ(machine(catalog, {"ingest", "--fixture", (dir / "artworks.jsonl").string()}).code, 0);
  ASSERT_EQ(machine(catalog, {"import-detections", "--file", (dir / "detections.jsonl").string()}).code, 0);
  ASSERT_EQ(machine(catalog, {"curate", "--k", k, "--workers", "1"}).code, 0);
}

std::map<std::string, std::string> tree_bytes(const std::filesystem::path& root) {
  std::map<std::string, std::string> files;
  for (const auto& e : std::filesystem::recursive_directory_iterator(root)) {
    if (e.is_regular_file()) {
      files[std::filesystem::relative(e.path(), root).string()] = testing_util::read_text(e.path());
    }
  }
  return files;
}

TEST(Config, LayersApplyInOrder) {
  TempDir tmp;
  testing_util::write_file(tmp / "cfg.json", R"({"port": 9000, "k_per_label": 50, "cutoff": 0.4})");
  std::map<std::string, std::string> env{{"OBJEXPLORE_PORT", "9100"}, {"OBJEXPLORE_CUTOFF", "0.3"}};
  auto lookup = [&](const std::string& k) -> std::optional<std::string> {
    auto it = env.find(k);
    return it == env.end() ? std::nullopt : std::optional(it->second);
  };
  RunConfig c = resolve_config(tmp / "cfg.json", lookup, json{{"port", 9200}});
  EXPECT_EQ(c.port, 9200);
  EXPECT_EQ(c.k_per_label, 50);
  EXPECT_DOUBLE_EQ(c.cutoff, 0.3);
  EXPECT_EQ(c.min_side, 32);

  RunConfig d = resolve_config(std::nullopt, [](const std::string&) { return std::nullopt; }, json::object());
  EXPECT_DOUBLE_EQ(d.cutoff, 0.25);
  EXPECT_EQ(d.k_per_label, 100);
  EXPECT_EQ(d.resolved_cache_dir(), std::filesystem::path("catalog") / "cache");
}

TEST(Config, RejectsUnknownKeysAndBadValues) {
  TempDir tmp;
  testing_util::write_file(tmp / "cfg.json", R"({"prot": 1})");
  auto none = [](const std::string&) -> std::optional<std::string> { return std::nullopt; };
  try {
    resolve_config(tmp / "cfg.json", none, json::object());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kConfig);
  }
  EXPECT_THROW(resolve_config(std::nullopt, none, json{{"cutoff", 1.5}}), Error);

  auto r = run({"--catalog", (tmp / "c").string(), "curate", "--k", "abc"});
  EXPECT_EQ(r.code, kExitUsage);
  EXPECT_NE(r.err.find("error[config]"), std::string::npos);
  EXPECT_EQ(run({"--catalog", (tmp / "c").string(), "stats"}, {{"OBJEXPLORE_CONFIG", (tmp / "cfg.json").string()}}).code,
            kExitUsage);
}

TEST(EvalAp, HandComputedFixture) {
  // person: IoUs 1.0 and 0.77 plus one false positive. Thresholds up to
  // 0.75 rank TP, TP, FP (AP 1); the four above 0.77 rank TP, FP, FP
  // with recall stuck at 1/2 (AP 0.5). Mean 0.8. dog matches exactly.
  auto dir = fixture("eval");
  TempDir tmp;
  auto r = run({"--output", "machine", "eval-ap", "--preds", (dir / "preds.jsonl").string(), "--gt",
                (dir / "gt.jsonl").string()});
  ASSERT_EQ(r.code, 0) << r.out << r.err;
  json res = r.doc()["result"];
  EXPECT_NEAR(res["per_label"]["person"]["mean_ap"].get<double>(), 0.8, 1e-9);
  EXPECT_NEAR(res["per_label"]["dog"]["mean_ap"].get<double>(), 1.0, 1e-9);
  EXPECT_NEAR(res["mean_ap"].get<double>(), 0.9, 1e-9);

  auto cut = run({"--output", "machine", "eval-ap", "--preds", (dir / "preds.jsonl").string(),
                  "--gt", (dir / "gt.jsonl").string(), "--cutoff", "0.75"});
  ASSERT_EQ(cut.code, 0);
  EXPECT_NEAR(cut.doc()["result"]["per_label"]["person"]["mean_ap"].get<double>(), 0.8, 1e-9);
  EXPECT_NEAR(cut.doc()["result"]["mean_ap"].get<double>(), 0.4, 1e-9);

  auto human = run({"eval-ap", "--preds", (dir / "preds.jsonl").string(), "--gt", (dir / "gt.jsonl").string()});
  EXPECT_NE(human.out.find("mean AP@[0.50:0.95] = 0.900000"), std::string::npos) << human.out;
}

TEST(Pipeline, CurateWithSmallK) {
  TempDir tmp;
  auto cat = tmp / "cat";
  auto dir = fixture("pipeline");
  ASSERT_EQ(machine(cat, {"ingest", "--fixture", (dir / "artworks.jsonl").string()}).code, 0);
  auto imp = machine(cat, {"import-detections", "--file", (dir / "detections.jsonl").string()});
  ASSERT_EQ(imp.code, 0);
  EXPECT_EQ(imp.doc()["result"]["inserted"], 12);

  auto first = machine(cat, {"curate", "--k", "2"});
  ASSERT_EQ(first.code, 0) << first.out;
  json r = first.doc()["result"];
  EXPECT_EQ(r["subset_size"], 6);
  EXPECT_EQ(r["crops_written"], 3);
  EXPECT_EQ(r["skipped_too_small"], 2);
  EXPECT_EQ(r["skipped_empty"], 1);
  EXPECT_EQ(r["new_items"], 3);
  EXPECT_EQ(machine(cat, {"curate", "--k", "2"}).doc()["result"]["new_items"], 0);

  auto audit = machine(cat, {"audit"});
  EXPECT_EQ(audit.code, 0);
  EXPECT_EQ(audit.doc()["result"]["crops"], 3);
}

TEST(Pipeline, RepeatedRunsExportIdenticalSnapshots) {
  TempDir tmp;
  build_pipeline(tmp / "a");
  build_pipeline(tmp / "b");
  build_pipeline(tmp / "b");  // idempotent rerun on the same catalog
  ASSERT_EQ(machine(tmp / "a", {"export-snapshot", "--dir", (tmp / "snap-a").string()}).code, 0);
  ASSERT_EQ(machine(tmp / "b", {"export-snapshot", "--dir", (tmp / "snap-b").string()}).code, 0);
  auto a = tree_bytes(tmp / "snap-a");
  auto b = tree_bytes(tmp / "snap-b");
  EXPECT_FALSE(a.empty());
  EXPECT_EQ(a, b);

  auto restored = machine(tmp / "c", {"import-snapshot", "--from", (tmp / "snap-a").string()});
  ASSERT_EQ(restored.code, 0) << restored.out;
  EXPECT_EQ(machine(tmp / "c", {"audit"}).code, 0);
  ASSERT_EQ(machine(tmp / "c", {"export-snapshot", "--dir", (tmp / "snap-c").string()}).code, 0);
  EXPECT_EQ(tree_bytes(tmp / "snap-c"), a);
}

TEST(Serve, AnswersCategoriesAndStops) {
  TempDir tmp;
  build_pipeline(tmp / "cat");
  int status = 0;
  json body;
  auto r = run({"--catalog", (tmp / "cat").string(), "serve", "--port", "0"}, {},
               [&](httplib::Server& server, int port) {
                 httplib::Client client("127.0.0.1", port);
                 if (auto res = client.Get("/categories")) {
                   status = res->status;
                   body = json::parse(res->body);
                 }
                 server.stop();
               });
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(status, 200);
  ASSERT_TRUE(body.contains("categories"));
  EXPECT_EQ(body["categories"].size(), 13u);
}

TEST(ExitCodes, MapFailureKinds) {
  TempDir tmp;
  auto cat = tmp / "cat";

  EXPECT_EQ(machine(cat, {"detect"}).code, kExitUsage);
  EXPECT_EQ(run({"--catalog", cat.string()}).code, kExitUsage);
  EXPECT_EQ(run({"--catalog", cat.string(), "frobnicate"}).code, kExitUsage);

  auto dir = fixture("pipeline");
  ASSERT_EQ(machine(cat, {"ingest", "--fixture", (dir / "artworks.jsonl").string()}).code, 0);
  auto pre = machine(cat, {"curate"});
  EXPECT_EQ(pre.code, kExitPrerequisite);
  EXPECT_EQ(pre.doc()["error"]["code"], "not_found");

  auto detect = run({"--output", "machine", "--catalog", cat.string(), "detect", "--detector-url",
                     "http://127.0.0.1:1"},
                    {{"OBJEXPLORE_DETECTOR_TIMEOUT_MS", "500"}});
  EXPECT_EQ(detect.code, kExitExternal);
  EXPECT_EQ(detect.doc()["result"]["failures"].size(), 3u);

  ASSERT_EQ(machine(cat, {"import-detections", "--file", (dir / "detections.jsonl").string()}).code, 0);
  ASSERT_EQ(machine(cat, {"curate"}).code, 0);
  {
    CatalogLock held(cat);
    auto locked = machine(cat, {"curate"});
    EXPECT_EQ(locked.code, kExitLocked);
    EXPECT_EQ(locked.doc()["error"]["code"], "locked");
    EXPECT_EQ(machine(cat, {"audit"}).code, 0);  // readers do not take the lock
  }

  for (const auto& e : std::filesystem::recursive_directory_iterator(cat / "crops")) {
    if (e.path().extension() == ".png") {
      testing_util::write_file(e.path(), "tampered");
      break;
    }
  }
  auto audit = machine(cat, {"audit"});
  EXPECT_EQ(audit.code, kExitIntegrity);
  EXPECT_FALSE(audit.doc()["ok"].get<bool>());

  auto bad = run({"--catalog", cat.string(), "import-detections", "--file",
                  (tmp / "missing.jsonl").string()});
  EXPECT_EQ(bad.code, kExitUsage);
}

TEST(Report, ReadsEventLog) {
  auto r = run({"--output", "machine", "report", "--events", fixture("events/usage_events.jsonl").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  json res = r.doc()["result"];
  EXPECT_EQ(res["warnings"]["unpaired_leaves"], 1);
  EXPECT_EQ(res["warnings"]["unclosed_enters"], 1);
  auto human = run({"report", "--events", fixture("events/usage_events.jsonl").string()});
  EXPECT_NE(human.out.find("Minutes"), std::string::npos) << human.out;
}

}  // namespace
}  // namespace objexplore::cli
