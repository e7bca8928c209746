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

// Acceptance suite: one PASS/FAIL line per criterion. Exit status is the
// number of failed criteria.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <thread>
#include <string>
#include <vector>

#include "canvas_support.hpp"
#include "catalog_fixture.hpp"
#include "cli/cli.hpp"
#include "objexplore/canvas.hpp"
#include "objexplore/curation.hpp"
#include "objexplore/geometry.hpp"
#include "objexplore/log.hpp"
#include "objexplore/metrics.hpp"
#include "objexplore/taxonomy.hpp"
#include "objexplore/usage.hpp"
#include "oracles.hpp"
#include "random_instances.hpp"
#include "service_harness.hpp"
#include "test_server.hpp"
#include "test_util.hpp"

using namespace objexplore;
using nlohmann::json;
using testing_util::TempDir;

namespace {

using Clock = std::chrono::steady_clock;

class Checker {
 public:
  void expect(bool ok, const std::string& what) {
    ++checks_;
    if (!ok) failures_.push_back(what);
  }
  void note(const std::string& detail) { notes_.push_back(detail); }

  const std::vector<std::string>& failures() const { return failures_; }
  const std::vector<std::string>& notes() const { return notes_; }
  int checks() const { return checks_; }

 private:
  int checks_ = 0;
  std::vector<std::string> failures_;
  std::vector<std::string> notes_;
};

struct Criterion {
  std::string name;
  std::function<void(Checker&)> run;
};

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(const char* pattern, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, pattern, v);
  return buf;
}

// ---------------------------------------------------------------------------

void ap_oracle(Checker& c) {
  std::mt19937 rng(20240601);
  double worst = 0;
  auto start = Clock::now();
  for (int i = 0; i < 1000; ++i) {
    auto inst = testing_util::random_ap_instance(rng, 8, 12);
    for (double thr : coco_iou_thresholds()) {
      double got = average_precision(inst.preds, inst.gts, thr);
      double want = oracle::average_precision(inst.oracle_preds, inst.oracle_truths, thr);
      worst = std::max(worst, std::abs(got - want));
      c.expect(std::abs(got - want) <= 1e-9, "instance " + std::to_string(i) + " thr " + fmt("%.2f", thr) + ": " +
                            fmt("%.12f", got) + " vs oracle " + fmt("%.12f", want));
    }
  }
  double elapsed = seconds_since(start);
  c.expect(elapsed < 10.0, "runtime " + fmt("%.2f", elapsed) + " s >= 10 s");
  c.note("1000 instances x 10 thresholds, max |diff| " + fmt("%.1e", worst) + ", " +
         fmt("%.2f", elapsed) + " s");
}

void iou_correctness(Checker& c) {
  std::mt19937 rng(4242);
  std::uniform_int_distribution<int> coord(0, 40);
  int exact = 0;
  for (int i = 0; i < 100; ++i) {
    int v[8];
    for (int& x : v) x = coord(rng);
    if (v[0] > v[2]) std::swap(v[0], v[2]);
    if (v[1] > v[3]) std::swap(v[1], v[3]);
    if (v[4] > v[6]) std::swap(v[4], v[6]);
    if (v[5] > v[7]) std::swap(v[5], v[7]);
    BoundingBox a{double(v[0]), double(v[1]), double(v[2]), double(v[3])};
    BoundingBox b{double(v[4]), double(v[5]), double(v[6]), double(v[7])};
    double want = oracle::pixel_grid_iou(v[0], v[1], v[2], v[3], v[4], v[5], v[6], v[7]);
    if (iou(a, b) == want) {
      ++exact;
    } else {
      c.expect(false, "grid case " + std::to_string(i));
    }
  }
  c.expect(exact == 100, "pixel-grid exact matches " + std::to_string(exact) + "/100");

  std::uniform_real_distribution<double> u(-50, 150);
  for (int i = 0; i < 5000; ++i) {
    double p[8];
    for (double& x : p) x = u(rng);
    BoundingBox a{std::min(p[0], p[1]), std::min(p[2], p[3]), std::max(p[0], p[1]),
                  std::max(p[2], p[3])};
    BoundingBox b{std::min(p[4], p[5]), std::min(p[6], p[7]), std::max(p[4], p[5]),
                  std::max(p[6], p[7])};
    double ab = iou(a, b);
    c.expect(ab == iou(b, a), "symmetry");
    c.expect(ab >= 0.0 && ab <= 1.0, "range");
    if (a.area() > 0) c.expect(iou(a, a) == 1.0, "identity");
  }

  for (int i = 0; i < 300; ++i) {
    auto inst = testing_util::random_ap_instance(rng);
    double prev = 2.0;
    for (double thr : coco_iou_thresholds()) {
      double ap = average_precision(inst.preds, inst.gts, thr);
      c.expect(ap <= prev + 1e-12, "AP increased with threshold at " + fmt("%.2f", thr));
      prev = ap;
    }
  }
  c.note("100/100 grid cases exact, 5000 property pairs, 300 AP monotonicity runs");
}

// Reads the label table with plain string handling.
std::vector<std::pair<std::string, std::string>> oracle_label_pairs(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::vector<std::pair<std::string, std::string>> pairs;
  std::string line, block;
  auto trim = [](std::string s) {
    s.erase(0, s.find_first_not_of(" \t\r"));
    s.erase(s.find_last_not_of(" \t\r") + 1);
    return s;
  };
  while (std::getline(in, line)) {
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    if (line.front() == '[') {
      block = line.substr(1, line.size() - 2);
      continue;
    }
    if (block.empty() || block[0] == '@') continue;
    std::stringstream ss(line);
    std::string name;
    while (std::getline(ss, name, ',')) {
      name = trim(name);
      if (!name.empty()) pairs.emplace_back(name, block);
    }
  }
  return pairs;
}

void taxonomy_fidelity(Checker& c) {
  const auto path = testing_util::source_dir() / "data" / "taxonomy.txt";
  Taxonomy t = load_taxonomy_file(path);
  auto pairs = oracle_label_pairs(path);
  std::set<std::string> names, cats;
  for (const auto& [n, cat] : pairs) {
    names.insert(n);
    cats.insert(cat);
  }
  c.expect(cats.size() == 13 && t.categories().size() == 13,
           "categories " + std::to_string(t.categories().size()));
  c.expect(pairs.size() == 120 && t.entries().size() == 120,
           "pairs " + std::to_string(t.entries().size()) + " (oracle " + std::to_string(pairs.size()) + ")");

  const std::string prompt = build_prompt(t);
  std::vector<std::string> segments;
  for (std::size_t pos = 0;;) {
    auto next = prompt.find(". ", pos);
    segments.push_back(prompt.substr(pos, next == std::string::npos ? std::string::npos : next - pos));
    if (next == std::string::npos) break;
    pos = next + 2;
  }
  std::set<std::string> unique(segments.begin(), segments.end());
  c.expect(segments.size() == 119 && unique.size() == 119 && names.size() == 119,
           "prompt segments " + std::to_string(segments.size()) + ", unique " +
               std::to_string(unique.size()));
  c.expect(std::count(segments.begin(), segments.end(), "Bow") == 1, "Bow appears once");
  c.expect(unique == names, "prompt names equal table names");
  c.expect(parse_prompt(prompt) == t.unique_names(), "prompt round trip");
  c.expect(t.category_of("Bow") == Category::kWeaponry, "Bow resolves to Weaponry");
  for (const auto& [n, cat] : pairs) {
    c.expect(t.has_label(n, *parse_category(cat)), "pair " + n + "/" + cat);
  }
  c.note("13 categories, 120 pairs, 119 unique prompt names");
}

Detection synthetic_detection(int i, const std::string& label, double conf) {
  char id[16];
  std::snprintf(id, sizeof id, "d%07d", i);
  return {id, "A" + std::to_string(i % 97), label, Category::kAnimal,
          BoundingBox{0, 0, 10, 10}, conf};
}

std::set<std::string> ids_of(const std::vector<Detection>& v) {
  std::set<std::string> out;
  for (const auto& d : v) out.insert(d.id);
  return out;
}

// Top-k per label by descending confidence then ascending id.
std::set<std::string> oracle_subset(std::vector<Detection> dets, std::size_t k) {
  std::map<std::string, std::vector<Detection>> by_label;
  for (auto& d : dets) by_label[d.label].push_back(d);
  std::set<std::string> out;
  for (auto& [label, v] : by_label) {
    std::sort(v.begin(), v.end(), [](const Detection& a, const Detection& b) {
      return a.confidence != b.confidence ? a.confidence > b.confidence : a.id < b.id;
    });
    for (std::size_t i = 0; i < std::min(k, v.size()); ++i) out.insert(v[i].id);
  }
  return out;
}

void subset_selection(Checker& c) {
  std::mt19937 rng(120);
  std::uniform_int_distribution<int> count(0, 300);
  std::uniform_int_distribution<int> grid(0, 1000);
  std::vector<Detection> dets;
  std::map<std::string, int> counts;
  int next = 0;
  for (int l = 0; l < 120; ++l) {
    std::string label = "L" + std::to_string(l);
    counts[label] = count(rng);
    for (int i = 0; i < counts[label]; ++i) {
      dets.push_back(synthetic_detection(next++, label, grid(rng) / 1000.0));
    }
  }
  auto subset = select_subset(dets, {100});
  std::map<std::string, int> got;
  for (const auto& d : subset) ++got[d.label];
  for (const auto& [label, n] : counts) {
    int want = std::min(n, 100);
    int have = got.count(label) ? got[label] : 0;
    c.expect(have == want, label + ": " + std::to_string(have) + " != " + std::to_string(want));
  }
  c.expect(ids_of(subset) == oracle_subset(dets, 100), "selected ids equal oracle top-100");

  auto warped = dets;
  for (auto& d : warped) d.confidence = 0.01 + 0.5 * std::pow(d.confidence, 3.0);
  c.expect(ids_of(select_subset(warped, {100})) == ids_of(subset), "monotone rescaling invariance");

  std::vector<Detection> big;
  big.reserve(110000);
  std::uniform_int_distribution<int> label_of(0, 119);
  std::uniform_real_distribution<double> conf(0.25, 1.0);
  for (int i = 0; i < 110000; ++i) {
    big.push_back(synthetic_detection(i, "L" + std::to_string(label_of(rng)), conf(rng)));
  }
  auto start = Clock::now();
  auto stats = compute_stats(big, default_taxonomy());
  auto big_subset = select_subset(big, {100});
  double elapsed = seconds_since(start);
  c.expect(stats.total_detections == 110000, "stats total");
  c.expect(ids_of(big_subset) == oracle_subset(big, 100), "110k subset equals oracle");
  c.expect(elapsed < 5.0, "110k runtime " + fmt("%.3f", elapsed) + " s >= 5 s");
  c.note(std::to_string(dets.size()) + " seeded detections over 120 labels; 110000 in " +
         fmt("%.3f", elapsed) + " s");
}

void crop_exactness(Checker& c) {
  TempDir tmp;
  Catalog cat(tmp / "cat", default_taxonomy());
  std::mt19937 rng(50);
  const int sizes[][2] = {{97, 61}, {128, 128}, {33, 200}, {250, 40}, {64, 65}};
  int checked = 0;
  for (int img_i = 0; checked < 50; img_i = (img_i + 1) % 5) {
    const int w = sizes[img_i][0], h = sizes[img_i][1];
    Image src = testing_util::noise_image(w, h, static_cast<unsigned>(img_i + 1));
    Artwork a;
    a.id = "IMG" + std::to_string(img_i);
    a.title = "generated";
    a.image_ref = "/generated/" + a.id + ".png";
    a.image_width = w;
    a.image_height = h;
    cat.put_artwork(a);

    std::uniform_real_distribution<double> ux(-15.0, w + 15.0), uy(-15.0, h + 15.0);
    double x0 = ux(rng), x1 = ux(rng), y0 = uy(rng), y1 = uy(rng);
    if (x0 > x1) std::swap(x0, x1);
    if (y0 > y1) std::swap(y0, y1);
    BoundingBox box{x0, y0, x1, y1};
    Detection d{make_detection_id(a.id, "Skull", box, 0.5), a.id, "Skull", Category::kOccultism,
                box, 0.5};
    auto out = extract_crop(src, d, 1);
    if (out.skipped != SkipReason::kNone) continue;
    cat.put_detection(d);
    cat.store_crop(d, out.crop_box, *out.pixels);
    Image stored = cat.load_crop_image(d.id);

    const int cx0 = static_cast<int>(std::floor(std::max(0.0, x0)));
    const int cy0 = static_cast<int>(std::floor(std::max(0.0, y0)));
    const int cx1 = static_cast<int>(std::ceil(std::min<double>(w, x1)));
    const int cy1 = static_cast<int>(std::ceil(std::min<double>(h, y1)));
    bool same = stored.width == cx1 - cx0 && stored.height == cy1 - cy0 && stored.channels == 3;
    for (int y = cy0; same && y < cy1; ++y) {
      for (int x = cx0; same && x < cx1; ++x) {
        for (int ch = 0; ch < 3; ++ch) {
          same = same && stored.at(x - cx0, y - cy0)[ch] == src.at(x, y)[ch];
        }
      }
    }
    c.expect(same, "crop " + std::to_string(checked) + " differs from source region");
    ++checked;
  }
  c.expect(cat.audit().ok(), "catalog audit after storing crops");

  Catalog pipe(tmp / "pipe", default_taxonomy());
  testing_util::load_fixture(pipe, testing_util::fixture("pipeline"));
  PipelineConfig pc;
  pc.subset.k_per_label = 2;
  pc.workers = 2;
  auto r = run_pipeline(pipe, pc, make_image_loader(nullptr));
  // 12 detections over 3 labels; k=2 keeps 6. One clamps to nothing, two
  // fall under 32 px, three survive.
  c.expect(r.stats.total_detections == 12, "fixture detections");
  c.expect(r.subset_size == 6, "subset " + std::to_string(r.subset_size));
  c.expect(r.crops_written == 3, "crops " + std::to_string(r.crops_written));
  c.expect(r.skipped_too_small == 2, "too small " + std::to_string(r.skipped_too_small));
  c.expect(r.skipped_empty == 1, "empty " + std::to_string(r.skipped_empty));
  c.expect(r.new_items == 3, "new items " + std::to_string(r.new_items));
  pipe.export_snapshot(tmp / "snap1");
  auto rerun = run_pipeline(pipe, pc, make_image_loader(nullptr));
  pipe.export_snapshot(tmp / "snap2");
  c.expect(rerun.new_items == 0 && pipe.crop_count() == 3, "re-run inserted records");
  bool identical = true;
  for (const auto& e : std::filesystem::recursive_directory_iterator(tmp / "snap1")) {
    if (!e.is_regular_file()) continue;
    auto rel = std::filesystem::relative(e.path(), tmp / "snap1");
    identical = identical &&
                testing_util::read_text(e.path()) == testing_util::read_text(tmp / "snap2" / rel);
  }
  c.expect(identical, "snapshot changed after re-run");
  c.note("50 stored crops bit-exact; fixture stages 6 -> 3 written, 2 too small, 1 empty; re-run no-op");
}

std::vector<std::string> item_ids(const json& body) {
  std::vector<std::string> out;
  for (const auto& item : body["items"]) out.push_back(item["detection_id"]);
  return out;
}

void api_contract(Checker& c) {
  const auto golden_dir = testing_util::source_dir() / "tests" / "golden" / "api";
  {
    testing_util::ServiceHarness h;
    auto docs = testing_util::collect_api_documents(h);
    std::set<std::string> paths;
    for (const auto& d : docs) {
      std::ifstream in(golden_dir / d.file);
      c.expect(in.good() && json::parse(in, nullptr, false) == d.body, "golden " + d.file);
      paths.insert(d.method + " " + d.path);
    }
    std::ifstream idx(golden_dir / "index.json");
    c.expect(json::parse(idx, nullptr, false) == testing_util::document_index(docs), "golden index");

    TempDir live;
    testing_util::write_documents(docs, live.path());
    std::string cmd = std::string(OBJEXPLORE_PYTHON) + " " +
                      (testing_util::source_dir() / "tests/contract/validate_api.py").string() + " " +
                      (testing_util::source_dir() / "api/openapi.json").string() + " " +
                      live.path().string() + " > " + (live / "validate.log").string() + " 2>&1";
    int rc = std::string(OBJEXPLORE_PYTHON).empty() ? -1 : std::system(cmd.c_str());
    c.expect(rc == 0, "schema validation of live documents failed: " +
                          testing_util::read_text(live / "validate.log"));
    c.note(std::to_string(docs.size()) + " documents over " + std::to_string(paths.size()) +
           " operations match goldens and the OpenAPI schema");
  }

  testing_util::ServiceHarness h;
  auto cats = h.get("/categories");
  c.expect(cats.status == 200 && cats.body["categories"].size() == 13, "/categories has 13 entries");
  std::vector<std::string> names;
  for (const auto& e : cats.body["categories"]) names.push_back(e["category"]);
  std::vector<std::string> want;
  for (Category cat : all_categories()) want.emplace_back(to_string(cat));
  c.expect(names == want, "category names and order");

  // 24 synthetic skulls plus the fixture skull: 25 items.
  Artwork a;
  a.id = "SYN";
  a.title = "Synthetic";
  a.image_ref = "/nowhere.png";
  a.image_width = 100;
  a.image_height = 100;
  h.catalog().put_artwork(a);
  std::vector<std::string> added;
  for (int i = 0; i < 24; ++i) {
    BoundingBox box{double(i), 0, double(i) + 10, 10};
    double conf = 0.3 + (i % 3) * 0.1;
    Detection d{make_detection_id("SYN", "Skull", box, conf), "SYN", "Skull", Category::kOccultism,
                box, conf};
    h.catalog().put_detection(d);
    h.catalog().store_crop(d, {0, 0, 4, 4}, testing_util::noise_image(4, 4, i));
    added.push_back(d.id);
  }
  auto all = h.get("/objects?category=Occultism&label=Skull&page_size=100");
  auto full = item_ids(all.body);
  c.expect(all.body["total"] == 25 && full.size() == 25, "25-item fixture");
  for (int size = 1; size <= 7; ++size) {
    std::vector<std::string> seen;
    std::string cursor;
    int pages = 0;
    do {
      std::string q = "/objects?category=Occultism&label=Skull&page_size=" + std::to_string(size);
      if (!cursor.empty()) q += "&cursor=" + httplib::detail::encode_url(cursor);
      auto r = h.get(q);
      auto ids = item_ids(r.body);
      c.expect(r.status == 200 && ids.size() <= static_cast<std::size_t>(size), "page bound");
      seen.insert(seen.end(), ids.begin(), ids.end());
      cursor = r.body["next_cursor"].is_string() ? r.body["next_cursor"].get<std::string>() : "";
    } while (!cursor.empty() && ++pages < 100);
    c.expect(seen == full, "page size " + std::to_string(size) + " does not partition the list");
  }

  const std::string s1 = h.post("/sessions").body["session_id"];
  const std::string s2 = h.post("/sessions").body["session_id"];
  auto favs = [&](const std::string& s) {
    std::vector<std::string> out;
    auto reply = h.get("/sessions/" + s + "/favorites");
    for (const auto& f : reply.body["favorites"]) {
      out.push_back(f["detection_id"]);
    }
    return out;
  };
  h.post("/sessions/" + s1 + "/favorites/" + added[0]);
  h.post("/sessions/" + s1 + "/favorites/" + added[0]);
  h.post("/sessions/" + s1 + "/favorites/" + added[1]);
  c.expect(favs(s1) == std::vector<std::string>{added[0], added[1]}, "favorites idempotent and ordered");
  h.del("/sessions/" + s1 + "/favorites/" + added[0]);
  auto again = h.del("/sessions/" + s1 + "/favorites/" + added[0]);
  c.expect(again.status == 200 && favs(s1) == std::vector<std::string>{added[1]}, "remove idempotent");
  c.expect(favs(s2).empty(), "sessions isolated");

  auto vanitas = h.get("/paintings/VANITAS");
  std::multiset<std::string> labels;
  for (const auto& o : vanitas.body["objects"]) labels.insert(o["label"]);
  c.expect(labels == std::multiset<std::string>{"Lightning", "Paper", "Skeleton", "Skull", "Star"},
           "vanitas painting objects");
}

struct Visit {
  std::string screen;
  double seconds;
  std::optional<Category> category;
};

void usage_reports(Checker& c) {
  std::mt19937 rng(9);
  std::uniform_int_distribution<int> visits(1, 12), dwell(1, 900), screen(0, 5), cat(0, 12);
  std::vector<SessionEvent> events;
  std::map<std::string, std::map<std::string, double>> per_session;  // session -> screen -> total
  std::map<Category, std::size_t> category_visits;
  for (int s = 0; s < 25; ++s) {
    const std::string sid = "session-" + std::to_string(s);
    double t = 1000.0 * s;
    int n = visits(rng);
    for (int v = 0; v < n; ++v) {
      const std::string name(kScreens[screen(rng)]);
      std::optional<Category> category;
      if (name == "Category") {
        category = all_categories()[cat(rng)];
        ++category_visits[*category];
      }
      const double d = dwell(rng);
      events.push_back({sid, t, EventKind::kScreenEnter, name, category});
      events.push_back({sid, t + d, EventKind::kScreenLeave, name, std::nullopt});
      per_session[sid][name] += d;
      t += d + 1;
    }
  }
  std::shuffle(events.begin(), events.end(), rng);
  auto r = compute_usage(events);

  std::map<std::string, std::pair<double, int>> oracle;  // screen -> (sum of totals, sessions)
  for (const auto& [sid, screens] : per_session) {
    for (const auto& [name, total] : screens) {
      oracle[name].first += total;
      oracle[name].second += 1;
    }
  }
  for (const auto& [name, agg] : oracle) {
    const double want = agg.first / agg.second;
    const auto it = r.per_screen.find(name);
    c.expect(it != r.per_screen.end() && it->second.avg_seconds == want,
             name + " average " + (it == r.per_screen.end() ? "missing" : fmt("%.6f", it->second.avg_seconds)) +
                 " != " + fmt("%.6f", want));
  }
  c.expect(r.per_screen.size() == oracle.size(), "screen count");
  c.expect(r.category_visits == category_visits, "category visits");
  c.expect(r.unpaired_leaves == 0 && r.unclosed_enters == 0, "no pairing warnings");

  EventLog log(testing_util::fixture("events/usage_events.jsonl"));
  auto f = compute_usage(log.events());
  c.expect(f.per_screen.at("Home").avg_seconds == 20.0 && f.per_screen.at("Category").avg_seconds == 37.5 &&
               f.per_screen.at("Object").avg_seconds == 131.0 &&
               f.per_screen.at("Painting").avg_seconds == 123.0,
           "fixture per-screen averages");
  c.expect(f.category_visits == std::map<Category, std::size_t>{{Category::kAnimal, 2},
                                                                {Category::kOccultism, 1}},
           "fixture category visits");
  c.expect(format_duration(202) == "3 Minutes & 22 Seconds", "duration formatting");
  c.note(std::to_string(events.size()) + " shuffled synthetic events over 25 sessions plus the hand fixture");
}

void canvas_generation(Checker& c) {
  std::mt19937 rng(2020);
  MockOutpaintProvider mock;
  std::size_t total_masked = 0;
  for (int trial = 0; trial < 20; ++trial) {
    testing_util::MemoryCropSource crops;
    auto comp = testing_util::random_composition(rng, crops, 128);
    auto expected = oracle::rasterize(comp, crops);
    auto rendered = render_base(comp, crops);
    std::size_t want_unfilled = 0, got_unfilled = 0;
    for (std::size_t i = 0; i < expected.covered.size(); ++i) {
      want_unfilled += !expected.covered[i];
      got_unfilled += rendered.mask.pixels[i] == 255;
    }
    total_masked += got_unfilled;
    c.expect(want_unfilled == got_unfilled, "trial " + std::to_string(trial) + " mask count " +
                                                std::to_string(got_unfilled) + " vs " +
                                                std::to_string(want_unfilled));

    auto first = generate(mock, comp, crops);
    auto second = generate(mock, comp, crops);
    c.expect(encode_png(first.image) == encode_png(second.image),
             "trial " + std::to_string(trial) + " not byte-deterministic");
    bool preserved = true;
    for (int y = 0; y < comp.side; ++y) {
      for (int x = 0; x < comp.side; ++x) {
        if (!expected.covered[static_cast<std::size_t>(y) * comp.side + x]) continue;
        for (int ch = 0; ch < 3; ++ch) {
          preserved = preserved && first.image.at(x, y)[ch] == expected.base.at(x, y)[ch];
        }
      }
    }
    c.expect(preserved, "trial " + std::to_string(trial) + " placed pixels altered");
  }
  c.note("20 random compositions, " + std::to_string(total_masked) + " unfilled pixels checked");
}

struct CliRun {
  int code;
  json doc;
};

CliRun cli(const std::vector<std::string>& args,
           std::function<void(httplib::Server&, int)> on_listening = {}) {
  std::ostringstream out, err;
  cli::CliContext ctx{[](const std::string&) { return std::optional<std::string>(); }, out, err,
                      std::move(on_listening)};
  std::vector<std::string> full{"--output", "machine"};
  full.insert(full.end(), args.begin(), args.end());
  int code = cli::run_cli(full, ctx);
  return {code, json::parse(out.str(), nullptr, false)};
}

void primary_only(Checker& c) {
  const auto src = testing_util::source_dir();
  for (const char* dir : {"webapp", "detector_sidecar", "sidecar"}) {
    c.expect(!std::filesystem::exists(src / dir), std::string("secondary directory present: ") + dir);
  }
  const auto fixture = testing_util::fixture("pipeline");
  TempDir tmp;
  const std::string a = (tmp / "imported").string(), b = (tmp / "detected").string();

  c.expect(cli({"--catalog", a, "ingest", "--fixture", (fixture / "artworks.jsonl").string()}).code == 0,
           "ingest");
  c.expect(cli({"--catalog", a, "import-detections", "--file", (fixture / "detections.jsonl").string()})
                   .code == 0,
           "import-detections");
  auto curated = cli({"--catalog", a, "curate"});
  c.expect(curated.code == 0 && curated.doc["result"]["crops_written"].get<int>() > 0, "curate imported");

  testing_util::TestServer detector;
  std::atomic<int> requests{0};
  detector.server().Post("/detect", [&](const httplib::Request& req, httplib::Response& res) {
    ++requests;
    auto body = json::parse(req.body, nullptr, false);
    bool inline_image = body.is_object() && body["image"].contains("base64");
    res.status = inline_image ? 200 : 400;
    res.set_content(json{{"detections",
                          {{{"label", "Skull"}, {"box", {2, 2, 60, 50}}, {"confidence", 0.9}},
                           {{"label", "Cat"}, {"box", {10, 5, 70, 45}}, {"confidence", 0.6}},
                           {{"label", "Star"}, {"box", {0, 0, 5, 5}}, {"confidence", 0.1}}}}}
                        .dump(),
                    "application/json");
  });
  detector.start();
  c.expect(cli({"--catalog", b, "ingest", "--fixture", (fixture / "artworks.jsonl").string()}).code == 0,
           "ingest for detector run");
  auto detected = cli({"--catalog", b, "detect", "--detector-url", detector.url()});
  c.expect(detected.code == 0 && detected.doc["result"]["inserted"] == 6 &&
               detected.doc["result"]["below_cutoff"] == 3,
           "stub detector run: " + detected.doc.dump());
  c.expect(requests == 3, "detector requests " + std::to_string(requests.load()));
  auto curated_b = cli({"--catalog", b, "curate"});
  c.expect(curated_b.code == 0 && curated_b.doc["result"]["crops_written"].get<int>() > 0,
           "curate detected");

  std::string status;
  int image_status = 0;
  auto served = cli({"--catalog", a, "serve", "--port", "0"}, [&](httplib::Server& server, int port) {
    httplib::Client client("127.0.0.1", port);
    auto post = [&](const std::string& path, const json& body) {
      auto r = client.Post(path, body.dump(), "application/json");
      return r ? json::parse(r->body, nullptr, false) : json();
    };
    std::string session = post("/sessions", json::object()).value("session_id", "");
    auto objects = json::parse(client.Get("/home")->body, nullptr, false);
    std::string object = objects["examples"][0]["detection_id"];
    post("/sessions/" + session + "/favorites/" + object, json::object());
    json comp{{"side", 256},
              {"prompt", "a calm harbour at dusk"},
              {"placements", {{{"detection_id", object}, {"x", 40}, {"y", 40}}}}};
    std::string job = post("/sessions/" + session + "/canvas", comp).value("job_id", "");
    for (int i = 0; i < 300 && status != "done" && status != "failed"; ++i) {
      auto r = client.Get("/generations/" + job);
      status = r ? json::parse(r->body, nullptr, false).value("status", "") : "";
      if (status != "done") std::this_thread::sleep_for(std::chrono::milliseconds(50));
    }
    if (auto img = client.Get("/generations/" + job + "/image")) image_status = img->status;
    server.stop();
  });
  c.expect(served.code == 0, "serve exit " + std::to_string(served.code));
  c.expect(status == "done" && image_status == 200, "mock generation status " + status);
  c.note("file import, stub detector and mock outpainting only");
}

}  // namespace

int main() {
  logger()->set_level(spdlog::level::warn);
  const std::vector<Criterion> criteria{
      {"ap_oracle_equivalence", ap_oracle},
      {"iou_correctness", iou_correctness},
      {"taxonomy_fidelity", taxonomy_fidelity},
      {"subset_selection", subset_selection},
      {"crop_exactness", crop_exactness},
      {"api_contract", api_contract},
      {"usage_reports", usage_reports},
      {"canvas_generation", canvas_generation},
      {"primary_without_secondary", primary_only},
  };
  int failed = 0;
  for (const auto& crit : criteria) {
    Checker c;
    std::string error;
    try {
      crit.run(c);
    } catch (const std::exception& e) {
      error = e.what();
    }
    const bool ok = error.empty() && c.failures().empty();
    failed += !ok;
    std::cout << (ok ? "PASS " : "FAIL ") << crit.name << " (" << c.checks() << " checks)";
    for (const auto& n : c.notes()) std::cout << " " << n;
    std::cout << "\n";
    if (!error.empty()) std::cout << "  exception: " << error << "\n";
    for (std::size_t i = 0; i < std::min<std::size_t>(c.failures().size(), 5); ++i) {
      std::cout << "  " << c.failures()[i] << "\n";
    }
    if (c.failures().size() > 5) std::cout << "  ... " << c.failures().size() - 5 << " more\n";
  }
  std::cout << (criteria.size() - failed) << "/" << criteria.size() << " criteria passed\n";
  return failed;
}
