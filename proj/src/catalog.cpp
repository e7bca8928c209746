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

#include "objexplore/catalog.hpp"

#include <cstdio>
#include <cstdlib>
#include <mutex>

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include "objexplore/digest.hpp"
#include "objexplore/error.hpp"
#include "util.hpp"

namespace objexplore {
namespace {

using nlohmann::json;

constexpr std::string_view kArtworksFile = "artworks.jsonl";
constexpr std::string_view kDetectionsFile = "detections.jsonl";
constexpr std::string_view kCropsFile = "crops.jsonl";
constexpr std::string_view kGenerationsFile = "generations.jsonl";
constexpr std::string_view kSnapshotFormat = "objexplore-snapshot 1\n";
constexpr std::string_view kCursorPrefix = "c1|";

template <typename Map>
std::vector<typename Map::mapped_type> values_of(const Map& m) {
  std::vector<typename Map::mapped_type> out;
  out.reserve(m.size());
  for (const auto& [k, v] : m) out.push_back(v);
  return out;
}

std::pair<double, std::string> decode_cursor(const std::string& token) {
  auto invalid = [] { return Error(ErrorCode::kInvalidCursor, "invalid cursor"); };
  std::string raw;
  try {
    auto bytes = base64_decode(token);
    raw.assign(bytes.begin(), bytes.end());
  } catch (const Error&) {
    throw invalid();
  }
  if (raw.rfind(kCursorPrefix, 0) != 0) throw invalid();
  raw.erase(0, kCursorPrefix.size());
  auto bar = raw.find('|');
  if (bar == std::string::npos || bar + 1 >= raw.size()) throw invalid();
  std::string num = raw.substr(0, bar);
  char* end = nullptr;
  double conf = std::strtod(num.c_str(), &end);
  if (end != num.c_str() + num.size() || num.empty()) throw invalid();
  return {conf, raw.substr(bar + 1)};
}

void write_jsonl(const std::filesystem::path& path, const std::vector<json>& rows) {
  std::string out;
  for (const auto& r : rows) {
    out += r.dump();
    out += '\n';
  }
  detail::write_atomic(path, out);
}

void copy_into(const std::filesystem::path& from_root, const std::filesystem::path& to_root,
               const std::string& rel) {
  auto dst = to_root / rel;
  std::filesystem::create_directories(dst.parent_path());
  std::filesystem::copy_file(from_root / rel, dst,
                             std::filesystem::copy_options::overwrite_existing);
}

}  // namespace

std::string encode_cursor(double confidence, const std::string& id) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%a", confidence);
  std::string raw = std::string(kCursorPrefix) + buf + "|" + id;
  return base64_encode(std::span<const std::uint8_t>(
      reinterpret_cast<const std::uint8_t*>(raw.data()), raw.size()));
}

void to_json(json& j, const GenerationRecord& g) {
  j = json{{"job_id", g.job_id},
           {"session_id", g.session_id},
           {"provider_id", g.provider_id},
           {"composition", g.composition},
           {"used_detection_ids", g.used_detection_ids},
           {"image_path", g.image_path},
           {"image_digest", g.image_digest},
           {"created_at", g.created_at}};
}

void from_json(const json& j, GenerationRecord& g) {
  g.job_id = j.at("job_id").get<std::string>();
  g.session_id = j.at("session_id").get<std::string>();
  g.provider_id = j.at("provider_id").get<std::string>();
  g.composition = j.at("composition");
  g.used_detection_ids = j.at("used_detection_ids").get<std::vector<std::string>>();
  g.image_path = j.at("image_path").get<std::string>();
  g.image_digest = j.at("image_digest").get<std::string>();
  g.created_at = j.at("created_at").get<std::string>();
}

// ---------------------------------------------------------------------------

Catalog::Catalog(std::filesystem::path root, const Taxonomy& taxonomy)
    : root_(std::move(root)), taxonomy_(taxonomy) {
  std::filesystem::create_directories(root_);
  replay();
}

void Catalog::replay() {
  auto each = [this](std::string_view file, auto&& apply) {
    auto path = root_ / file;
    if (!std::filesystem::exists(path)) return;
    std::string text = detail::read_text(path);
    int line_no = 0;
    for (std::string_view line : detail::split_lines(text)) {
      ++line_no;
      if (detail::trim(line).empty()) continue;
      try {
        apply(json::parse(line));
      } catch (const std::exception& e) {
        throw Error(ErrorCode::kIo, "corrupt journal " + path.string() + ":" +
                                        std::to_string(line_no) + ": " + e.what());
      }
    }
  };
  each(kArtworksFile, [this](const json& j) { apply_artwork(j.get<Artwork>(), false); });
  each(kDetectionsFile, [this](const json& j) { apply_detection(j.get<Detection>(), false); });
  each(kCropsFile, [this](const json& j) { apply_crop(j.get<ObjectCrop>(), false); });
  each(kGenerationsFile,
       [this](const json& j) { apply_generation(j.get<GenerationRecord>(), false); });
}

PutResult Catalog::put_artwork(const Artwork& a) {
  std::unique_lock lock(mu_);
  return apply_artwork(a, true);
}

PutResult Catalog::put_detection(const Detection& d) {
  std::unique_lock lock(mu_);
  return apply_detection(d, true);
}

PutResult Catalog::put_crop(const ObjectCrop& c) {
  std::unique_lock lock(mu_);
  return apply_crop(c, true);
}

PutResult Catalog::put_generation(const GenerationRecord& g) {
  std::unique_lock lock(mu_);
  return apply_generation(g, true);
}

PutResult Catalog::apply_artwork(const Artwork& a, bool journal) {
  if (a.id.empty()) throw Error(ErrorCode::kInvalidArgument, "artwork id is empty");
  if (a.image_width < 0 || a.image_height < 0) {
    throw Error(ErrorCode::kInvalidArgument, "negative image dimensions");
  }
  if (auto it = artworks_.find(a.id); it != artworks_.end()) {
    if (it->second == a) return PutResult::kUnchanged;
    throw Error(ErrorCode::kConflictingWrite, "conflicting write for artwork " + a.id);
  }
  if (journal) detail::append_line(root_ / kArtworksFile, json(a).dump());
  artworks_.emplace(a.id, a);
  by_artwork_.try_emplace(a.id);
  return PutResult::kInserted;
}

void Catalog::validate_detection(const Detection& d) const {
  if (d.id.empty()) throw Error(ErrorCode::kInvalidArgument, "detection id is empty");
  if (!d.box.valid()) throw Error(ErrorCode::kInvalidBox, "invalid box");
  if (!(d.confidence >= 0.0 && d.confidence <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "confidence outside [0,1]");
  }
  Category resolved = taxonomy_.category_of(d.label);
  if (d.category != resolved) {
    throw Error(ErrorCode::kLabelCategoryMismatch,
                "detection " + d.id + " category does not match its label");
  }
  if (!artworks_.count(d.artwork_id)) {
    throw Error(ErrorCode::kDanglingReference,
                "dangling reference: artwork " + d.artwork_id + " not in catalog");
  }
}

PutResult Catalog::apply_detection(const Detection& d, bool journal) {
  if (auto it = detections_.find(d.id); it != detections_.end()) {
    if (it->second == d) return PutResult::kUnchanged;
    throw Error(ErrorCode::kConflictingWrite, "conflicting write for detection " + d.id);
  }
  validate_detection(d);
  if (journal) detail::append_line(root_ / kDetectionsFile, json(d).dump());
  detections_.emplace(d.id, d);
  RankKey key{d.confidence, d.id};
  by_category_[*d.category].insert(key);
  by_label_[d.label].insert(key);
  by_artwork_[d.artwork_id].insert(d.id);
  return PutResult::kInserted;
}

PutResult Catalog::apply_crop(const ObjectCrop& c, bool journal) {
  if (auto it = crops_.find(c.detection_id); it != crops_.end()) {
    if (it->second == c) return PutResult::kUnchanged;
    throw Error(ErrorCode::kConflictingWrite, "conflicting write for crop " + c.detection_id);
  }
  auto det = detections_.find(c.detection_id);
  if (det == detections_.end()) {
    throw Error(ErrorCode::kDanglingReference,
                "dangling reference: detection " + c.detection_id + " not in catalog");
  }
  if (journal) detail::append_line(root_ / kCropsFile, json(c).dump());
  crops_.emplace(c.detection_id, c);
  const Detection& d = det->second;
  RankKey key{d.confidence, d.id};
  browsable_.insert(key);
  browsable_by_category_[*d.category].insert(key);
  browsable_by_label_[d.label].insert(key);
  return PutResult::kInserted;
}

PutResult Catalog::apply_generation(const GenerationRecord& g, bool journal) {
  if (auto it = generations_.find(g.job_id); it != generations_.end()) {
    if (it->second == g) return PutResult::kUnchanged;
    throw Error(ErrorCode::kConflictingWrite, "conflicting write for generation " + g.job_id);
  }
  for (const auto& id : g.used_detection_ids) {
    if (!detections_.count(id)) {
      throw Error(ErrorCode::kDanglingReference,
                  "dangling reference: detection " + id + " not in catalog");
    }
  }
  if (journal) detail::append_line(root_ / kGenerationsFile, json(g).dump());
  generations_.emplace(g.job_id, g);
  return PutResult::kInserted;
}

std::string Catalog::crop_relative_path(const Detection& d) const {
  return "crops/" + std::string(to_string(*d.category)) + "/" + d.id + ".png";
}

std::pair<ObjectCrop, PutResult> Catalog::store_crop(const Detection& d,
                                                     const BoundingBox& crop_box,
                                                     const Image& pixels) {
  if (!d.category) throw Error(ErrorCode::kInvalidArgument, "detection has no category");
  ObjectCrop c;
  c.detection_id = d.id;
  c.crop_box = crop_box;
  c.width = pixels.width;
  c.height = pixels.height;
  c.pixel_digest = pixel_digest(pixels);
  c.storage_path = crop_relative_path(d);

  std::unique_lock lock(mu_);
  if (auto it = crops_.find(d.id); it != crops_.end()) {
    if (it->second == c) return {c, PutResult::kUnchanged};
    throw Error(ErrorCode::kConflictingWrite, "conflicting write for crop " + d.id);
  }
  if (!detections_.count(d.id)) {
    throw Error(ErrorCode::kDanglingReference,
                "dangling reference: detection " + d.id + " not in catalog");
  }
  write_png(root_ / c.storage_path, pixels);
  detail::write_atomic(root_ / (c.storage_path + ".sha256"), c.pixel_digest + "\n");
  return {c, apply_crop(c, true)};
}

GenerationRecord Catalog::store_generation(GenerationRecord g, const Image& image) {
  g.image_path = "generated/" + g.job_id + ".png";
  g.image_digest = pixel_digest(image);
  std::unique_lock lock(mu_);
  if (generations_.count(g.job_id)) {
    throw Error(ErrorCode::kConflictingWrite, "generation " + g.job_id + " already stored");
  }
  write_png(root_ / g.image_path, image);
  apply_generation(g, true);
  return g;
}

std::optional<Artwork> Catalog::artwork(const std::string& id) const {
  std::shared_lock lock(mu_);
  auto it = artworks_.find(id);
  if (it == artworks_.end()) return std::nullopt;
  return it->second;
}

std::optional<Detection> Catalog::detection(const std::string& id) const {
  std::shared_lock lock(mu_);
  auto it = detections_.find(id);
  if (it == detections_.end()) return std::nullopt;
  return it->second;
}

std::optional<ObjectCrop> Catalog::crop(const std::string& detection_id) const {
  std::shared_lock lock(mu_);
  auto it = crops_.find(detection_id);
  if (it == crops_.end()) return std::nullopt;
  return it->second;
}

std::optional<GenerationRecord> Catalog::generation(const std::string& job_id) const {
  std::shared_lock lock(mu_);
  auto it = generations_.find(job_id);
  if (it == generations_.end()) return std::nullopt;
  return it->second;
}

std::vector<Artwork> Catalog::artworks() const {
  std::shared_lock lock(mu_);
  return values_of(artworks_);
}

std::vector<Detection> Catalog::detections() const {
  std::shared_lock lock(mu_);
  return values_of(detections_);
}

std::size_t Catalog::crop_count() const {
  std::shared_lock lock(mu_);
  return crops_.size();
}

std::filesystem::path Catalog::crop_file(const std::string& detection_id) const {
  auto c = crop(detection_id);
  if (!c) throw Error(ErrorCode::kNotFound, "no crop for detection " + detection_id);
  return root_ / c->storage_path;
}

Image Catalog::load_crop_image(const std::string& detection_id) const {
  return read_image(crop_file(detection_id));
}

Page<ObjectItem> Catalog::query_objects(const ObjectQuery& q) const {
  if (q.page_size == 0) throw Error(ErrorCode::kInvalidArgument, "page_size must be >= 1");
  std::shared_lock lock(mu_);

  static const RankedSet kEmpty;
  const RankedSet* source = &browsable_;
  if (q.label) {
    if (!taxonomy_.contains(*q.label)) {
      throw Error(ErrorCode::kUnknownLabel, "unknown label \"" + *q.label + "\"");
    }
    if (q.category && !taxonomy_.has_label(*q.label, *q.category)) {
      throw Error(ErrorCode::kLabelCategoryMismatch,
                  "label \"" + *q.label + "\" is not in category " +
                      std::string(to_string(*q.category)));
    }
    // A shared label name browses under the category it resolves to.
    if (q.category && taxonomy_.category_of(*q.label) != *q.category) {
      source = &kEmpty;
    } else {
      auto it = browsable_by_label_.find(*q.label);
      source = it == browsable_by_label_.end() ? &kEmpty : &it->second;
    }
  } else if (q.category) {
    auto it = browsable_by_category_.find(*q.category);
    source = it == browsable_by_category_.end() ? &kEmpty : &it->second;
  }

  auto pos = source->begin();
  if (q.cursor) {
    auto [conf, id] = decode_cursor(*q.cursor);
    pos = source->upper_bound(RankKey{conf, id});
  }
  Page<ObjectItem> page;
  page.total = source->size();
  for (; pos != source->end() && page.items.size() < q.page_size; ++pos) {
    page.items.push_back({detections_.at(pos->id), crops_.at(pos->id)});
  }
  if (pos != source->end() && !page.items.empty()) {
    const auto& last = page.items.back().detection;
    page.next_cursor = encode_cursor(last.confidence, last.id);
  }
  return page;
}

std::size_t Catalog::count_objects(std::optional<Category> category) const {
  std::shared_lock lock(mu_);
  if (!category) return browsable_.size();
  auto it = browsable_by_category_.find(*category);
  return it == browsable_by_category_.end() ? 0 : it->second.size();
}

std::optional<ObjectItem> Catalog::top_object(Category category) const {
  std::shared_lock lock(mu_);
  auto it = browsable_by_category_.find(category);
  if (it == browsable_by_category_.end() || it->second.empty()) return std::nullopt;
  const auto& id = it->second.begin()->id;
  return ObjectItem{detections_.at(id), crops_.at(id)};
}

PaintingDetail Catalog::get_painting_detail(const std::string& artwork_id) const {
  std::shared_lock lock(mu_);
  auto art = artworks_.find(artwork_id);
  if (art == artworks_.end()) {
    throw Error(ErrorCode::kNotFound, "unknown artwork " + artwork_id);
  }
  PaintingDetail detail{art->second, {}};
  RankedSet ordered;
  for (const auto& id : by_artwork_.at(artwork_id)) {
    ordered.insert({detections_.at(id).confidence, id});
  }
  for (const auto& key : ordered) {
    PaintingObject obj{detections_.at(key.id), std::nullopt};
    if (auto c = crops_.find(key.id); c != crops_.end()) obj.crop = c->second;
    detail.objects.push_back(std::move(obj));
  }
  return detail;
}

AuditReport Catalog::audit() const {
  std::shared_lock lock(mu_);
  AuditReport r;
  r.artworks = artworks_.size();
  r.detections = detections_.size();
  r.crops = crops_.size();
  r.generations = generations_.size();
  auto violation = [&r](std::string msg) { r.violations.push_back(std::move(msg)); };

  for (const auto& [id, d] : detections_) {
    if (!artworks_.count(d.artwork_id)) {
      violation("detection " + id + " references missing artwork " + d.artwork_id);
    }
    if (!taxonomy_.contains(d.label)) {
      violation("detection " + id + " has unknown label " + d.label);
    } else if (d.category != taxonomy_.category_of(d.label)) {
      violation("detection " + id + " category differs from taxonomy resolution");
    }
    if (make_detection_id(d.artwork_id, d.label, d.box, d.confidence) != id) {
      violation("detection " + id + " id is not the digest of its content");
    }
  }

  std::set<std::filesystem::path> referenced;
  for (const auto& [id, c] : crops_) {
    if (!detections_.count(id)) violation("crop " + id + " references missing detection");
    auto file = root_ / c.storage_path;
    referenced.insert(file.lexically_normal());
    referenced.insert((root_ / (c.storage_path + ".sha256")).lexically_normal());
    if (!std::filesystem::exists(file)) {
      violation("crop " + id + " file missing: " + c.storage_path);
      continue;
    }
    try {
      Image img = read_image(file);
      if (pixel_digest(img) != c.pixel_digest) violation("crop " + id + " digest mismatch");
      if (img.width != c.width || img.height != c.height) {
        violation("crop " + id + " dimensions mismatch");
      }
    } catch (const Error& e) {
      violation("crop " + id + " unreadable: " + e.what());
    }
    auto sidecar = root_ / (c.storage_path + ".sha256");
    if (!std::filesystem::exists(sidecar) ||
        detail::trim(detail::read_text(sidecar)) != c.pixel_digest) {
      violation("crop " + id + " sidecar missing or stale");
    }
  }
  if (std::filesystem::exists(root_ / "crops")) {
    for (const auto& entry : std::filesystem::recursive_directory_iterator(root_ / "crops")) {
      if (entry.is_regular_file() && !referenced.count(entry.path().lexically_normal())) {
        violation("unreferenced crop file " + entry.path().string());
      }
    }
  }

  for (const auto& [id, g] : generations_) {
    for (const auto& used : g.used_detection_ids) {
      if (!detections_.count(used)) {
        violation("generation " + id + " references missing detection " + used);
      }
    }
    if (!std::filesystem::exists(root_ / g.image_path)) {
      violation("generation " + id + " image missing");
    }
  }

  auto check_index = [&](const RankedSet& set, const std::string& name, bool needs_crop) {
    for (const auto& key : set) {
      auto it = detections_.find(key.id);
      if (it == detections_.end() || it->second.confidence != key.confidence) {
        violation("index " + name + " holds unresolved id " + key.id);
      } else if (needs_crop && !crops_.count(key.id)) {
        violation("index " + name + " lists " + key.id + " without a crop");
      }
    }
  };
  std::size_t indexed = 0;
  for (const auto& [c, set] : by_category_) {
    check_index(set, "by_category", false);
    indexed += set.size();
  }
  if (indexed != detections_.size()) violation("by_category size differs from detections");
  for (const auto& [l, set] : by_label_) check_index(set, "by_label", false);
  check_index(browsable_, "browsable", true);
  if (browsable_.size() != crops_.size()) violation("browsable index size differs from crops");
  for (const auto& [a, ids] : by_artwork_) {
    for (const auto& id : ids) {
      if (!detections_.count(id)) violation("index by_artwork holds unresolved id " + id);
    }
  }
  return r;
}

void Catalog::export_snapshot(const std::filesystem::path& dir) const {
  std::shared_lock lock(mu_);
  std::filesystem::create_directories(dir);
  detail::write_atomic(dir / "FORMAT", kSnapshotFormat);
  std::vector<json> rows;
  for (const auto& [id, a] : artworks_) rows.push_back(a);
  write_jsonl(dir / kArtworksFile, rows);
  rows.clear();
  for (const auto& [id, d] : detections_) rows.push_back(d);
  write_jsonl(dir / kDetectionsFile, rows);
  rows.clear();
  for (const auto& [id, c] : crops_) {
    rows.push_back(c);
    copy_into(root_, dir, c.storage_path);
    copy_into(root_, dir, c.storage_path + ".sha256");
  }
  write_jsonl(dir / kCropsFile, rows);
  rows.clear();
  for (const auto& [id, g] : generations_) {
    rows.push_back(g);
    copy_into(root_, dir, g.image_path);
  }
  write_jsonl(dir / kGenerationsFile, rows);
}

std::unique_ptr<Catalog> Catalog::import_snapshot(const std::filesystem::path& snapshot,
                                                  const std::filesystem::path& root,
                                                  const Taxonomy& taxonomy) {
  if (!std::filesystem::exists(snapshot / "FORMAT") ||
      detail::read_text(snapshot / "FORMAT") != kSnapshotFormat) {
    throw Error(ErrorCode::kMalformedDocument, "not a snapshot: " + snapshot.string());
  }
  if (std::filesystem::exists(root)) {
    for (const auto& e : std::filesystem::directory_iterator(root)) {
      if (e.path().filename() != "LOCK") {
        throw Error(ErrorCode::kInvalidArgument, "import target is not empty: " + root.string());
      }
    }
  }
  std::filesystem::create_directories(root);
  for (auto file : {kArtworksFile, kDetectionsFile, kCropsFile, kGenerationsFile}) {
    if (std::filesystem::exists(snapshot / file)) {
      std::filesystem::copy_file(snapshot / file, root / file);
    }
  }
  for (const char* sub : {"crops", "generated"}) {
    if (std::filesystem::exists(snapshot / sub)) {
      std::filesystem::copy(snapshot / sub, root / sub,
                            std::filesystem::copy_options::recursive);
    }
  }
  return std::make_unique<Catalog>(root, taxonomy);
}

// ---------------------------------------------------------------------------

CatalogLock::CatalogLock(const std::filesystem::path& root) {
  std::filesystem::create_directories(root);
  auto path = root / "LOCK";
  fd_ = ::open(path.c_str(), O_RDWR | O_CREAT | O_CLOEXEC, 0644);
  if (fd_ < 0) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  if (::flock(fd_, LOCK_EX | LOCK_NB) != 0) {
    ::close(fd_);
    fd_ = -1;
    throw Error(ErrorCode::kLocked, "catalog is locked by another writer: " + root.string());
  }
}

CatalogLock::~CatalogLock() {
  if (fd_ >= 0) {
    ::flock(fd_, LOCK_UN);
    ::close(fd_);
  }
}

}  // namespace objexplore
