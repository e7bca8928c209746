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

#include <cstddef>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <shared_mutex>
#include <string>
#include <unordered_map>
#include <vector>

#include "json.hpp"
#include "objexplore/image.hpp"
#include "objexplore/records.hpp"
#include "objexplore/taxonomy.hpp"

namespace objexplore {

/// A generated canvas image and the composition that produced it.
struct GenerationRecord {
  std::string job_id;
  std::string session_id;
  std::string provider_id;
  nlohmann::json composition;
  std::vector<std::string> used_detection_ids;
  std::string image_path;  // relative to the catalog root
  std::string image_digest;
  std::string created_at;  // ISO-8601 UTC

  friend bool operator==(const GenerationRecord&, const GenerationRecord&) = default;
};

void to_json(nlohmann::json& j, const GenerationRecord& g);
void from_json(const nlohmann::json& j, GenerationRecord& g);

struct ObjectItem {
  Detection detection;
  ObjectCrop crop;
};

template <typename T>
struct Page {
  std::vector<T> items;
  std::optional<std::string> next_cursor;
  std::size_t total = 0;
};

struct ObjectQuery {
  std::optional<Category> category;
  std::optional<std::string> label;
  std::optional<std::string> cursor;
  std::size_t page_size = 24;
};

struct PaintingObject {
  Detection detection;
  std::optional<ObjectCrop> crop;
};

struct PaintingDetail {
  Artwork artwork;
  std::vector<PaintingObject> objects;  // descending confidence, then id
};

struct AuditReport {
  std::size_t artworks = 0;
  std::size_t detections = 0;
  std::size_t crops = 0;
  std::size_t generations = 0;
  std::vector<std::string> violations;

  bool ok() const { return violations.empty(); }
};

enum class PutResult { kInserted, kUnchanged };

/// Embedded single-node store for artworks, detections, crops and generated
/// images.
///
/// Records live in memory behind a reader/writer lock and are persisted as
/// append-only JSON-lines journals under the root directory; opening a
/// catalog replays them. Each put appends to the journal and updates every
/// index under the same exclusive lock, so readers see a record together
/// with its index entries or not at all.
///
/// Root layout:
///   artworks.jsonl detections.jsonl crops.jsonl generations.jsonl
///   crops/<Category>/<detection_id>.png (+ .sha256 sidecar)
///   generated/<job_id>.png
class Catalog {
 public:
  Catalog(std::filesystem::path root, const Taxonomy& taxonomy);

  Catalog(const Catalog&) = delete;
  Catalog& operator=(const Catalog&) = delete;

  const std::filesystem::path& root() const { return root_; }
  const Taxonomy& taxonomy() const { return taxonomy_; }

  // Writes. Identical re-puts are no-ops; a different record under an
  // existing id throws Error(kConflictingWrite). References must resolve
  // (Error(kDanglingReference)).
  PutResult put_artwork(const Artwork& a);
  PutResult put_detection(const Detection& d);
  PutResult put_crop(const ObjectCrop& c);
  PutResult put_generation(const GenerationRecord& g);

  /// Encodes `pixels` as PNG under crops/<Category>/, writes the digest
  /// sidecar and registers the crop record.
  std::pair<ObjectCrop, PutResult> store_crop(const Detection& d, const BoundingBox& crop_box,
                                              const Image& pixels);

  /// Writes generated/<job_id>.png and registers the record; fills in
  /// image_path and image_digest.
  GenerationRecord store_generation(GenerationRecord g, const Image& image);

  std::optional<Artwork> artwork(const std::string& id) const;
  std::optional<Detection> detection(const std::string& id) const;
  std::optional<ObjectCrop> crop(const std::string& detection_id) const;
  std::optional<GenerationRecord> generation(const std::string& job_id) const;

  std::vector<Artwork> artworks() const;      // ascending id
  std::vector<Detection> detections() const;  // ascending id
  std::size_t crop_count() const;

  /// Decodes a stored crop image. Throws Error(kNotFound).
  Image load_crop_image(const std::string& detection_id) const;
  std::filesystem::path crop_file(const std::string& detection_id) const;

  /// Browsable objects (detections with crops), descending confidence then
  /// ascending id, cursor-paginated.
  Page<ObjectItem> query_objects(const ObjectQuery& q) const;

  std::size_t count_objects(std::optional<Category> category) const;
  std::optional<ObjectItem> top_object(Category category) const;

  PaintingDetail get_painting_detail(const std::string& artwork_id) const;

  /// Full scan of referential integrity, index consistency and crop file
  /// digests.
  AuditReport audit() const;

  /// Writes records sorted by id plus image files into `dir`. Two catalogs
  /// holding the same records export byte-identical snapshots.
  void export_snapshot(const std::filesystem::path& dir) const;

  /// Restores a snapshot into an empty `root` and opens it.
  static std::unique_ptr<Catalog> import_snapshot(const std::filesystem::path& snapshot,
                                                  const std::filesystem::path& root,
                                                  const Taxonomy& taxonomy);

 private:
  struct RankKey {
    double confidence;
    std::string id;
    bool operator<(const RankKey& o) const {
      if (confidence != o.confidence) return confidence > o.confidence;
      return id < o.id;
    }
  };
  using RankedSet = std::set<RankKey>;

  void replay();
  PutResult apply_artwork(const Artwork& a, bool journal);
  PutResult apply_detection(const Detection& d, bool journal);
  PutResult apply_crop(const ObjectCrop& c, bool journal);
  PutResult apply_generation(const GenerationRecord& g, bool journal);
  void validate_detection(const Detection& d) const;
  std::string crop_relative_path(const Detection& d) const;

  std::filesystem::path root_;
  const Taxonomy& taxonomy_;
  mutable std::shared_mutex mu_;

  std::map<std::string, Artwork> artworks_;
  std::map<std::string, Detection> detections_;
  std::map<std::string, ObjectCrop> crops_;
  std::map<std::string, GenerationRecord> generations_;

  std::map<Category, RankedSet> by_category_;
  std::map<std::string, RankedSet> by_label_;
  std::map<std::string, std::set<std::string>> by_artwork_;
  // Detections that have crops.
  RankedSet browsable_;
  std::map<Category, RankedSet> browsable_by_category_;
  std::map<std::string, RankedSet> browsable_by_label_;
};

/// Advisory exclusive lock on <root>/LOCK for the lifetime of the object.
/// Throws Error(kLocked) when another process holds it.
class CatalogLock {
 public:
  explicit CatalogLock(const std::filesystem::path& root);
  ~CatalogLock();
  CatalogLock(const CatalogLock&) = delete;
  CatalogLock& operator=(const CatalogLock&) = delete;

 private:
  int fd_ = -1;
};

std::string encode_cursor(double confidence, const std::string& id);

}  // namespace objexplore
