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

#include <atomic>
#include <chrono>
#include <cstddef>
#include <filesystem>
#include <functional>
#include <istream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "objexplore/records.hpp"
#include "objexplore/taxonomy.hpp"

namespace objexplore {

// ---------------------------------------------------------------------------
// Collection metadata

/// Where each Artwork field lives in a collection record, as JSON pointers.
/// Deployments with a different schema override individual entries.
struct FieldMap {
  std::string id = "/id";
  std::string title = "/title";
  std::string artist = "/artist";
  std::string technique = "/technique";
  std::string image_ref = "/image_url";
  std::string year_start = "/production_year/start";
  std::string year_end = "/production_year/end";
  std::string image_width = "/image_width";
  std::string image_height = "/image_height";
  std::string palette = "/palette";
  std::string object_type = "/object_type";
};

struct CollectionConfig {
  // Live mode.
  std::string base_url;
  std::string api_key;
  std::string api_key_header = "X-Api-Key";
  std::string type_param = "object_type";
  std::string offset_param = "offset";
  std::string limit_param = "limit";
  std::string items_pointer = "/items";
  int page_size = 100;
  std::chrono::milliseconds timeout{10000};
  int max_attempts = 3;
  std::chrono::milliseconds base_backoff{200};

  // Fixture mode: a .jsonl file or a directory of them. Takes precedence
  // over base_url when set.
  std::filesystem::path fixture_path;

  FieldMap fields;
};

struct SkippedRecord {
  std::string id;  // record id when readable, else "<record N>"
  std::string reason;
};

struct FetchStats {
  std::size_t yielded = 0;
  std::size_t pages = 0;
  std::vector<SkippedRecord> skipped;
};

/// Normalizes one raw record. Throws Error(kMalformedDocument) when required
/// fields are missing or mistyped.
Artwork normalize_artwork(const nlohmann::json& record, const FieldMap& fields);

/// Streams artworks whose object type equals `object_type` (all records when
/// empty). Fixture mode yields in ascending id order; live mode paginates
/// until a short page. Malformed records are skipped and logged.
FetchStats fetch_artworks(const CollectionConfig& config, const std::string& object_type,
                          const std::function<void(Artwork)>& sink);

std::vector<Artwork> fetch_all_artworks(const CollectionConfig& config,
                                        const std::string& object_type,
                                        FetchStats* stats = nullptr);

// ---------------------------------------------------------------------------
// Image cache

/// Content-addressed image store: blobs are named by the SHA-256 of their
/// bytes, and a small ref file maps each image_ref to its blob.
class ImageCache {
 public:
  explicit ImageCache(std::filesystem::path dir);

  /// Returns the local blob for `a.image_ref`, downloading or copying it on
  /// first use. Fills in unknown image dimensions. Throws Error(kUndecodable)
  /// for bytes that are not a decodable image; nothing is cached then.
  std::filesystem::path fetch(Artwork& a);

  /// Number of remote transfers performed so far.
  std::size_t network_transfers() const { return transfers_.load(); }

  const std::filesystem::path& dir() const { return dir_; }

  std::chrono::milliseconds timeout{30000};
  int max_attempts = 3;
  std::chrono::milliseconds base_backoff{200};

 private:
  std::vector<std::uint8_t> download(const std::string& ref);

  std::filesystem::path dir_;
  std::atomic<std::size_t> transfers_{0};
};

// ---------------------------------------------------------------------------
// Detection records

struct RejectedRecord {
  int line = 0;
  std::string reason;
};

struct ImportResult {
  std::vector<Detection> detections;
  std::vector<RejectedRecord> rejected;
  std::size_t duplicates = 0;
};

/// Parses one detection record {"artwork_id","label","x_min","y_min",
/// "x_max","y_max","confidence"} without consulting a taxonomy.
Detection parse_detection_record(const nlohmann::json& record);

/// Line-delimited detection records, validated against the taxonomy.
/// Invalid records are rejected individually; identical records collapse
/// to one detection.
ImportResult import_detections(std::istream& in, const Taxonomy& taxonomy);
ImportResult import_detections(const std::filesystem::path& path, const Taxonomy& taxonomy);

/// Same record format, no taxonomy: for evaluation inputs.
std::vector<Detection> read_detection_records(const std::filesystem::path& path);

nlohmann::json to_record_json(const Detection& d);

// ---------------------------------------------------------------------------
// Detector protocol (POST /detect), documented in protocol/detector/README.md

struct DetectorEndpoint {
  std::string url;  // base URL; "/detect" is appended
  std::chrono::milliseconds timeout{60000};
  int max_attempts = 3;
  std::chrono::milliseconds base_backoff{200};
};

struct DetectorOutcome {
  std::vector<Detection> detections;
  std::size_t below_cutoff = 0;
  std::vector<std::string> dropped;  // boxes empty after clamping
};

/// Builds the request document. The image travels by URL when image_ref is
/// http(s), otherwise inline as base64 of `local_bytes`.
nlohmann::json make_detector_request(const Artwork& a,
                                     const std::vector<std::uint8_t>* local_bytes,
                                     const std::string& prompt, double cutoff);

/// Validates a response against the prompt's label set and converts it.
/// Throws Error(kProtocolViolation) for labels outside the prompt,
/// confidences outside [0,1] or a malformed document.
DetectorOutcome convert_detector_response(const nlohmann::json& response, const Artwork& a,
                                          const Taxonomy& taxonomy,
                                          const std::vector<std::string>& prompt_labels,
                                          double cutoff);

/// Full round trip. `a` must have known dimensions.
DetectorOutcome request_detections(const DetectorEndpoint& endpoint, const Artwork& a,
                                   const std::filesystem::path* local_image,
                                   const Taxonomy& taxonomy, double cutoff);

}  // namespace objexplore
