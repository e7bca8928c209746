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
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "objexplore/catalog.hpp"
#include "objexplore/image.hpp"
#include "objexplore/ingestion.hpp"
#include "objexplore/records.hpp"
#include "objexplore/taxonomy.hpp"

namespace objexplore {

// ---------------------------------------------------------------------------
// Distribution statistics

struct CategoryShare {
  std::size_t count = 0;
  double share = 0;  // count / total_detections
};

struct CollectionStats {
  std::size_t total_detections = 0;
  std::size_t paintings_with_detections = 0;
  std::map<std::string, std::size_t> per_label;
  std::map<Category, CategoryShare> per_category;
  double top4_share = 0;  // joint share of the four largest categories
  bool skewed = false;    // top4_share > kSkewThreshold
};

inline constexpr double kSkewThreshold = 0.70;

/// Categories come from each detection, or from the taxonomy when unset.
CollectionStats compute_stats(std::span<const Detection> dets, const Taxonomy& taxonomy);

nlohmann::json to_json(const CollectionStats& s);
std::string format_stats(const CollectionStats& s);

// ---------------------------------------------------------------------------
// Balanced subset

struct SubsetSpec {
  std::size_t k_per_label = 100;
};

/// Per label, the min(k, available) detections with the highest confidence
/// (ties: ascending id). Output is sorted by label, then rank.
std::vector<Detection> select_subset(std::span<const Detection> dets, const SubsetSpec& spec);

// ---------------------------------------------------------------------------
// Crops

inline constexpr int kDefaultMinSide = 32;

enum class SkipReason { kNone, kTooSmall, kEmptyAfterClamp };
std::string_view to_string(SkipReason r);

struct CropOutcome {
  BoundingBox crop_box;          // integer-aligned; meaningful when not skipped
  std::optional<Image> pixels;   // set unless skipped
  SkipReason skipped = SkipReason::kNone;
};

/// Clamps the detection box to the image, rounds outward to whole pixels and
/// copies that region verbatim. Skips (does not throw) when the clamped
/// region is empty or either side is below `min_side`.
CropOutcome extract_crop(const Image& image, const Detection& d, int min_side);

/// The six most frequent colors after quantizing each channel to 4 bits,
/// as "#rrggbb" with each nibble replicated (0xA -> 0xaa). Ties resolve to
/// the lower quantized value.
std::vector<std::string> compute_palette(const Image& image, std::size_t count = 6);

// ---------------------------------------------------------------------------
// Pipeline

struct PipelineConfig {
  SubsetSpec subset;
  int min_side = kDefaultMinSide;
  unsigned workers = 0;  // 0: hardware concurrency
};

struct PipelineSkip {
  std::string detection_id;
  std::string reason;
};

struct PipelineReport {
  CollectionStats stats;
  std::size_t subset_size = 0;
  std::map<std::string, std::size_t> kept_per_label;
  std::size_t crops_written = 0;      // crops present after this run
  std::size_t skipped_too_small = 0;
  std::size_t skipped_empty = 0;
  std::size_t failed = 0;             // image could not be loaded
  std::size_t new_items = 0;          // crop records inserted by this run
  std::size_t paintings_with_crops = 0;
  std::vector<PipelineSkip> skips;    // ascending detection id
};

using ImageLoader = std::function<Image(const Artwork&)>;

/// Loads local image_refs directly and remote ones through the cache.
ImageLoader make_image_loader(ImageCache* cache);

/// stats -> subset -> crops -> catalog registration. Re-running on an
/// unchanged catalog inserts nothing.
PipelineReport run_pipeline(Catalog& catalog, const PipelineConfig& config,
                            const ImageLoader& load_image);

nlohmann::json to_json(const PipelineReport& r);
std::string format_report(const PipelineReport& r);

}  // namespace objexplore
