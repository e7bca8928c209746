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

#include "objexplore/curation.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>
#include <unordered_map>

#include "objexplore/error.hpp"
#include "objexplore/log.hpp"

namespace objexplore {
namespace {

bool ranks_before(const Detection& a, const Detection& b) {
  if (a.confidence != b.confidence) return a.confidence > b.confidence;
  return a.id < b.id;
}

}  // namespace

CollectionStats compute_stats(std::span<const Detection> dets, const Taxonomy& taxonomy) {
  CollectionStats s;
  std::set<std::string> paintings;
  for (Category c : all_categories()) s.per_category[c];
  for (const auto& d : dets) {
    ++s.total_detections;
    paintings.insert(d.artwork_id);
    ++s.per_label[d.label];
    Category c = d.category ? *d.category : taxonomy.category_of(d.label);
    ++s.per_category[c].count;
  }
  s.paintings_with_detections = paintings.size();
  if (s.total_detections == 0) return s;

  const double total = static_cast<double>(s.total_detections);
  std::vector<std::size_t> counts;
  for (auto& [c, share] : s.per_category) {
    share.share = static_cast<double>(share.count) / total;
    counts.push_back(share.count);
  }
  std::sort(counts.rbegin(), counts.rend());
  std::size_t top4 = 0;
  for (std::size_t i = 0; i < std::min<std::size_t>(4, counts.size()); ++i) top4 += counts[i];
  s.top4_share = static_cast<double>(top4) / total;
  s.skewed = s.top4_share > kSkewThreshold;
  return s;
}

nlohmann::json to_json(const CollectionStats& s) {
  nlohmann::json per_category = nlohmann::json::object();
  for (const auto& [c, share] : s.per_category) {
    per_category[std::string(to_string(c))] = {{"count", share.count}, {"share", share.share}};
  }
  return {{"total_detections", s.total_detections},
          {"paintings_with_detections", s.paintings_with_detections},
          {"per_label", s.per_label},
          {"per_category", per_category},
          {"top4_share", s.top4_share},
          {"skewed", s.skewed}};
}

std::string format_stats(const CollectionStats& s) {
  std::ostringstream out;
  char buf[128];
  out << "detections: " << s.total_detections << " on " << s.paintings_with_detections
      << " paintings\n";
  std::vector<std::pair<Category, CategoryShare>> cats(s.per_category.begin(),
                                                       s.per_category.end());
  std::stable_sort(cats.begin(), cats.end(),
                   [](const auto& a, const auto& b) { return a.second.count > b.second.count; });
  for (const auto& [c, share] : cats) {
    std::snprintf(buf, sizeof buf, "  %-14s %8zu  %5.1f%%\n", std::string(to_string(c)).c_str(),
                  share.count, 100.0 * share.share);
    out << buf;
  }
  std::snprintf(buf, sizeof buf, "top-4 category share: %.1f%%%s\n", 100.0 * s.top4_share,
                s.skewed ? " (skewed)" : "");
  out << buf;
  return out.str();
}

std::vector<Detection> select_subset(std::span<const Detection> dets, const SubsetSpec& spec) {
  if (spec.k_per_label == 0) throw Error(ErrorCode::kInvalidArgument, "k_per_label must be >= 1");
  std::map<std::string, std::vector<const Detection*>> by_label;
  for (const auto& d : dets) by_label[d.label].push_back(&d);

  std::vector<Detection> out;
  for (auto& [label, group] : by_label) {
    std::size_t keep = std::min(spec.k_per_label, group.size());
    std::partial_sort(group.begin(), group.begin() + static_cast<std::ptrdiff_t>(keep),
                      group.end(),
                      [](const Detection* a, const Detection* b) { return ranks_before(*a, *b); });
    for (std::size_t i = 0; i < keep; ++i) out.push_back(*group[i]);
  }
  return out;
}

std::string_view to_string(SkipReason r) {
  switch (r) {
    case SkipReason::kNone: return "none";
    case SkipReason::kTooSmall: return "too small";
    case SkipReason::kEmptyAfterClamp: return "empty after clamp";
  }
  return "unknown";
}

CropOutcome extract_crop(const Image& image, const Detection& d, int min_side) {
  CropOutcome out;
  if (image.empty()) {
    out.skipped = SkipReason::kEmptyAfterClamp;
    return out;
  }
  BoundingBox clamped;
  try {
    clamped = clamp(d.box, image.width, image.height);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kEmptyAfterClamp) throw;
    out.skipped = SkipReason::kEmptyAfterClamp;
    return out;
  }
  int x0 = static_cast<int>(std::floor(clamped.x_min));
  int y0 = static_cast<int>(std::floor(clamped.y_min));
  int x1 = static_cast<int>(std::ceil(clamped.x_max));
  int y1 = static_cast<int>(std::ceil(clamped.y_max));
  out.crop_box = BoundingBox{double(x0), double(y0), double(x1), double(y1)};
  if (x1 - x0 < min_side || y1 - y0 < min_side) {
    out.skipped = SkipReason::kTooSmall;
    return out;
  }
  out.pixels = image.region(x0, y0, x1, y1);
  return out;
}

std::vector<std::string> compute_palette(const Image& image, std::size_t count) {
  std::vector<std::uint32_t> hist(4096, 0);
  const std::size_t n = static_cast<std::size_t>(image.width) * static_cast<std::size_t>(image.height);
  for (std::size_t i = 0; i < n; ++i) {
    const std::uint8_t* px = image.pixels.data() + i * static_cast<std::size_t>(image.channels);
    unsigned r = px[0] >> 4;
    unsigned g = image.channels == 3 ? px[1] >> 4 : r;
    unsigned b = image.channels == 3 ? px[2] >> 4 : r;
    ++hist[(r << 8) | (g << 4) | b];
  }
  std::vector<unsigned> bins;
  for (unsigned i = 0; i < hist.size(); ++i) {
    if (hist[i]) bins.push_back(i);
  }
  std::stable_sort(bins.begin(), bins.end(),
                   [&](unsigned a, unsigned b) { return hist[a] > hist[b]; });
  if (bins.size() > count) bins.resize(count);

  std::vector<std::string> out;
  for (unsigned bin : bins) {
    unsigned r = (bin >> 8) & 0xf, g = (bin >> 4) & 0xf, b = bin & 0xf;
    char buf[8];
    std::snprintf(buf, sizeof buf, "#%02x%02x%02x", r * 17, g * 17, b * 17);
    out.emplace_back(buf);
  }
  return out;
}

ImageLoader make_image_loader(ImageCache* cache) {
  return [cache](const Artwork& a) {
    if (cache) {
      Artwork copy = a;
      return read_image(cache->fetch(copy));
    }
    std::string ref = a.image_ref.rfind("file://", 0) == 0 ? a.image_ref.substr(7) : a.image_ref;
    return read_image(ref);
  };
}

PipelineReport run_pipeline(Catalog& catalog, const PipelineConfig& config,
                            const ImageLoader& load_image) {
  PipelineReport report;
  const std::vector<Detection> all = catalog.detections();
  report.stats = compute_stats(all, catalog.taxonomy());

  std::vector<Detection> subset = select_subset(all, config.subset);
  report.subset_size = subset.size();
  for (const auto& d : subset) ++report.kept_per_label[d.label];

  std::map<std::string, std::vector<const Detection*>> by_artwork;
  for (const auto& d : subset) by_artwork[d.artwork_id].push_back(&d);
  std::vector<std::pair<std::string, std::vector<const Detection*>>> work(by_artwork.begin(),
                                                                          by_artwork.end());

  std::mutex mu;
  std::set<std::string> paintings_with_crops;
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < work.size(); i = next++) {
      const auto& [artwork_id, dets] = work[i];
      std::optional<Image> image;
      std::string load_error;
      try {
        auto art = catalog.artwork(artwork_id);
        if (!art) throw Error(ErrorCode::kDanglingReference, "artwork missing");
        image = load_image(*art);
      } catch (const std::exception& e) {
        load_error = e.what();
      }
      for (const Detection* d : dets) {
        if (!image) {
          std::lock_guard lock(mu);
          ++report.failed;
          report.skips.push_back({d->id, "image unavailable: " + load_error});
          continue;
        }
        CropOutcome crop = extract_crop(*image, *d, config.min_side);
        if (crop.skipped != SkipReason::kNone) {
          std::lock_guard lock(mu);
          (crop.skipped == SkipReason::kTooSmall ? report.skipped_too_small
                                                 : report.skipped_empty)++;
          report.skips.push_back({d->id, std::string(to_string(crop.skipped))});
          continue;
        }
        auto [stored, result] = catalog.store_crop(*d, crop.crop_box, *crop.pixels);
        std::lock_guard lock(mu);
        ++report.crops_written;
        if (result == PutResult::kInserted) ++report.new_items;
        paintings_with_crops.insert(artwork_id);
      }
    }
  };

  unsigned workers = config.workers ? config.workers : std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, std::max<std::size_t>(1, work.size())));
  {
    std::vector<std::jthread> pool;
    for (unsigned i = 1; i < workers; ++i) pool.emplace_back(worker);
    worker();
  }
  report.paintings_with_crops = paintings_with_crops.size();
  std::sort(report.skips.begin(), report.skips.end(),
            [](const PipelineSkip& a, const PipelineSkip& b) { return a.detection_id < b.detection_id; });
  for (const auto& s : report.skips) {
    logger()->info("skipped crop {}: {}", s.detection_id, s.reason);
  }
  return report;
}

nlohmann::json to_json(const PipelineReport& r) {
  nlohmann::json skips = nlohmann::json::array();
  for (const auto& s : r.skips) skips.push_back({{"detection_id", s.detection_id}, {"reason", s.reason}});
  return {{"stats", to_json(r.stats)},
          {"subset_size", r.subset_size},
          {"kept_per_label", r.kept_per_label},
          {"crops_written", r.crops_written},
          {"skipped_too_small", r.skipped_too_small},
          {"skipped_empty", r.skipped_empty},
          {"failed", r.failed},
          {"new_items", r.new_items},
          {"paintings_with_crops", r.paintings_with_crops},
          {"skips", skips}};
}

std::string format_report(const PipelineReport& r) {
  std::ostringstream out;
  out << format_stats(r.stats);
  out << "subset: " << r.subset_size << " detections over " << r.kept_per_label.size()
      << " labels\n";
  out << "crops: " << r.crops_written << " written (" << r.new_items << " new) on "
      << r.paintings_with_crops << " paintings\n";
  out << "skipped: " << r.skipped_too_small << " too small, " << r.skipped_empty
      << " empty after clamp, " << r.failed << " image unavailable\n";
  return out.str();
}

}  // namespace objexplore
