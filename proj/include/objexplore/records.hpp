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

#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "objexplore/geometry.hpp"
#include "objexplore/taxonomy.hpp"

namespace objexplore {

struct YearRange {
  int start = 0;
  int end = 0;

  friend bool operator==(const YearRange&, const YearRange&) = default;
};

/// Collection metadata for one painting.
struct Artwork {
  std::string id;
  std::string title;
  std::string artist;
  std::optional<YearRange> production_year;
  std::string technique;
  std::string image_ref;
  int image_width = 0;   // 0 while unknown
  int image_height = 0;  // 0 while unknown
  std::vector<std::string> palette;  // "#rrggbb"

  bool dimensions_known() const { return image_width > 0 && image_height > 0; }

  friend bool operator==(const Artwork&, const Artwork&) = default;
};

/// One labeled box on one artwork.
struct Detection {
  std::string id;
  std::string artwork_id;
  std::string label;
  std::optional<Category> category;  // unset for evaluation-only inputs
  BoundingBox box;
  double confidence = 0;

  friend bool operator==(const Detection&, const Detection&) = default;
};

/// digest(artwork_id, label, box, confidence), 16 hex characters.
std::string make_detection_id(const std::string& artwork_id,
                              const std::string& label, const BoundingBox& box,
                              double confidence);

struct GroundTruthBox {
  std::string artwork_id;
  std::string label;
  BoundingBox box;
};

/// Stored cutout of one detection.
struct ObjectCrop {
  std::string detection_id;
  BoundingBox crop_box;  // integer-aligned, inside the source image
  int width = 0;
  int height = 0;
  std::string pixel_digest;
  std::string storage_path;  // relative to the catalog root

  friend bool operator==(const ObjectCrop&, const ObjectCrop&) = default;
};

void to_json(nlohmann::json& j, const BoundingBox& b);
void from_json(const nlohmann::json& j, BoundingBox& b);
void to_json(nlohmann::json& j, const Artwork& a);
void from_json(const nlohmann::json& j, Artwork& a);
void to_json(nlohmann::json& j, const Detection& d);
void from_json(const nlohmann::json& j, Detection& d);
void to_json(nlohmann::json& j, const ObjectCrop& c);
void from_json(const nlohmann::json& j, ObjectCrop& c);

}  // namespace objexplore
