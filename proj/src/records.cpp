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

#include "objexplore/records.hpp"

#include <cstdio>

#include "objexplore/digest.hpp"
#include "objexplore/error.hpp"

namespace objexplore {
namespace {

std::string exact(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

std::string make_detection_id(const std::string& artwork_id,
                              const std::string& label, const BoundingBox& box,
                              double confidence) {
  std::string key = artwork_id;
  key += '\x1f';
  key += label;
  for (double v : {box.x_min, box.y_min, box.x_max, box.y_max, confidence}) {
    key += '\x1f';
    key += exact(v);
  }
  return sha256_hex(key).substr(0, 16);
}

void to_json(nlohmann::json& j, const BoundingBox& b) {
  j = nlohmann::json::array({b.x_min, b.y_min, b.x_max, b.y_max});
}

void from_json(const nlohmann::json& j, BoundingBox& b) {
  if (!j.is_array() || j.size() != 4) {
    throw Error(ErrorCode::kInvalidBox, "box must be [x_min, y_min, x_max, y_max]");
  }
  b = BoundingBox::make(j[0].get<double>(), j[1].get<double>(),
                        j[2].get<double>(), j[3].get<double>());
}

void to_json(nlohmann::json& j, const Artwork& a) {
  j = nlohmann::json{{"id", a.id},
                     {"title", a.title},
                     {"artist", a.artist},
                     {"technique", a.technique},
                     {"image_ref", a.image_ref},
                     {"image_width", a.image_width},
                     {"image_height", a.image_height},
                     {"palette", a.palette}};
  if (a.production_year) {
    j["production_year"] = {{"start", a.production_year->start},
                            {"end", a.production_year->end}};
  } else {
    j["production_year"] = nullptr;
  }
}

void from_json(const nlohmann::json& j, Artwork& a) {
  a.id = j.at("id").get<std::string>();
  a.title = j.value("title", "");
  a.artist = j.value("artist", "");
  a.technique = j.value("technique", "");
  a.image_ref = j.value("image_ref", "");
  a.image_width = j.value("image_width", 0);
  a.image_height = j.value("image_height", 0);
  a.palette = j.value("palette", std::vector<std::string>{});
  a.production_year.reset();
  if (auto it = j.find("production_year"); it != j.end() && !it->is_null()) {
    a.production_year = YearRange{it->at("start").get<int>(),
                                  it->at("end").get<int>()};
  }
}

void to_json(nlohmann::json& j, const Detection& d) {
  j = nlohmann::json{{"id", d.id},
                     {"artwork_id", d.artwork_id},
                     {"label", d.label},
                     {"box", d.box},
                     {"confidence", d.confidence}};
  if (d.category) {
    j["category"] = std::string(to_string(*d.category));
  } else {
    j["category"] = nullptr;
  }
}

void from_json(const nlohmann::json& j, Detection& d) {
  d.id = j.at("id").get<std::string>();
  d.artwork_id = j.at("artwork_id").get<std::string>();
  d.label = j.at("label").get<std::string>();
  d.box = j.at("box").get<BoundingBox>();
  d.confidence = j.at("confidence").get<double>();
  d.category.reset();
  if (auto it = j.find("category"); it != j.end() && !it->is_null()) {
    d.category = parse_category(it->get<std::string>());
    if (!d.category) {
      throw Error(ErrorCode::kUnknownCategory,
                  "unknown category " + it->get<std::string>());
    }
  }
}

void to_json(nlohmann::json& j, const ObjectCrop& c) {
  j = nlohmann::json{{"detection_id", c.detection_id},
                     {"crop_box", c.crop_box},
                     {"width", c.width},
                     {"height", c.height},
                     {"pixel_digest", c.pixel_digest},
                     {"storage_path", c.storage_path}};
}

void from_json(const nlohmann::json& j, ObjectCrop& c) {
  c.detection_id = j.at("detection_id").get<std::string>();
  c.crop_box = j.at("crop_box").get<BoundingBox>();
  c.width = j.at("width").get<int>();
  c.height = j.at("height").get<int>();
  c.pixel_digest = j.at("pixel_digest").get<std::string>();
  c.storage_path = j.at("storage_path").get<std::string>();
}

}  // namespace objexplore
