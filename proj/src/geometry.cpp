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

#include "objexplore/geometry.hpp"

#include <algorithm>
#include <cmath>

#include "objexplore/error.hpp"

namespace objexplore {

BoundingBox BoundingBox::make(double x_min, double y_min, double x_max,
                              double y_max) {
  BoundingBox b{x_min, y_min, x_max, y_max};
  if (!b.valid()) throw Error(ErrorCode::kInvalidBox, "invalid box");
  return b;
}

bool BoundingBox::valid() const {
  return std::isfinite(x_min) && std::isfinite(y_min) && std::isfinite(x_max) &&
         std::isfinite(y_max) && x_min <= x_max && y_min <= y_max;
}

std::optional<BoundingBox> intersection(const BoundingBox& a,
                                        const BoundingBox& b) {
  BoundingBox r{std::max(a.x_min, b.x_min), std::max(a.y_min, b.y_min),
                std::min(a.x_max, b.x_max), std::min(a.y_max, b.y_max)};
  if (r.x_min > r.x_max || r.y_min > r.y_max) return std::nullopt;
  return r;
}

double iou(const BoundingBox& a, const BoundingBox& b) {
  auto inter = intersection(a, b);
  double inter_area = inter ? inter->area() : 0.0;
  double union_area = a.area() + b.area() - inter_area;
  if (union_area <= 0.0 || inter_area <= 0.0) return 0.0;
  return std::clamp(inter_area / union_area, 0.0, 1.0);
}

BoundingBox clamp(const BoundingBox& b, double width, double height) {
  if (!(width > 0) || !(height > 0)) {
    throw Error(ErrorCode::kInvalidArgument, "image size must be positive");
  }
  BoundingBox r{std::clamp(b.x_min, 0.0, width), std::clamp(b.y_min, 0.0, height),
                std::clamp(b.x_max, 0.0, width), std::clamp(b.y_max, 0.0, height)};
  if (!(r.width() > 0) || !(r.height() > 0)) {
    throw Error(ErrorCode::kEmptyAfterClamp, "empty after clamp");
  }
  return r;
}

}  // namespace objexplore
