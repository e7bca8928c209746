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

namespace objexplore {

/// Axis-aligned box in image pixels, origin top-left, y pointing down.
/// Coordinates are real-valued; zero-area boxes are legal.
struct BoundingBox {
  double x_min = 0;
  double y_min = 0;
  double x_max = 0;
  double y_max = 0;

  /// Throws Error(kInvalidBox) unless min <= max on both axes and all finite.
  static BoundingBox make(double x_min, double y_min, double x_max,
                          double y_max);

  bool valid() const;
  double width() const { return x_max - x_min; }
  double height() const { return y_max - y_min; }
  double area() const { return width() * height(); }

  friend bool operator==(const BoundingBox&, const BoundingBox&) = default;
};

std::optional<BoundingBox> intersection(const BoundingBox& a,
                                        const BoundingBox& b);

/// |a ∩ b| / |a ∪ b|, 0 when the union has no area.
double iou(const BoundingBox& a, const BoundingBox& b);

/// Clips to [0,width]x[0,height]. Throws Error(kEmptyAfterClamp) if nothing
/// with positive area remains.
BoundingBox clamp(const BoundingBox& b, double width, double height);

}  // namespace objexplore
