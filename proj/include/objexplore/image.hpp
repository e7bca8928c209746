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

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace objexplore {

/// 8-bit interleaved raster, 1 (gray/mask) or 3 (RGB) channels, row-major.
struct Image {
  int width = 0;
  int height = 0;
  int channels = 3;
  std::vector<std::uint8_t> pixels;

  Image() = default;
  Image(int w, int h, int c, std::uint8_t fill = 0);

  bool empty() const { return width == 0 || height == 0; }
  std::size_t index(int x, int y) const {
    return (static_cast<std::size_t>(y) * static_cast<std::size_t>(width) +
            static_cast<std::size_t>(x)) * static_cast<std::size_t>(channels);
  }
  std::uint8_t* at(int x, int y) { return pixels.data() + index(x, y); }
  const std::uint8_t* at(int x, int y) const { return pixels.data() + index(x, y); }

  /// Copy of the half-open region [x0,x1)x[y0,y1); must lie inside.
  Image region(int x0, int y0, int x1, int y1) const;

  friend bool operator==(const Image&, const Image&) = default;
};

/// SHA-256 over (width, height, channels, pixels); independent of the file
/// encoding so a decoded PNG reproduces it.
std::string pixel_digest(const Image& img);

/// Decodes PNG or JPEG. Throws Error(kUndecodable).
Image decode_image(std::span<const std::uint8_t> bytes);
/// Reads just the dimensions of a PNG or JPEG.
std::pair<int, int> probe_dimensions(std::span<const std::uint8_t> bytes);

/// Lossless, deterministic PNG (fixed compression, no timestamps).
std::vector<std::uint8_t> encode_png(const Image& img);

Image read_image(const std::filesystem::path& path);
void write_png(const std::filesystem::path& path, const Image& img);

}  // namespace objexplore
