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

#include <chrono>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "objexplore/catalog.hpp"
#include "objexplore/image.hpp"

namespace objexplore {

inline constexpr int kDefaultCanvasSide = 1024;

struct Placement {
  std::string detection_id;
  int x = 0;  // top-left corner in canvas pixels
  int y = 0;
  double scale = 1.0;

  friend bool operator==(const Placement&, const Placement&) = default;
};

struct CanvasComposition {
  int side = kDefaultCanvasSide;
  std::vector<Placement> placements;  // later entries render on top
  std::string prompt;

  friend bool operator==(const CanvasComposition&, const CanvasComposition&) = default;
};

void to_json(nlohmann::json& j, const Placement& p);
void from_json(const nlohmann::json& j, Placement& p);
void to_json(nlohmann::json& j, const CanvasComposition& c);
void from_json(const nlohmann::json& j, CanvasComposition& c);

struct CropSize {
  int width = 0;
  int height = 0;
};

class CropSource {
 public:
  virtual ~CropSource() = default;
  virtual std::optional<CropSize> size(const std::string& detection_id) const = 0;
  virtual Image pixels(const std::string& detection_id) const = 0;
};

class CatalogCropSource : public CropSource {
 public:
  explicit CatalogCropSource(const Catalog& catalog) : catalog_(catalog) {}
  std::optional<CropSize> size(const std::string& detection_id) const override;
  Image pixels(const std::string& detection_id) const override;

 private:
  const Catalog& catalog_;
};

/// Scaled extent of a crop edge: round to nearest, at least one pixel.
int scaled_extent(int extent, double scale);

CanvasComposition place(const CanvasComposition& comp, const CropSource& crops,
                        const std::string& detection_id, int x, int y, double scale);

/// Checks side, scales and bounds of every placement.
void validate(const CanvasComposition& comp, const CropSource& crops);

struct RenderedBase {
  Image base;  // RGB, white background
  Image mask;  // single channel: 255 unfilled, 0 covered by a placement
};

RenderedBase render_base(const CanvasComposition& comp, const CropSource& crops);

class OutpaintProvider {
 public:
  virtual ~OutpaintProvider() = default;
  virtual std::string id() const = 0;
  virtual int max_side() const = 0;
  virtual Image outpaint(const Image& base, const Image& mask, const std::string& prompt) = 0;
};

/// Fills unfilled pixels with the per-channel floor mean of the covered ones.
class MockOutpaintProvider : public OutpaintProvider {
 public:
  explicit MockOutpaintProvider(int max_side = 4096) : max_side_(max_side) {}
  std::string id() const override { return "mock"; }
  int max_side() const override { return max_side_; }
  Image outpaint(const Image& base, const Image& mask, const std::string& prompt) override;

 private:
  int max_side_;
};

struct OutpaintEndpoint {
  std::string url;
  std::string api_key;
  std::string api_key_header = "Authorization";
  std::chrono::milliseconds timeout{60000};
  int max_side = 1024;
};

class HttpOutpaintProvider : public OutpaintProvider {
 public:
  explicit HttpOutpaintProvider(OutpaintEndpoint endpoint) : endpoint_(std::move(endpoint)) {}
  std::string id() const override { return "http:" + endpoint_.url; }
  int max_side() const override { return endpoint_.max_side; }
  Image outpaint(const Image& base, const Image& mask, const std::string& prompt) override;

 private:
  OutpaintEndpoint endpoint_;
};

nlohmann::json make_outpaint_request(const Image& base, const Image& mask,
                                     const std::string& prompt);
/// Throws Error(kProviderContract) for a malformed body.
Image parse_outpaint_response(const nlohmann::json& body);

// Service side of the same exchange.
struct OutpaintRequest {
  Image base;
  Image mask;
  std::string prompt;
};
/// Throws Error(kMalformedDocument) for a malformed body.
OutpaintRequest parse_outpaint_request(const nlohmann::json& body);
nlohmann::json make_outpaint_response(const Image& image);

struct GeneratedImage {
  CanvasComposition composition;
  std::string provider_id;
  Image image;
  std::vector<std::string> used_detection_ids;  // first placement order, no repeats
};

/// Renders, calls the provider and checks its output shape. Provider faults
/// surface as Error(kProviderFailure) or Error(kTimeout).
GeneratedImage generate(OutpaintProvider& provider, const CanvasComposition& comp,
                        const CropSource& crops);

}  // namespace objexplore
