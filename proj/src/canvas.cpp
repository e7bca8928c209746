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

#include "objexplore/canvas.hpp"

#include <cmath>
#include <set>

#include "http_util.hpp"
#include "objexplore/digest.hpp"
#include "objexplore/error.hpp"

namespace objexplore {

using nlohmann::json;

void to_json(json& j, const Placement& p) {
  j = json{{"detection_id", p.detection_id}, {"x", p.x}, {"y", p.y}, {"scale", p.scale}};
}

void from_json(const json& j, Placement& p) {
  j.at("detection_id").get_to(p.detection_id);
  j.at("x").get_to(p.x);
  j.at("y").get_to(p.y);
  p.scale = j.value("scale", 1.0);
}

void to_json(json& j, const CanvasComposition& c) {
  j = json{{"side", c.side}, {"placements", c.placements}, {"prompt", c.prompt}};
}

void from_json(const json& j, CanvasComposition& c) {
  c.side = j.value("side", kDefaultCanvasSide);
  c.placements = j.value("placements", std::vector<Placement>{});
  c.prompt = j.value("prompt", std::string());
}

std::optional<CropSize> CatalogCropSource::size(const std::string& detection_id) const {
  auto crop = catalog_.crop(detection_id);
  if (!crop) return std::nullopt;
  return CropSize{crop->width, crop->height};
}

Image CatalogCropSource::pixels(const std::string& detection_id) const {
  return catalog_.load_crop_image(detection_id);
}

int scaled_extent(int extent, double scale) {
  return std::max(1, static_cast<int>(std::lround(extent * scale)));
}

namespace {

CropSize placed_size(const Placement& p, const CropSource& crops) {
  if (!(p.scale > 0.0) || !std::isfinite(p.scale)) {
    throw Error(ErrorCode::kInvalidComposition, "scale must be positive");
  }
  auto size = crops.size(p.detection_id);
  if (!size) throw Error(ErrorCode::kNotFound, "no crop for " + p.detection_id);
  return {scaled_extent(size->width, p.scale), scaled_extent(size->height, p.scale)};
}

void check_bounds(int side, const Placement& p, const CropSize& s) {
  if (p.x < 0 || p.y < 0 || p.x > side - s.width || p.y > side - s.height) {
    throw Error(ErrorCode::kOutOfBounds,
                p.detection_id + " at (" + std::to_string(p.x) + "," + std::to_string(p.y) +
                    ") size " + std::to_string(s.width) + "x" + std::to_string(s.height) +
                    " exceeds canvas " + std::to_string(side));
  }
}

void check_side(int side) {
  if (side <= 0) throw Error(ErrorCode::kInvalidComposition, "canvas side must be positive");
}

}  // namespace

CanvasComposition place(const CanvasComposition& comp, const CropSource& crops,
                        const std::string& detection_id, int x, int y, double scale) {
  check_side(comp.side);
  Placement p{detection_id, x, y, scale};
  check_bounds(comp.side, p, placed_size(p, crops));
  CanvasComposition next = comp;
  next.placements.push_back(std::move(p));
  return next;
}

void validate(const CanvasComposition& comp, const CropSource& crops) {
  check_side(comp.side);
  for (const auto& p : comp.placements) check_bounds(comp.side, p, placed_size(p, crops));
}

RenderedBase render_base(const CanvasComposition& comp, const CropSource& crops) {
  if (comp.placements.empty()) throw Error(ErrorCode::kNothingPlaced, "nothing placed");
  validate(comp, crops);
  RenderedBase out{Image(comp.side, comp.side, 3, 255), Image(comp.side, comp.side, 1, 255)};
  for (const auto& p : comp.placements) {
    const CropSize dst = placed_size(p, crops);
    const Image src = crops.pixels(p.detection_id);
    if (src.empty() || (src.channels != 1 && src.channels != 3)) {
      throw Error(ErrorCode::kNotFound, "unusable crop pixels for " + p.detection_id);
    }
    for (int dy = 0; dy < dst.height; ++dy) {
      // Nearest neighbour: source index floor((d + 0.5) * src / dst).
      const int sy = static_cast<int>((2LL * dy + 1) * src.height / (2LL * dst.height));
      for (int dx = 0; dx < dst.width; ++dx) {
        const int sx = static_cast<int>((2LL * dx + 1) * src.width / (2LL * dst.width));
        const std::uint8_t* s = src.at(sx, sy);
        std::uint8_t* d = out.base.at(p.x + dx, p.y + dy);
        for (int c = 0; c < 3; ++c) d[c] = s[src.channels == 3 ? c : 0];
        *out.mask.at(p.x + dx, p.y + dy) = 0;
      }
    }
  }
  return out;
}

Image MockOutpaintProvider::outpaint(const Image& base, const Image& mask, const std::string&) {
  if (base.width != mask.width || base.height != mask.height || base.channels != 3 ||
      mask.channels != 1) {
    throw Error(ErrorCode::kInvalidArgument, "base and mask disagree");
  }
  std::uint64_t sum[3] = {0, 0, 0};
  std::uint64_t covered = 0;
  for (int y = 0; y < base.height; ++y) {
    for (int x = 0; x < base.width; ++x) {
      if (*mask.at(x, y) != 0) continue;
      const std::uint8_t* px = base.at(x, y);
      for (int c = 0; c < 3; ++c) sum[c] += px[c];
      ++covered;
    }
  }
  std::uint8_t fill[3] = {255, 255, 255};
  if (covered > 0) {
    for (int c = 0; c < 3; ++c) fill[c] = static_cast<std::uint8_t>(sum[c] / covered);
  }
  Image out = base;
  for (int y = 0; y < base.height; ++y) {
    for (int x = 0; x < base.width; ++x) {
      if (*mask.at(x, y) == 0) continue;
      std::uint8_t* px = out.at(x, y);
      for (int c = 0; c < 3; ++c) px[c] = fill[c];
    }
  }
  return out;
}

json make_outpaint_request(const Image& base, const Image& mask, const std::string& prompt) {
  return json{{"image", base64_encode(encode_png(base))},
              {"mask", base64_encode(encode_png(mask))},
              {"prompt", prompt},
              {"size", {{"width", base.width}, {"height", base.height}}}};
}

Image parse_outpaint_response(const json& body) {
  if (!body.is_object() || !body.contains("image") || !body["image"].is_string()) {
    throw Error(ErrorCode::kProviderContract, "response lacks an image string");
  }
  try {
    return decode_image(base64_decode(body["image"].get<std::string>()));
  } catch (const Error& e) {
    throw Error(ErrorCode::kProviderContract,
                std::string("response image undecodable: ") + e.what());
  }
}

OutpaintRequest parse_outpaint_request(const json& body) {
  try {
    OutpaintRequest r{decode_image(base64_decode(body.at("image").get<std::string>())),
                      decode_image(base64_decode(body.at("mask").get<std::string>())),
                      body.at("prompt").get<std::string>()};
    const int w = body.at("size").at("width").get<int>();
    const int h = body.at("size").at("height").get<int>();
    if (r.base.width != w || r.base.height != h || r.mask.width != w || r.mask.height != h) {
      throw Error(ErrorCode::kMalformedDocument, "image, mask and size disagree");
    }
    return r;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kMalformedDocument, e.what());
  }
}

json make_outpaint_response(const Image& image) {
  return json{{"image", base64_encode(encode_png(image))}};
}

Image HttpOutpaintProvider::outpaint(const Image& base, const Image& mask,
                                     const std::string& prompt) {
  std::string url = endpoint_.url;
  while (!url.empty() && url.back() == '/') url.pop_back();
  url += "/outpaint";
  detail::Headers headers;
  if (!endpoint_.api_key.empty()) headers.emplace_back(endpoint_.api_key_header, endpoint_.api_key);
  detail::HttpResult res;
  try {
    res = detail::http_post(url, make_outpaint_request(base, mask, prompt).dump(),
                            "application/json", endpoint_.timeout, headers);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kTimeout) throw;
    throw Error(ErrorCode::kProviderFailure, e.what());
  }
  if (res.status != 200) {
    throw Error(ErrorCode::kProviderFailure,
                "provider returned " + std::to_string(res.status) + ": " + res.body);
  }
  json body;
  try {
    body = json::parse(res.body);
  } catch (const json::exception&) {
    throw Error(ErrorCode::kProviderContract, "provider response is not JSON");
  }
  return parse_outpaint_response(body);
}

GeneratedImage generate(OutpaintProvider& provider, const CanvasComposition& comp,
                        const CropSource& crops) {
  if (comp.placements.empty()) throw Error(ErrorCode::kNothingPlaced, "nothing placed");
  if (comp.prompt.empty()) throw Error(ErrorCode::kInvalidComposition, "prompt required");
  if (comp.side > provider.max_side()) {
    throw Error(ErrorCode::kInvalidComposition,
                "canvas side " + std::to_string(comp.side) + " exceeds provider limit " +
                    std::to_string(provider.max_side()));
  }
  RenderedBase rendered = render_base(comp, crops);

  Image image;
  try {
    image = provider.outpaint(rendered.base, rendered.mask, comp.prompt);
  } catch (const Error& e) {
    switch (e.code()) {
      case ErrorCode::kTimeout:
      case ErrorCode::kProviderFailure:
      case ErrorCode::kProviderContract:
        throw;
      default:
        throw Error(ErrorCode::kProviderFailure, e.what());
    }
  } catch (const std::exception& e) {
    throw Error(ErrorCode::kProviderFailure, e.what());
  }
  if (image.width != comp.side || image.height != comp.side || image.channels != 3) {
    throw Error(ErrorCode::kProviderContract,
                "provider returned " + std::to_string(image.width) + "x" +
                    std::to_string(image.height) + "x" + std::to_string(image.channels) +
                    ", expected " + std::to_string(comp.side) + "x" +
                    std::to_string(comp.side) + "x3");
  }

  GeneratedImage out{comp, provider.id(), std::move(image), {}};
  std::set<std::string> seen;
  for (const auto& p : comp.placements) {
    if (seen.insert(p.detection_id).second) out.used_detection_ids.push_back(p.detection_id);
  }
  return out;
}

}  // namespace objexplore
