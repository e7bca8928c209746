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

#include "objexplore/image.hpp"

#include <csetjmp>
#include <cstdio>
#include <cstring>
#include <string>

#include <jpeglib.h>
#include <png.h>

#include "objexplore/digest.hpp"
#include "objexplore/error.hpp"
#include "util.hpp"

namespace objexplore {
namespace {

bool is_png(std::span<const std::uint8_t> b) {
  static constexpr std::uint8_t kSig[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
  return b.size() >= 8 && std::memcmp(b.data(), kSig, 8) == 0;
}

bool is_jpeg(std::span<const std::uint8_t> b) {
  return b.size() >= 3 && b[0] == 0xff && b[1] == 0xd8 && b[2] == 0xff;
}

struct JpegErrorManager {
  jpeg_error_mgr pub;
  std::jmp_buf jump;
};

void jpeg_error_exit(j_common_ptr cinfo) {
  auto* err = reinterpret_cast<JpegErrorManager*>(cinfo->err);
  std::longjmp(err->jump, 1);
}

void jpeg_silent(j_common_ptr, int) {}

// Returns false on any libjpeg error. Kept free of C++ objects with
// non-trivial destructors between setjmp and longjmp.
bool decode_jpeg_raw(const std::uint8_t* data, std::size_t size, bool header_only,
                     int* width, int* height, std::vector<std::uint8_t>* out) {
  jpeg_decompress_struct cinfo;
  JpegErrorManager jerr;
  cinfo.err = jpeg_std_error(&jerr.pub);
  jerr.pub.error_exit = jpeg_error_exit;
  jerr.pub.emit_message = jpeg_silent;
  if (setjmp(jerr.jump)) {
    jpeg_destroy_decompress(&cinfo);
    return false;
  }
  jpeg_create_decompress(&cinfo);
  jpeg_mem_src(&cinfo, data, static_cast<unsigned long>(size));
  jpeg_read_header(&cinfo, TRUE);
  *width = static_cast<int>(cinfo.image_width);
  *height = static_cast<int>(cinfo.image_height);
  if (header_only) {
    jpeg_destroy_decompress(&cinfo);
    return true;
  }
  cinfo.out_color_space = JCS_RGB;
  jpeg_start_decompress(&cinfo);
  std::size_t stride = static_cast<std::size_t>(cinfo.output_width) * 3;
  out->resize(stride * cinfo.output_height);
  while (cinfo.output_scanline < cinfo.output_height) {
    JSAMPROW row = out->data() + stride * cinfo.output_scanline;
    jpeg_read_scanlines(&cinfo, &row, 1);
  }
  jpeg_finish_decompress(&cinfo);
  jpeg_destroy_decompress(&cinfo);
  return true;
}

}  // namespace

Image::Image(int w, int h, int c, std::uint8_t fill)
    : width(w), height(h), channels(c),
      pixels(static_cast<std::size_t>(w) * static_cast<std::size_t>(h) *
                 static_cast<std::size_t>(c),
             fill) {
  if (w < 0 || h < 0 || (c != 1 && c != 3)) {
    throw Error(ErrorCode::kInvalidArgument, "bad image geometry");
  }
}

Image Image::region(int x0, int y0, int x1, int y1) const {
  if (x0 < 0 || y0 < 0 || x1 > width || y1 > height || x0 > x1 || y0 > y1) {
    throw Error(ErrorCode::kOutOfBounds, "region outside image");
  }
  Image out(x1 - x0, y1 - y0, channels);
  std::size_t row_bytes = static_cast<std::size_t>(out.width) * channels;
  for (int y = y0; y < y1; ++y) {
    if (row_bytes == 0) break;
    std::memcpy(out.at(0, y - y0), at(x0, y), row_bytes);
  }
  return out;
}

std::string pixel_digest(const Image& img) {
  std::string header = std::to_string(img.width) + "x" + std::to_string(img.height) +
                       "x" + std::to_string(img.channels) + "\n";
  std::vector<std::uint8_t> buf(header.begin(), header.end());
  buf.insert(buf.end(), img.pixels.begin(), img.pixels.end());
  return sha256_hex(buf);
}

Image decode_image(std::span<const std::uint8_t> bytes) {
  if (is_png(bytes)) {
    png_image png;
    std::memset(&png, 0, sizeof png);
    png.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_memory(&png, bytes.data(), bytes.size())) {
      throw Error(ErrorCode::kUndecodable, std::string("undecodable png: ") + png.message);
    }
    bool gray = (png.format & PNG_FORMAT_FLAG_COLOR) == 0 &&
                (png.format & PNG_FORMAT_FLAG_ALPHA) == 0;
    png.format = gray ? PNG_FORMAT_GRAY : PNG_FORMAT_RGB;
    Image img(static_cast<int>(png.width), static_cast<int>(png.height), gray ? 1 : 3);
    png_color white{255, 255, 255};
    if (!png_image_finish_read(&png, &white, img.pixels.data(), 0, nullptr)) {
      std::string msg = png.message;
      png_image_free(&png);
      throw Error(ErrorCode::kUndecodable, "undecodable png: " + msg);
    }
    return img;
  }
  if (is_jpeg(bytes)) {
    int w = 0, h = 0;
    std::vector<std::uint8_t> raw;
    if (!decode_jpeg_raw(bytes.data(), bytes.size(), false, &w, &h, &raw)) {
      throw Error(ErrorCode::kUndecodable, "undecodable jpeg");
    }
    Image img;
    img.width = w;
    img.height = h;
    img.channels = 3;
    img.pixels = std::move(raw);
    return img;
  }
  throw Error(ErrorCode::kUndecodable, "undecodable: unknown image format");
}

std::pair<int, int> probe_dimensions(std::span<const std::uint8_t> bytes) {
  if (is_png(bytes)) {
    png_image png;
    std::memset(&png, 0, sizeof png);
    png.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_memory(&png, bytes.data(), bytes.size())) {
      throw Error(ErrorCode::kUndecodable, "undecodable png");
    }
    std::pair<int, int> dims{static_cast<int>(png.width), static_cast<int>(png.height)};
    png_image_free(&png);
    return dims;
  }
  if (is_jpeg(bytes)) {
    int w = 0, h = 0;
    if (!decode_jpeg_raw(bytes.data(), bytes.size(), true, &w, &h, nullptr)) {
      throw Error(ErrorCode::kUndecodable, "undecodable jpeg");
    }
    return {w, h};
  }
  throw Error(ErrorCode::kUndecodable, "undecodable: unknown image format");
}

std::vector<std::uint8_t> encode_png(const Image& img) {
  if (img.empty()) throw Error(ErrorCode::kInvalidArgument, "cannot encode empty image");
  png_image png;
  std::memset(&png, 0, sizeof png);
  png.version = PNG_IMAGE_VERSION;
  png.width = static_cast<png_uint_32>(img.width);
  png.height = static_cast<png_uint_32>(img.height);
  png.format = img.channels == 1 ? PNG_FORMAT_GRAY : PNG_FORMAT_RGB;
  png_alloc_size_t size = 0;
  if (!png_image_write_get_memory_size(png, size, 0, img.pixels.data(), 0, nullptr)) {
    throw Error(ErrorCode::kIo, std::string("png encode failed: ") + png.message);
  }
  std::vector<std::uint8_t> out(size);
  if (!png_image_write_to_memory(&png, out.data(), &size, 0, img.pixels.data(), 0,
                                 nullptr)) {
    throw Error(ErrorCode::kIo, std::string("png encode failed: ") + png.message);
  }
  out.resize(size);
  return out;
}

Image read_image(const std::filesystem::path& path) {
  return decode_image(detail::read_bytes(path));
}

void write_png(const std::filesystem::path& path, const Image& img) {
  auto bytes = encode_png(img);
  detail::write_atomic(path, std::string_view(reinterpret_cast<const char*>(bytes.data()),
                                              bytes.size()));
}

}  // namespace objexplore
