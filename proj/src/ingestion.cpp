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

#include "objexplore/ingestion.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_set>

#include "http_util.hpp"
#include "objexplore/digest.hpp"
#include "objexplore/error.hpp"
#include "objexplore/image.hpp"
#include "objexplore/log.hpp"
#include "util.hpp"

namespace objexplore {
namespace {

using nlohmann::json;

const json* at_pointer(const json& record, const std::string& pointer) {
  if (pointer.empty()) return nullptr;
  try {
    json::json_pointer ptr(pointer);
    if (!record.contains(ptr)) return nullptr;
    const json& v = record.at(ptr);
    return v.is_null() ? nullptr : &v;
  } catch (const json::exception&) {
    return nullptr;
  }
}

std::string text_field(const json& record, const std::string& pointer) {
  const json* v = at_pointer(record, pointer);
  if (!v) return {};
  if (v->is_string()) return v->get<std::string>();
  if (v->is_number()) return v->dump();
  throw Error(ErrorCode::kMalformedDocument, "field " + pointer + " is not text");
}

std::optional<int> int_field(const json& record, const std::string& pointer) {
  const json* v = at_pointer(record, pointer);
  if (!v) return std::nullopt;
  if (v->is_number_integer()) return v->get<int>();
  if (v->is_string()) {
    const std::string s = v->get<std::string>();
    try {
      std::size_t used = 0;
      int n = std::stoi(s, &used);
      if (used == s.size()) return n;
    } catch (const std::exception&) {
    }
  }
  throw Error(ErrorCode::kMalformedDocument, "field " + pointer + " is not an integer");
}

bool iequals(std::string_view a, std::string_view b) {
  return a.size() == b.size() &&
         std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) {
           return std::tolower(static_cast<unsigned char>(x)) ==
                  std::tolower(static_cast<unsigned char>(y));
         });
}

bool is_remote(const std::string& ref) {
  return ref.rfind("http://", 0) == 0 || ref.rfind("https://", 0) == 0;
}

std::string url_encode(const std::string& s) {
  std::string out;
  for (unsigned char c : s) {
    if (std::isalnum(c) || c == '-' || c == '_' || c == '.' || c == '~') {
      out += static_cast<char>(c);
    } else {
      char buf[4];
      std::snprintf(buf, sizeof buf, "%%%02X", c);
      out += buf;
    }
  }
  return out;
}

std::vector<std::filesystem::path> fixture_files(const std::filesystem::path& p) {
  std::vector<std::filesystem::path> files;
  if (std::filesystem::is_directory(p)) {
    for (const auto& entry : std::filesystem::directory_iterator(p)) {
      if (entry.is_regular_file() && entry.path().extension() == ".jsonl") {
        files.push_back(entry.path());
      }
    }
    std::sort(files.begin(), files.end());
  } else if (std::filesystem::exists(p)) {
    files.push_back(p);
  } else {
    throw Error(ErrorCode::kIo, "fixture not found: " + p.string());
  }
  return files;
}

bool type_matches(const json& record, const FieldMap& fields, const std::string& wanted) {
  if (wanted.empty()) return true;
  const json* v = at_pointer(record, fields.object_type);
  return v && v->is_string() && iequals(v->get<std::string>(), wanted);
}

void skip(FetchStats& stats, std::string id, std::string reason) {
  logger()->warn("skipping collection record {}: {}", id, reason);
  stats.skipped.push_back({std::move(id), std::move(reason)});
}

FetchStats fetch_fixture(const CollectionConfig& config, const std::string& object_type,
                         const std::function<void(Artwork)>& sink) {
  FetchStats stats;
  std::vector<Artwork> out;
  std::unordered_set<std::string> seen;
  std::size_t record_no = 0;
  for (const auto& file : fixture_files(config.fixture_path)) {
    std::string text = detail::read_text(file);
    for (std::string_view line : detail::split_lines(text)) {
      if (detail::trim(line).empty()) continue;
      ++record_no;
      std::string fallback_id = "<record " + std::to_string(record_no) + ">";
      json record;
      try {
        record = json::parse(line);
      } catch (const json::exception& e) {
        skip(stats, fallback_id, "not a JSON document");
        continue;
      }
      if (!record.is_object()) {
        skip(stats, fallback_id, "not an object");
        continue;
      }
      if (!type_matches(record, config.fields, object_type)) continue;
      try {
        Artwork a = normalize_artwork(record, config.fields);
        if (!is_remote(a.image_ref)) {
          std::filesystem::path ref = a.image_ref;
          if (a.image_ref.rfind("file://", 0) == 0) ref = a.image_ref.substr(7);
          if (ref.is_relative()) ref = std::filesystem::absolute(file.parent_path() / ref);
          a.image_ref = ref.lexically_normal().string();
        }
        if (!seen.insert(a.id).second) {
          skip(stats, a.id, "duplicate id");
          continue;
        }
        out.push_back(std::move(a));
      } catch (const Error& e) {
        std::string id = fallback_id;
        try {
          std::string rid = text_field(record, config.fields.id);
          if (!rid.empty()) id = rid;
        } catch (const Error&) {
        }
        skip(stats, id, e.what());
      }
    }
  }
  std::sort(out.begin(), out.end(),
            [](const Artwork& a, const Artwork& b) { return a.id < b.id; });
  stats.pages = 1;
  for (auto& a : out) {
    ++stats.yielded;
    sink(std::move(a));
  }
  return stats;
}

FetchStats fetch_live(const CollectionConfig& config, const std::string& object_type,
                      const std::function<void(Artwork)>& sink) {
  if (config.page_size <= 0) throw Error(ErrorCode::kConfig, "page_size must be positive");
  FetchStats stats;
  std::unordered_set<std::string> seen;
  detail::RetryPolicy policy{config.max_attempts, config.base_backoff};
  detail::Headers headers;
  if (!config.api_key.empty()) headers.emplace_back(config.api_key_header, config.api_key);

  for (std::size_t offset = 0;; offset += static_cast<std::size_t>(config.page_size)) {
    std::string url = config.base_url;
    url += url.find('?') == std::string::npos ? '?' : '&';
    if (!object_type.empty()) {
      url += config.type_param + "=" + url_encode(object_type) + "&";
    }
    url += config.offset_param + "=" + std::to_string(offset) + "&" + config.limit_param +
           "=" + std::to_string(config.page_size);

    json page = detail::with_retries(policy, [&] {
      auto res = detail::http_get(url, headers, config.timeout);
      if (res.status != 200) {
        throw Error(ErrorCode::kNetwork,
                    "collection API returned " + std::to_string(res.status));
      }
      try {
        return json::parse(res.body);
      } catch (const json::exception&) {
        throw Error(ErrorCode::kMalformedDocument, "collection page is not JSON");
      }
    });
    ++stats.pages;

    const json* items = at_pointer(page, config.items_pointer);
    if (!items || !items->is_array()) {
      throw Error(ErrorCode::kMalformedDocument,
                  "collection page has no " + config.items_pointer + " array");
    }
    std::size_t n = 0;
    for (const auto& record : *items) {
      ++n;
      std::string fallback_id = "<record " + std::to_string(offset + n) + ">";
      if (!record.is_object()) {
        skip(stats, fallback_id, "not an object");
        continue;
      }
      try {
        Artwork a = normalize_artwork(record, config.fields);
        if (!seen.insert(a.id).second) {
          skip(stats, a.id, "duplicate id");
          continue;
        }
        ++stats.yielded;
        sink(std::move(a));
      } catch (const Error& e) {
        skip(stats, fallback_id, e.what());
      }
    }
    if (n < static_cast<std::size_t>(config.page_size)) break;
  }
  return stats;
}

bool valid_hex_color(const std::string& s) {
  return s.size() == 7 && s[0] == '#' &&
         std::all_of(s.begin() + 1, s.end(),
                     [](char c) { return std::isxdigit(static_cast<unsigned char>(c)); });
}

}  // namespace

Artwork normalize_artwork(const json& record, const FieldMap& fields) {
  Artwork a;
  a.id = text_field(record, fields.id);
  if (a.id.empty()) throw Error(ErrorCode::kMalformedDocument, "missing id");
  a.title = text_field(record, fields.title);
  a.artist = text_field(record, fields.artist);
  a.technique = text_field(record, fields.technique);
  a.image_ref = text_field(record, fields.image_ref);
  if (a.image_ref.empty()) throw Error(ErrorCode::kMalformedDocument, "missing image reference");

  auto start = int_field(record, fields.year_start);
  auto end = int_field(record, fields.year_end);
  if (start || end) {
    a.production_year = YearRange{start.value_or(*end), end.value_or(*start)};
    if (a.production_year->start > a.production_year->end) {
      throw Error(ErrorCode::kMalformedDocument, "production year range reversed");
    }
  }
  a.image_width = int_field(record, fields.image_width).value_or(0);
  a.image_height = int_field(record, fields.image_height).value_or(0);
  if (a.image_width < 0 || a.image_height < 0) {
    throw Error(ErrorCode::kMalformedDocument, "negative image dimensions");
  }
  if (const json* p = at_pointer(record, fields.palette)) {
    if (!p->is_array()) throw Error(ErrorCode::kMalformedDocument, "palette is not a list");
    for (const auto& c : *p) {
      if (!c.is_string() || !valid_hex_color(c.get<std::string>())) {
        throw Error(ErrorCode::kMalformedDocument, "palette entry is not #rrggbb");
      }
      std::string hex = c.get<std::string>();
      std::transform(hex.begin(), hex.end(), hex.begin(),
                     [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
      a.palette.push_back(std::move(hex));
    }
  }
  return a;
}

FetchStats fetch_artworks(const CollectionConfig& config, const std::string& object_type,
                          const std::function<void(Artwork)>& sink) {
  if (!config.fixture_path.empty()) return fetch_fixture(config, object_type, sink);
  if (config.base_url.empty()) {
    throw Error(ErrorCode::kConfig, "neither a collection URL nor a fixture is configured");
  }
  return fetch_live(config, object_type, sink);
}

std::vector<Artwork> fetch_all_artworks(const CollectionConfig& config,
                                        const std::string& object_type, FetchStats* stats) {
  std::vector<Artwork> out;
  FetchStats s = fetch_artworks(config, object_type, [&](Artwork a) { out.push_back(std::move(a)); });
  if (stats) *stats = std::move(s);
  return out;
}

// ---------------------------------------------------------------------------

ImageCache::ImageCache(std::filesystem::path dir) : dir_(std::move(dir)) {
  std::filesystem::create_directories(dir_ / "blobs");
  std::filesystem::create_directories(dir_ / "refs");
}

std::vector<std::uint8_t> ImageCache::download(const std::string& ref) {
  detail::RetryPolicy policy{max_attempts, base_backoff};
  return detail::with_retries(policy, [&] {
    ++transfers_;
    auto res = detail::http_get(ref, {}, timeout);
    if (res.status != 200) {
      throw Error(ErrorCode::kNetwork, "image fetch returned " + std::to_string(res.status));
    }
    return std::vector<std::uint8_t>(res.body.begin(), res.body.end());
  });
}

std::filesystem::path ImageCache::fetch(Artwork& a) {
  if (a.image_ref.empty()) throw Error(ErrorCode::kInvalidArgument, "artwork has no image");
  const auto ref_file = dir_ / "refs" / sha256_hex(a.image_ref);

  if (std::filesystem::exists(ref_file)) {
    auto blob = dir_ / "blobs" / std::string(detail::trim(detail::read_text(ref_file)));
    if (std::filesystem::exists(blob)) {
      if (!a.dimensions_known()) {
        auto [w, h] = probe_dimensions(detail::read_bytes(blob));
        a.image_width = w;
        a.image_height = h;
      }
      return blob;
    }
  }

  std::vector<std::uint8_t> bytes;
  if (is_remote(a.image_ref)) {
    bytes = download(a.image_ref);
  } else {
    std::string local = a.image_ref.rfind("file://", 0) == 0 ? a.image_ref.substr(7) : a.image_ref;
    bytes = detail::read_bytes(local);
  }
  Image decoded = decode_image(bytes);  // validates before anything is cached
  const bool png = bytes.size() > 1 && bytes[0] == 0x89;
  const std::string name = sha256_hex(bytes) + (png ? ".png" : ".jpg");
  const auto blob = dir_ / "blobs" / name;
  if (!std::filesystem::exists(blob)) {
    detail::write_atomic(blob, std::string_view(reinterpret_cast<const char*>(bytes.data()),
                                                bytes.size()));
  }
  detail::write_atomic(ref_file, name);
  if (!a.dimensions_known()) {
    a.image_width = decoded.width;
    a.image_height = decoded.height;
  }
  return blob;
}

// ---------------------------------------------------------------------------

Detection parse_detection_record(const json& record) {
  if (!record.is_object()) throw Error(ErrorCode::kMalformedDocument, "record is not an object");
  Detection d;
  try {
    d.artwork_id = record.at("artwork_id").get<std::string>();
    d.label = record.at("label").get<std::string>();
    d.confidence = record.at("confidence").get<double>();
    d.box = BoundingBox{record.at("x_min").get<double>(), record.at("y_min").get<double>(),
                        record.at("x_max").get<double>(), record.at("y_max").get<double>()};
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kMalformedDocument, std::string("malformed record: ") + e.what());
  }
  if (d.artwork_id.empty()) throw Error(ErrorCode::kMalformedDocument, "empty artwork_id");
  if (d.label.empty()) throw Error(ErrorCode::kEmptyName, "empty label");
  if (!d.box.valid()) throw Error(ErrorCode::kInvalidBox, "invalid box");
  if (!(d.confidence >= 0.0 && d.confidence <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "confidence outside [0,1]");
  }
  d.id = make_detection_id(d.artwork_id, d.label, d.box, d.confidence);
  return d;
}

json to_record_json(const Detection& d) {
  return json{{"artwork_id", d.artwork_id}, {"label", d.label},     {"x_min", d.box.x_min},
              {"y_min", d.box.y_min},       {"x_max", d.box.x_max}, {"y_max", d.box.y_max},
              {"confidence", d.confidence}};
}

ImportResult import_detections(std::istream& in, const Taxonomy& taxonomy) {
  ImportResult result;
  std::unordered_set<std::string> seen;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::trim(line).empty()) continue;
    try {
      json record;
      try {
        record = json::parse(line);
      } catch (const json::exception&) {
        throw Error(ErrorCode::kMalformedDocument, "not a JSON document");
      }
      Detection d = parse_detection_record(record);
      d.category = taxonomy.category_of(d.label);
      if (!seen.insert(d.id).second) {
        ++result.duplicates;
        continue;
      }
      result.detections.push_back(std::move(d));
    } catch (const Error& e) {
      logger()->warn("rejecting detection record on line {}: {}", line_no, e.what());
      result.rejected.push_back({line_no, e.what()});
    }
  }
  return result;
}

ImportResult import_detections(const std::filesystem::path& path, const Taxonomy& taxonomy) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot read " + path.string());
  return import_detections(in, taxonomy);
}

std::vector<Detection> read_detection_records(const std::filesystem::path& path) {
  std::vector<Detection> out;
  std::string text = detail::read_text(path);
  int line_no = 0;
  for (std::string_view line : detail::split_lines(text)) {
    ++line_no;
    if (detail::trim(line).empty()) continue;
    try {
      out.push_back(parse_detection_record(json::parse(line)));
    } catch (const json::exception& e) {
      throw Error(ErrorCode::kMalformedDocument,
                  path.string() + ":" + std::to_string(line_no) + ": not a JSON document");
    } catch (const Error& e) {
      throw Error(e.code(), path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

json make_detector_request(const Artwork& a, const std::vector<std::uint8_t>* local_bytes,
                           const std::string& prompt, double cutoff) {
  json image;
  if (is_remote(a.image_ref)) {
    image["url"] = a.image_ref;
  } else {
    if (!local_bytes) {
      throw Error(ErrorCode::kInvalidArgument, "local image bytes required for " + a.id);
    }
    image["base64"] = base64_encode(*local_bytes);
  }
  return json{{"artwork_id", a.id},
              {"image", image},
              {"image_size", {{"width", a.image_width}, {"height", a.image_height}}},
              {"prompt", prompt},
              {"cutoff", cutoff}};
}

DetectorOutcome convert_detector_response(const json& response, const Artwork& a,
                                          const Taxonomy& taxonomy,
                                          const std::vector<std::string>& prompt_labels,
                                          double cutoff) {
  auto violation = [](const std::string& what) {
    return Error(ErrorCode::kProtocolViolation, "detector protocol violation: " + what);
  };
  if (!response.is_object() || !response.contains("detections") ||
      !response["detections"].is_array()) {
    throw violation("missing detections array");
  }
  const std::set<std::string> allowed(prompt_labels.begin(), prompt_labels.end());

  DetectorOutcome out;
  std::unordered_set<std::string> seen;
  for (const auto& item : response["detections"]) {
    if (!item.is_object() || !item.contains("label") || !item["label"].is_string() ||
        !item.contains("confidence") || !item["confidence"].is_number() ||
        !item.contains("box") || !item["box"].is_array() || item["box"].size() != 4) {
      throw violation("malformed detection entry");
    }
    std::string label = item["label"].get<std::string>();
    if (!allowed.count(label) || !taxonomy.contains(label)) {
      throw violation("label \"" + label + "\" is not in the prompt");
    }
    double conf = item["confidence"].get<double>();
    if (!(conf >= 0.0 && conf <= 1.0)) throw violation("confidence outside [0,1]");
    for (const auto& v : item["box"]) {
      if (!v.is_number()) throw violation("box coordinate is not a number");
    }
    BoundingBox box{item["box"][0].get<double>(), item["box"][1].get<double>(),
                    item["box"][2].get<double>(), item["box"][3].get<double>()};
    if (!box.valid()) throw violation("invalid box");
    if (conf < cutoff) {
      ++out.below_cutoff;
      continue;
    }
    try {
      box = clamp(box, a.image_width, a.image_height);
    } catch (const Error& e) {
      logger()->warn("dropping {} box on {}: {}", label, a.id, e.what());
      out.dropped.push_back(label);
      continue;
    }
    Detection d{make_detection_id(a.id, label, box, conf), a.id, label,
                taxonomy.category_of(label), box, conf};
    if (seen.insert(d.id).second) out.detections.push_back(std::move(d));
  }
  return out;
}

DetectorOutcome request_detections(const DetectorEndpoint& endpoint, const Artwork& a,
                                   const std::filesystem::path* local_image,
                                   const Taxonomy& taxonomy, double cutoff) {
  if (!(cutoff >= 0.0 && cutoff <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "cutoff outside [0,1]");
  }
  if (!a.dimensions_known()) {
    throw Error(ErrorCode::kInvalidArgument, "image dimensions unknown for " + a.id);
  }
  std::vector<std::uint8_t> bytes;
  if (local_image) bytes = detail::read_bytes(*local_image);
  const std::string prompt = build_prompt(taxonomy);
  const std::string body =
      make_detector_request(a, local_image ? &bytes : nullptr, prompt, cutoff).dump();

  std::string url = endpoint.url;
  while (!url.empty() && url.back() == '/') url.pop_back();
  url += "/detect";

  detail::RetryPolicy policy{endpoint.max_attempts, endpoint.base_backoff};
  json response = detail::with_retries(policy, [&] {
    auto res = detail::http_post(url, body, "application/json", endpoint.timeout);
    if (res.status >= 500) {
      throw Error(ErrorCode::kNetwork, "detector returned " + std::to_string(res.status));
    }
    if (res.status != 200) {
      throw Error(ErrorCode::kProtocolViolation,
                  "detector rejected request (" + std::to_string(res.status) + "): " + res.body);
    }
    try {
      return json::parse(res.body);
    } catch (const json::exception&) {
      throw Error(ErrorCode::kProtocolViolation, "detector response is not JSON");
    }
  });
  return convert_detector_response(response, a, taxonomy, taxonomy.unique_names(), cutoff);
}

}  // namespace objexplore
