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

#include "objexplore/taxonomy.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include "objexplore/error.hpp"
#include "util.hpp"

namespace objexplore {
namespace {

constexpr std::array<std::string_view, kCategoryCount> kCategoryNames = {
    "Animal",   "Architecture", "Christianity", "Clothing", "Food",
    "Furniture", "Human",       "Instrument",   "Interior", "Nature",
    "Occultism", "Vehicle",     "Weaponry",
};

constexpr std::string_view kPrecedenceHeader = "@precedence";

// A trailing comma marks a list continued on the next line.
std::vector<std::string> split_names(std::string_view line, int line_no) {
  if (!line.empty() && line.back() == ',') line.remove_suffix(1);
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    std::size_t comma = line.find(',', start);
    std::string_view token = line.substr(
        start, comma == std::string_view::npos ? std::string_view::npos
                                               : comma - start);
    std::string name(detail::trim(token));
    if (name.empty()) {
      throw Error(ErrorCode::kEmptyName,
                  "empty name on line " + std::to_string(line_no));
    }
    out.push_back(std::move(name));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

}  // namespace

const std::array<Category, kCategoryCount>& all_categories() {
  static const std::array<Category, kCategoryCount> kAll = [] {
    std::array<Category, kCategoryCount> a{};
    for (std::size_t i = 0; i < kCategoryCount; ++i) {
      a[i] = static_cast<Category>(i);
    }
    return a;
  }();
  return kAll;
}

std::string_view to_string(Category c) {
  return kCategoryNames[static_cast<std::size_t>(c)];
}

std::optional<Category> parse_category(std::string_view name) {
  for (std::size_t i = 0; i < kCategoryCount; ++i) {
    if (kCategoryNames[i] == name) return static_cast<Category>(i);
  }
  return std::nullopt;
}

bool Taxonomy::contains(std::string_view name) const {
  return resolved_.count(std::string(name)) > 0;
}

bool Taxonomy::has_label(std::string_view name, Category c) const {
  auto it = owners_.find(std::string(name));
  if (it == owners_.end()) return false;
  return std::find(it->second.begin(), it->second.end(), c) != it->second.end();
}

std::vector<std::string> Taxonomy::duplicate_names() const {
  std::vector<std::string> out;
  for (const auto& name : unique_names_) {
    if (owners_.at(name).size() > 1) out.push_back(name);
  }
  return out;
}

std::vector<std::string> Taxonomy::labels_in(Category c) const {
  std::vector<std::string> out;
  for (const auto& e : entries_) {
    if (e.category == c) out.push_back(e.name);
  }
  return out;
}

Category Taxonomy::category_of(std::string_view name) const {
  auto it = resolved_.find(std::string(name));
  if (it == resolved_.end()) {
    throw Error(ErrorCode::kUnknownLabel,
                "unknown label \"" + std::string(name) + "\"");
  }
  return it->second;
}

Taxonomy load_taxonomy(std::string_view document) {
  Taxonomy t;
  std::vector<Category> explicit_precedence;
  bool in_precedence = false;
  std::optional<Category> current;
  std::unordered_set<std::string> seen_pairs;

  int line_no = 0;
  for (std::string_view raw : detail::split_lines(document)) {
    ++line_no;
    std::string_view line = detail::trim(raw);
    if (line.empty() || line.front() == '#') continue;

    if (line.front() == '[') {
      if (line.back() != ']' || line.size() < 3) {
        throw Error(ErrorCode::kMalformedDocument,
                    "malformed header on line " + std::to_string(line_no));
      }
      std::string_view header = detail::trim(line.substr(1, line.size() - 2));
      if (header == kPrecedenceHeader) {
        in_precedence = true;
        current.reset();
      } else {
        auto cat = parse_category(header);
        if (!cat) {
          throw Error(ErrorCode::kUnknownCategory,
                      "unknown category \"" + std::string(header) +
                          "\" on line " + std::to_string(line_no));
        }
        in_precedence = false;
        current = *cat;
        if (std::find(t.categories_.begin(), t.categories_.end(), *cat) ==
            t.categories_.end()) {
          t.categories_.push_back(*cat);
        }
      }
    } else if (in_precedence) {
      for (const auto& name : split_names(line, line_no)) {
        auto cat = parse_category(name);
        if (!cat) {
          throw Error(ErrorCode::kUnknownCategory,
                      "unknown category \"" + name + "\" in precedence");
        }
        if (std::find(explicit_precedence.begin(), explicit_precedence.end(),
                      *cat) == explicit_precedence.end()) {
          explicit_precedence.push_back(*cat);
        }
      }
    } else if (current) {
      for (auto& name : split_names(line, line_no)) {
        if (name.find('.') != std::string::npos) {
          throw Error(ErrorCode::kInvalidName,
                      "label \"" + name + "\" contains '.'");
        }
        std::string key = name + '\n' + std::string(to_string(*current));
        if (!seen_pairs.insert(key).second) {
          throw Error(ErrorCode::kDuplicateLabel,
                      "duplicate label \"" + name + "\" in " +
                          std::string(to_string(*current)));
        }
        t.entries_.push_back(Label{std::move(name), *current});
        if (t.entries_.size() > kMaxLabels) {
          throw Error(ErrorCode::kCapacityExceeded,
                      "exceeds label capacity " + std::to_string(kMaxLabels));
        }
      }
    } else {
      throw Error(ErrorCode::kMalformedDocument,
                  "labels before any category header on line " +
                      std::to_string(line_no));
    }
  }

  if (t.entries_.empty()) throw Error(ErrorCode::kNoEntries, "no entries");

  t.precedence_ = explicit_precedence;
  for (Category c : t.categories_) {
    if (std::find(t.precedence_.begin(), t.precedence_.end(), c) ==
        t.precedence_.end()) {
      t.precedence_.push_back(c);
    }
  }

  for (const auto& e : t.entries_) {
    auto& owners = t.owners_[e.name];
    if (owners.empty()) t.unique_names_.push_back(e.name);
    owners.push_back(e.category);
  }
  for (const auto& [name, owners] : t.owners_) {
    for (Category c : t.precedence_) {
      if (std::find(owners.begin(), owners.end(), c) != owners.end()) {
        t.resolved_.emplace(name, c);
        break;
      }
    }
  }
  return t;
}

Taxonomy load_taxonomy_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return load_taxonomy(buf.str());
}

const Taxonomy& default_taxonomy() {
  static const Taxonomy kDefault = load_taxonomy(default_taxonomy_document());
  return kDefault;
}

std::string build_prompt(const std::vector<std::string>& names) {
  std::string out;
  std::unordered_set<std::string> seen;
  for (const auto& n : names) {
    if (!seen.insert(n).second) continue;
    if (!out.empty()) out += kPromptSeparator;
    out += n;
  }
  return out;
}

std::string build_prompt(const Taxonomy& t) {
  return build_prompt(t.unique_names());
}

std::vector<std::string> parse_prompt(std::string_view text) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    std::size_t pos = text.find(kPromptSeparator, start);
    std::string_view seg = text.substr(
        start, pos == std::string_view::npos ? std::string_view::npos
                                             : pos - start);
    if (seg.empty() || seg.find('.') != std::string_view::npos) {
      throw Error(ErrorCode::kEmptySegment, "empty segment in prompt");
    }
    out.emplace_back(seg);
    if (pos == std::string_view::npos) break;
    start = pos + kPromptSeparator.size();
  }
  return out;
}

}  // namespace objexplore
