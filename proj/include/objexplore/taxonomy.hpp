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

#include <array>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace objexplore {

/// The fixed set of browse categories. Order matches the default taxonomy
/// document.
enum class Category {
  kAnimal,
  kArchitecture,
  kChristianity,
  kClothing,
  kFood,
  kFurniture,
  kHuman,
  kInstrument,
  kInterior,
  kNature,
  kOccultism,
  kVehicle,
  kWeaponry,
};

inline constexpr std::size_t kCategoryCount = 13;
inline constexpr std::size_t kMaxLabels = 120;
inline constexpr std::string_view kPromptSeparator = ". ";

const std::array<Category, kCategoryCount>& all_categories();
std::string_view to_string(Category c);
std::optional<Category> parse_category(std::string_view name);

struct Label {
  std::string name;
  Category category;

  friend bool operator==(const Label&, const Label&) = default;
};

/// Immutable label system. Built only through load_taxonomy(), which
/// enforces every invariant, so all read paths may assume validity.
class Taxonomy {
 public:
  const std::vector<Label>& entries() const { return entries_; }
  const std::vector<Category>& precedence() const { return precedence_; }

  /// Distinct categories in document order.
  const std::vector<Category>& categories() const { return categories_; }

  /// Distinct label names, first-occurrence order.
  const std::vector<std::string>& unique_names() const { return unique_names_; }

  bool contains(std::string_view name) const;
  bool has_label(std::string_view name, Category c) const;

  /// Names that occur under more than one category.
  std::vector<std::string> duplicate_names() const;

  /// Labels of one category, document order.
  std::vector<std::string> labels_in(Category c) const;

  /// Throws Error(kUnknownLabel) for names not in the taxonomy.
  Category category_of(std::string_view name) const;

 private:
  friend Taxonomy load_taxonomy(std::string_view document);

  std::vector<Label> entries_;
  std::vector<Category> precedence_;
  std::vector<Category> categories_;
  std::vector<std::string> unique_names_;
  std::unordered_map<std::string, Category> resolved_;
  std::unordered_map<std::string, std::vector<Category>> owners_;
};

/// Parses the taxonomy document format (see data/taxonomy.txt).
Taxonomy load_taxonomy(std::string_view document);
Taxonomy load_taxonomy_file(const std::filesystem::path& path);

/// The built-in taxonomy compiled from data/taxonomy.txt.
const Taxonomy& default_taxonomy();
std::string_view default_taxonomy_document();

/// Unique label names joined by ". ", no trailing separator.
std::string build_prompt(const Taxonomy& t);
std::string build_prompt(const std::vector<std::string>& names);

/// Inverse of build_prompt. Throws Error(kEmptySegment) on empty segments.
std::vector<std::string> parse_prompt(std::string_view text);

}  // namespace objexplore
