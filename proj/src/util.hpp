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

// Internal helpers shared by the library sources. Not installed.

#pragma once

#include <cstdint>
#include <chrono>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace objexplore::detail {

std::string_view trim(std::string_view s);
std::vector<std::string_view> split_lines(std::string_view text);

std::vector<std::uint8_t> read_bytes(const std::filesystem::path& path);
std::string read_text(const std::filesystem::path& path);

/// Writes to a temporary sibling then renames over the target, so readers
/// and concurrent writers of identical content never see a partial file.
void write_atomic(const std::filesystem::path& path,
                  std::string_view contents);

/// Appends one line (a trailing '\n' is added) and flushes.
void append_line(const std::filesystem::path& path, std::string_view line);

/// "YYYY-MM-DDTHH:MM:SSZ", truncated to whole seconds.
std::string format_utc(std::chrono::system_clock::time_point tp);

}  // namespace objexplore::detail
