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

#include <stdexcept>
#include <string>
#include <string_view>

namespace objexplore {

/// Stable, machine-readable error codes. The string form is part of the
/// public contract: it shows up in HTTP error bodies and CLI output.
enum class ErrorCode {
  kMalformedDocument,
  kNoEntries,
  kCapacityExceeded,
  kEmptyName,
  kInvalidName,
  kUnknownCategory,
  kDuplicateLabel,
  kEmptySegment,
  kUnknownLabel,
  kInvalidBox,
  kEmptyAfterClamp,
  kInvalidArgument,
  kNetwork,
  kTimeout,
  kUndecodable,
  kProtocolViolation,
  kConflictingWrite,
  kDanglingReference,
  kNotFound,
  kLabelCategoryMismatch,
  kCategoryRequired,
  kInvalidCursor,
  kUnknownSession,
  kNotFavorited,
  kInvalidComposition,
  kNothingPlaced,
  kOutOfBounds,
  kProviderFailure,
  kProviderContract,
  kGenerationInProgress,
  kMalformedEvent,
  kIo,
  kLocked,
  kConfig,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace objexplore
