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

#include "objexplore/error.hpp"

namespace objexplore {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kMalformedDocument: return "malformed_document";
    case ErrorCode::kNoEntries: return "no_entries";
    case ErrorCode::kCapacityExceeded: return "capacity_exceeded";
    case ErrorCode::kEmptyName: return "empty_name";
    case ErrorCode::kInvalidName: return "invalid_name";
    case ErrorCode::kUnknownCategory: return "unknown_category";
    case ErrorCode::kDuplicateLabel: return "duplicate_label";
    case ErrorCode::kEmptySegment: return "empty_segment";
    case ErrorCode::kUnknownLabel: return "unknown_label";
    case ErrorCode::kInvalidBox: return "invalid_box";
    case ErrorCode::kEmptyAfterClamp: return "empty_after_clamp";
    case ErrorCode::kInvalidArgument: return "invalid_argument";
    case ErrorCode::kNetwork: return "network";
    case ErrorCode::kTimeout: return "timeout";
    case ErrorCode::kUndecodable: return "undecodable";
    case ErrorCode::kProtocolViolation: return "protocol_violation";
    case ErrorCode::kConflictingWrite: return "conflicting_write";
    case ErrorCode::kDanglingReference: return "dangling_reference";
    case ErrorCode::kNotFound: return "not_found";
    case ErrorCode::kLabelCategoryMismatch: return "label_category_mismatch";
    case ErrorCode::kCategoryRequired: return "category_required";
    case ErrorCode::kInvalidCursor: return "invalid_cursor";
    case ErrorCode::kUnknownSession: return "unknown_session";
    case ErrorCode::kNotFavorited: return "not_favorited";
    case ErrorCode::kInvalidComposition: return "invalid_composition";
    case ErrorCode::kNothingPlaced: return "nothing_placed";
    case ErrorCode::kOutOfBounds: return "out_of_bounds";
    case ErrorCode::kProviderFailure: return "provider_failure";
    case ErrorCode::kProviderContract: return "provider_contract_violation";
    case ErrorCode::kGenerationInProgress: return "generation_in_progress";
    case ErrorCode::kMalformedEvent: return "malformed_event";
    case ErrorCode::kIo: return "io";
    case ErrorCode::kLocked: return "locked";
    case ErrorCode::kConfig: return "config";
  }
  return "unknown";
}

}  // namespace objexplore
