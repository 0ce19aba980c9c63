/*
 * Copyright (c) 2026 The artemis-head Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "artemis/error.hpp"

namespace artemis {

const char* error_code_name(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::kShapeMismatch: return "ShapeMismatch";
    case ErrorCode::kNearZeroNorm: return "NearZeroNorm";
    case ErrorCode::kNonFiniteGradient: return "NonFiniteGradient";
    case ErrorCode::kUnknownId: return "UnknownId";
    case ErrorCode::kBadSplit: return "BadSplit";
    case ErrorCode::kBadMagic: return "BadMagic";
    case ErrorCode::kTruncatedFile: return "TruncatedFile";
    case ErrorCode::kDuplicateId: return "DuplicateId";
    case ErrorCode::kEmptyInput: return "EmptyInput";
    case ErrorCode::kMissingSubset: return "MissingSubset";
    case ErrorCode::kMissingCell: return "MissingCell";
    case ErrorCode::kLengthMismatch: return "LengthMismatch";
    case ErrorCode::kEmptySplit: return "EmptySplit";
    case ErrorCode::kSpecInvalid: return "SpecInvalid";
    case ErrorCode::kIo: return "Io";
    case ErrorCode::kConfig: return "Config";
    case ErrorCode::kParse: return "Parse";
  }
  return "Unknown";
}

}  // namespace artemis
