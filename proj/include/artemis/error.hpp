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

#pragma once

#include <stdexcept>
#include <string>

namespace artemis {

enum class ErrorCode {
  kShapeMismatch = 1,
  kNearZeroNorm,
  kNonFiniteGradient,
  kUnknownId,
  kBadSplit,
  kBadMagic,
  kTruncatedFile,
  kDuplicateId,
  kEmptyInput,
  kMissingSubset,
  kMissingCell,
  kLengthMismatch,
  kEmptySplit,
  kSpecInvalid,
  kIo,
  kConfig,
  kParse,
};

const char* error_code_name(ErrorCode code) noexcept;

// Every failure surfaced by the library is an artemis::Error carrying one of
// the codes above; the C API maps them onto integer status values.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + what),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace artemis
