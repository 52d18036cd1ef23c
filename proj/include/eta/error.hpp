// Copyright 2026 The eta-decompose Authors
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

namespace eta {

// Error classes shared by every module. The numeric values are part of the C
// ABI (see eta.h) and must not be reordered.
enum class Errc : int {
  kOk = 0,
  kInvalidArgument = 1,
  kTooFewSamples = 2,
  kDimensionMismatch = 3,
  kInsufficientData = 4,
  kNonFinite = 5,
  kIoError = 6,
  kUnsupportedShape = 7,
  kMalformedHeader = 8,
  kUnsupportedDtype = 9,
  kShapeRankError = 10,
  kDuplicateUttId = 11,
  kMissingField = 12,
  kBadJson = 13,
  kValidationError = 14,
  kSchemaVersionMismatch = 15,
  kShapeMismatch = 16,
  kTooFewPoints = 17,
  kClassTooSmall = 18,
  kSingleClass = 19,
  kZeroVariance = 20,
  kInternal = 21,
};

// Stable CamelCase name, e.g. "MalformedHeader".
const char* errc_name(Errc code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

[[noreturn]] void fail(Errc code, const std::string& message);

inline void require(bool condition, Errc code, const std::string& message) {
  if (!condition) fail(code, message);
}

}  // namespace eta
