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

#include "eta/error.hpp"

namespace eta {

const char* errc_name(Errc code) noexcept {
  switch (code) {
    case Errc::kOk: return "Ok";
    case Errc::kInvalidArgument: return "InvalidArgument";
    case Errc::kTooFewSamples: return "TooFewSamples";
    case Errc::kDimensionMismatch: return "DimensionMismatch";
    case Errc::kInsufficientData: return "InsufficientData";
    case Errc::kNonFinite: return "NonFinite";
    case Errc::kIoError: return "IoError";
    case Errc::kUnsupportedShape: return "UnsupportedShape";
    case Errc::kMalformedHeader: return "MalformedHeader";
    case Errc::kUnsupportedDtype: return "UnsupportedDtype";
    case Errc::kShapeRankError: return "ShapeRankError";
    case Errc::kDuplicateUttId: return "DuplicateUttId";
    case Errc::kMissingField: return "MissingField";
    case Errc::kBadJson: return "BadJson";
    case Errc::kValidationError: return "ValidationError";
    case Errc::kSchemaVersionMismatch: return "SchemaVersionMismatch";
    case Errc::kShapeMismatch: return "ShapeMismatch";
    case Errc::kTooFewPoints: return "TooFewPoints";
    case Errc::kClassTooSmall: return "ClassTooSmall";
    case Errc::kSingleClass: return "SingleClass";
    case Errc::kZeroVariance: return "ZeroVariance";
    case Errc::kInternal: return "Internal";
  }
  return "Unknown";
}

void fail(Errc code, const std::string& message) { throw Error(code, message); }

}  // namespace eta
