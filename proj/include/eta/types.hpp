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

#include <cstddef>
#include <cstdint>
#include <string>

#include <Eigen/Core>

namespace eta {

// All numerics run in double regardless of on-disk storage precision.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;
using RowVector = Eigen::RowVectorXd;

enum class Precision { kF32, kF64 };

const char* precision_name(Precision p) noexcept;

// One utterance's frame-level representation: rows are frames, cols are the
// feature dimension Q.
struct FrameMatrix {
  std::string utt_id;
  Matrix data;

  std::size_t frames() const { return static_cast<std::size_t>(data.rows()); }
  std::size_t dim() const { return static_cast<std::size_t>(data.cols()); }
};

// Raw V-dimensional utterance embedding from a speaker encoder.
struct SpeakerEmbedding {
  std::string utt_id;
  Vector raw;
};

// Speaker embedding after PCA reduction to P dimensions.
struct ReducedEmbedding {
  Vector d;
};

// Throws NonFinite if any entry is NaN/Inf, DimensionMismatch if
// `expected_dim` is non-zero and does not match the column count, and
// InvalidArgument for an empty matrix.
void validate(const FrameMatrix& frames, std::size_t expected_dim = 0);
void validate(const SpeakerEmbedding& embedding, std::size_t expected_dim = 0);

bool all_finite(const Eigen::Ref<const Matrix>& m);
bool all_finite(const Eigen::Ref<const Vector>& v);

}  // namespace eta
