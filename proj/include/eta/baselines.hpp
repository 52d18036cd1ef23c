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

// Non-neural comparison transforms: per-utterance standardization and k-means
// quantization of frames.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "eta/types.hpp"

namespace eta {

// Per column j: (x_j - mean_j) / max(std_j, epsilon), population std over the
// utterance's frames.
FrameMatrix utterance_standardize(const FrameMatrix& frames, double epsilon = 1e-8);

struct KMeansModel {
  Matrix centroids;  // C x Q
  double inertia = 0.0;
  std::uint64_t rng_seed = 0;
  std::size_t iterations = 0;
  std::vector<double> inertia_history;  // one value per Lloyd iteration

  std::size_t c_count() const { return static_cast<std::size_t>(centroids.rows()); }
};

struct KMeansOptions {
  std::size_t c_count = 8;
  std::uint64_t rng_seed = 0;
  std::size_t max_iters = 100;
  double tol = 1e-6;
};

// Lloyd's algorithm from a k-means++ start. Stops after max_iters or when the
// relative inertia change drops below tol. A cluster that loses all its points
// is re-seeded with the point farthest from its current centroid.
// Throws TooFewPoints when the frames hold fewer than c_count rows.
KMeansModel fit_kmeans(std::span<const FrameMatrix> frames, const KMeansOptions& options);

// Index of the nearest centroid; ties go to the lowest index.
std::size_t nearest_centroid(const KMeansModel& model, const Eigen::Ref<const RowVector>& x);

// Replaces each row with its nearest centroid. Throws DimensionMismatch.
FrameMatrix quantize(const KMeansModel& model, const FrameMatrix& frames);

// centroids.npy + meta.json
void save_kmeans(const KMeansModel& model, const std::filesystem::path& dir);
KMeansModel load_kmeans(const std::filesystem::path& dir);

}  // namespace eta
