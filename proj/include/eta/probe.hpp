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

// Speaker probing: how linearly decodable is speaker identity from a set of
// utterance-level vectors? Lower probe accuracy means less speaker
// information.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "eta/types.hpp"

namespace eta {

// Mean over frames.
Vector pool_utterance(const FrameMatrix& frames);

struct ProbeRow {
  std::string utt_id;
  std::string speaker_id;
  Vector vector;
};

// Rows plus class labels; class indices follow sorted speaker_id order.
class ProbeDataset {
 public:
  ProbeDataset() = default;
  explicit ProbeDataset(std::vector<ProbeRow> rows);

  const std::vector<ProbeRow>& rows() const { return rows_; }
  const std::vector<int>& labels() const { return labels_; }
  const std::vector<std::string>& classes() const { return classes_; }
  std::size_t class_count() const { return classes_.size(); }
  std::size_t size() const { return rows_.size(); }
  std::size_t dim() const { return rows_.empty() ? 0 : static_cast<std::size_t>(rows_[0].vector.size()); }

  // Row-stacked vectors of the selected rows.
  Matrix features(std::span<const std::size_t> idx) const;
  std::vector<int> labels_of(std::span<const std::size_t> idx) const;

 private:
  std::vector<ProbeRow> rows_;
  std::vector<int> labels_;
  std::vector<std::string> classes_;
};

using Folds = std::vector<std::vector<std::size_t>>;

// Shuffles each class with a seeded generator, then deals rows to folds
// round-robin with the fold cursor carried across classes. Each class's
// per-fold counts (and the fold sizes) differ by at most one.
// Throws ClassTooSmall when a class has fewer than k rows.
Folds stratified_folds(const ProbeDataset& dataset, std::size_t k, std::uint64_t seed);

struct ProbeTrainingOptions {
  double lambda = 1e-4;
  std::size_t epochs = 200;
};

// One-vs-rest linear hinge-loss classifier trained by full-batch subgradient
// descent with step 1/(lambda * t) from a zero start, on features
// standardized by the training mean/std and augmented with a constant 1.
class LinearProbe {
 public:
  LinearProbe() = default;
  LinearProbe(Vector feature_mean, Vector feature_scale, Matrix weights)
      : mean_(std::move(feature_mean)), scale_(std::move(feature_scale)), weights_(std::move(weights)) {}

  std::size_t class_count() const { return static_cast<std::size_t>(weights_.cols()); }
  Vector scores(const Eigen::Ref<const Vector>& x) const;
  // Argmax score; ties go to the lowest class index.
  int predict(const Eigen::Ref<const Vector>& x) const;

  const Matrix& weights() const { return weights_; }

 private:
  Vector mean_;
  Vector scale_;
  Matrix weights_;  // (dim + 1) x classes
};

// Throws SingleClass when fewer than two labels occur, DimensionMismatch when
// rows and labels disagree.
LinearProbe train_linear_probe(const Matrix& x, std::span<const int> labels,
                               std::size_t class_count,
                               const ProbeTrainingOptions& options = {});

struct ProbeReport {
  std::vector<double> fold_accuracies;  // proportions in [0, 1]
  double mean = 0.0;
  double std = 0.0;  // sample std (k - 1 denominator)
  std::size_t k = 0;
  std::uint64_t seed = 0;
};

// Mean and sample std of already-computed fold accuracies.
ProbeReport aggregate_folds(std::span<const double> fold_accuracies, std::uint64_t seed = 0);

ProbeReport run_probe(const ProbeDataset& dataset, std::size_t k, std::uint64_t seed,
                      const ProbeTrainingOptions& options = {});
ProbeReport run_probe(const ProbeDataset& dataset, const Folds& folds, std::uint64_t seed,
                      const ProbeTrainingOptions& options = {});

struct PairedTestResult {
  double t_statistic = 0.0;
  double p_value = 1.0;  // two-tailed
  std::size_t dof = 0;
};

// t = mean(a - b) / (sd(a - b) / sqrt(k)), two-tailed p from Student's t with
// k - 1 dof. Throws ZeroVariance when every difference is equal and
// InvalidArgument for mismatched lengths or k < 2.
PairedTestResult paired_t_test(std::span<const double> a, std::span<const double> b);

enum class ProjectionMethod { kPca2d, kRawDump };

ProjectionMethod parse_projection(const std::string& name);

// kPca2d: CSV `utt_id,speaker_id,x,y` at `path`, coordinates from the top two
// principal axes. kRawDump: directory `path` with vectors.npy (f64) and
// labels.csv (`utt_id,speaker_id`) for external projection tools.
void export_projection(const ProbeDataset& dataset, ProjectionMethod method,
                       const std::filesystem::path& path);

ProbeDataset load_raw_dump(const std::filesystem::path& dir);

}  // namespace eta
