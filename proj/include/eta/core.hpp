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

// Linear speaker/content decomposition of frame-level speech representations.
//
// A frame s (length Q) of an utterance whose reduced speaker embedding is d
// (length P) is modelled as
//
//     s = f(d) + eta,   f(d) = d^T A + b
//
// where A (P x Q) is the latent basis and b (length Q) the latent bias. A and
// b are the least-squares fit of S ~ [D^T 1] [A; b^T] over a training corpus,
// computed from streamed sufficient statistics so that the stacked frame
// matrix is never held in memory.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "eta/types.hpp"

namespace eta {

// ---------------------------------------------------------------------------
// PCA

struct PcaModel {
  Vector mean;                 // length V
  Matrix components;           // P x V, orthonormal rows
  Vector explained_variance;   // length P, non-increasing, >= 0

  std::size_t v_dim() const { return static_cast<std::size_t>(mean.size()); }
  std::size_t p_dim() const { return static_cast<std::size_t>(components.rows()); }
};

// Streaming mean/covariance of embeddings, used to fit a PcaModel without
// holding every embedding. Moments are taken about the first sample to limit
// cancellation.
class CovarianceAccumulator {
 public:
  explicit CovarianceAccumulator(std::size_t v_dim);

  void add(const Eigen::Ref<const Vector>& x);

  std::size_t count() const { return count_; }
  std::size_t v_dim() const { return static_cast<std::size_t>(sum_.size()); }
  bool has_distinct_samples() const { return distinct_; }

  Vector mean() const;
  // Sample covariance (n - 1 denominator).
  Matrix covariance() const;

 private:
  std::size_t count_ = 0;
  bool distinct_ = false;
  Vector shift_;
  Vector sum_;
  Matrix cross_;
};

// Top-`p_dim` principal axes of the sample covariance, by decreasing
// eigenvalue. Each component is signed so its largest-magnitude entry is
// positive (first such entry on ties).
//
// Throws TooFewSamples when there are fewer than two distinct samples or
// p_dim > count - 1, DimensionMismatch on a wrong-length embedding, and
// InvalidArgument for p_dim == 0 or p_dim > V. Zero eigenvalues are allowed.
PcaModel fit_pca(std::span<const SpeakerEmbedding> embeddings, std::size_t p_dim);
PcaModel fit_pca(const CovarianceAccumulator& acc, std::size_t p_dim);

// d = components * (e - mean)
ReducedEmbedding project(const PcaModel& pca, const SpeakerEmbedding& e);
ReducedEmbedding project(const PcaModel& pca, const Eigen::Ref<const Vector>& e);

// ---------------------------------------------------------------------------
// Frame subsampling

// Returns `l` distinct rows chosen uniformly without replacement, in their
// original order. The generator is seeded from (seed, utt_id). Utterances with
// fewer than `l` rows are returned unchanged.
FrameMatrix subsample_frames(const FrameMatrix& s, std::size_t l, std::uint64_t seed);

// Row indices that subsample_frames would keep.
std::vector<std::size_t> subsample_indices(std::size_t rows, std::size_t l,
                                           std::uint64_t seed,
                                           const std::string& utt_id);

// ---------------------------------------------------------------------------
// Streaming least squares

// Per-utterance sufficient statistics. Because d is constant over an
// utterance, its whole contribution is the augmented embedding [d; 1], the
// frame count and the column sum of its frames.
struct UtteranceStats {
  Vector d_aug;       // length P + 1, last entry 1
  Vector frame_sum;   // length Q
  std::size_t n_frames = 0;
};

UtteranceStats utterance_stats(const ReducedEmbedding& d, const FrameMatrix& frames);

// Running D~D~^T ((P+1) x (P+1)) and D~S ((P+1) x Q).
class GramAccumulator {
 public:
  GramAccumulator(std::size_t p_dim, std::size_t q_dim);

  void add(const ReducedEmbedding& d, const FrameMatrix& frames);
  void add(const UtteranceStats& stats);
  void merge(const GramAccumulator& other);

  std::size_t p_dim() const { return p_dim_; }
  std::size_t q_dim() const { return q_dim_; }
  std::size_t n_frames() const { return n_frames_; }
  const Matrix& dtd() const { return dtd_; }
  const Matrix& dts() const { return dts_; }

 private:
  std::size_t p_dim_;
  std::size_t q_dim_;
  std::size_t n_frames_ = 0;
  Matrix dtd_;
  Matrix dts_;
};

enum class Solver { kSvd, kQr, kNormalEq };

const char* solver_name(Solver s) noexcept;
// Accepts "svd", "qr", "normal_eq" and "normal-eq"; throws InvalidArgument.
Solver parse_solver(const std::string& name);

struct FitMeta {
  std::size_t n_frames_used = 0;
  std::size_t l_subsample = 0;
  std::uint64_t rng_seed = 0;
  Solver solver = Solver::kSvd;
  std::string dataset_fingerprint;
};

struct LatentModel {
  Matrix basis;   // P x Q
  Vector bias;    // length Q
  FitMeta fit_meta;

  std::size_t p_dim() const { return static_cast<std::size_t>(basis.rows()); }
  std::size_t q_dim() const { return static_cast<std::size_t>(basis.cols()); }
};

struct SolveDiagnostics {
  double condition_number = 0.0;  // sigma_max / sigma_min of D~D~^T
  std::size_t rank = 0;           // singular values kept at rcond
};

inline constexpr double kPinvRcond = 1e-10;

// Minimizes ||S - D~^T A~||_F over the accumulated data by solving
// (D~D~^T) A~ = D~S. With kSvd the solve uses a pseudo-inverse that drops
// singular values below kPinvRcond * sigma_max. The first P rows of A~ are the
// basis and the last row the bias.
//
// Throws InsufficientData when n_frames < P + 1 and NonFinite if the
// accumulator holds NaN/Inf.
LatentModel solve(const GramAccumulator& acc, Solver solver = Solver::kSvd,
                  SolveDiagnostics* diagnostics = nullptr);

// f(d) = d^T basis + bias
Vector speaker_component(const LatentModel& model, const ReducedEmbedding& d);

// Subtracts f(d) from every frame. Shape and utt_id are preserved.
FrameMatrix eta_transform(const LatentModel& model, const ReducedEmbedding& d,
                          const FrameMatrix& frames);

}  // namespace eta
