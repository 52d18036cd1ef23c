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

#include "eta/core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <Eigen/SVD>

#include "eta/error.hpp"
#include "eta/rng.hpp"

namespace eta {

bool all_finite(const Eigen::Ref<const Matrix>& m) { return m.allFinite(); }
bool all_finite(const Eigen::Ref<const Vector>& v) { return v.allFinite(); }

void validate(const FrameMatrix& frames, std::size_t expected_dim) {
  require(frames.data.rows() >= 1 && frames.data.cols() >= 1, Errc::kInvalidArgument,
          "frame matrix '" + frames.utt_id + "' is empty");
  if (expected_dim != 0) {
    require(frames.dim() == expected_dim, Errc::kDimensionMismatch,
            "frame matrix '" + frames.utt_id + "' has " + std::to_string(frames.dim()) +
                " columns, expected " + std::to_string(expected_dim));
  }
  require(frames.data.allFinite(), Errc::kNonFinite,
          "frame matrix '" + frames.utt_id + "' contains non-finite values");
}

void validate(const SpeakerEmbedding& embedding, std::size_t expected_dim) {
  require(embedding.raw.size() >= 1, Errc::kInvalidArgument,
          "embedding '" + embedding.utt_id + "' is empty");
  if (expected_dim != 0) {
    require(static_cast<std::size_t>(embedding.raw.size()) == expected_dim,
            Errc::kDimensionMismatch,
            "embedding '" + embedding.utt_id + "' has length " +
                std::to_string(embedding.raw.size()) + ", expected " +
                std::to_string(expected_dim));
  }
  require(embedding.raw.allFinite(), Errc::kNonFinite,
          "embedding '" + embedding.utt_id + "' contains non-finite values");
}

// ---------------------------------------------------------------------------
// PCA

CovarianceAccumulator::CovarianceAccumulator(std::size_t v_dim)
    : shift_(Vector::Zero(static_cast<Eigen::Index>(v_dim))),
      sum_(Vector::Zero(static_cast<Eigen::Index>(v_dim))),
      cross_(Matrix::Zero(static_cast<Eigen::Index>(v_dim),
                          static_cast<Eigen::Index>(v_dim))) {
  require(v_dim >= 1, Errc::kInvalidArgument, "embedding dimension must be >= 1");
}

void CovarianceAccumulator::add(const Eigen::Ref<const Vector>& x) {
  require(x.size() == sum_.size(), Errc::kDimensionMismatch,
          "embedding has length " + std::to_string(x.size()) + ", expected " +
              std::to_string(sum_.size()));
  require(x.allFinite(), Errc::kNonFinite, "embedding contains non-finite values");
  if (count_ == 0) {
    shift_ = x;
  } else if (!distinct_ && x != shift_) {
    distinct_ = true;
  }
  const Vector y = x - shift_;
  sum_ += y;
  cross_.selfadjointView<Eigen::Lower>().rankUpdate(y);
  ++count_;
}

Vector CovarianceAccumulator::mean() const {
  require(count_ >= 1, Errc::kTooFewSamples, "no samples accumulated");
  return shift_ + sum_ / static_cast<double>(count_);
}

Matrix CovarianceAccumulator::covariance() const {
  require(count_ >= 2, Errc::kTooFewSamples, "covariance needs at least 2 samples");
  const double n = static_cast<double>(count_);
  Matrix full = cross_.selfadjointView<Eigen::Lower>();
  full.noalias() -= (sum_ * sum_.transpose()) / n;
  full /= (n - 1.0);
  return full;
}

PcaModel fit_pca(std::span<const SpeakerEmbedding> embeddings, std::size_t p_dim) {
  require(embeddings.size() >= 2, Errc::kTooFewSamples,
          "PCA needs at least 2 embeddings, got " + std::to_string(embeddings.size()));
  CovarianceAccumulator acc(static_cast<std::size_t>(embeddings.front().raw.size()));
  for (const auto& e : embeddings) {
    require(e.raw.size() == embeddings.front().raw.size(), Errc::kDimensionMismatch,
            "embedding '" + e.utt_id + "' has length " + std::to_string(e.raw.size()) +
                ", expected " + std::to_string(embeddings.front().raw.size()));
    acc.add(e.raw);
  }
  return fit_pca(acc, p_dim);
}

PcaModel fit_pca(const CovarianceAccumulator& acc, std::size_t p_dim) {
  const std::size_t v_dim = acc.v_dim();
  require(acc.count() >= 2 && acc.has_distinct_samples(), Errc::kTooFewSamples,
          "PCA needs at least 2 distinct embeddings");
  require(p_dim >= 1 && p_dim <= v_dim, Errc::kInvalidArgument,
          "p_dim must be in [1, " + std::to_string(v_dim) + "], got " +
              std::to_string(p_dim));
  require(p_dim <= acc.count() - 1, Errc::kTooFewSamples,
          "p_dim = " + std::to_string(p_dim) + " needs at least " +
              std::to_string(p_dim + 1) + " embeddings, got " +
              std::to_string(acc.count()));

  const Eigen::MatrixXd cov = acc.covariance();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
  require(eig.info() == Eigen::Success, Errc::kInternal, "eigendecomposition failed");

  // Eigen returns ascending eigenvalues.
  PcaModel model;
  model.mean = acc.mean();
  model.components.resize(static_cast<Eigen::Index>(p_dim), static_cast<Eigen::Index>(v_dim));
  model.explained_variance.resize(static_cast<Eigen::Index>(p_dim));
  const Eigen::Index last = static_cast<Eigen::Index>(v_dim) - 1;
  for (Eigen::Index k = 0; k < static_cast<Eigen::Index>(p_dim); ++k) {
    Vector axis = eig.eigenvectors().col(last - k);
    Eigen::Index pivot = 0;
    double best = -1.0;
    for (Eigen::Index j = 0; j < axis.size(); ++j) {
      if (std::abs(axis[j]) > best) {
        best = std::abs(axis[j]);
        pivot = j;
      }
    }
    if (axis[pivot] < 0) axis = -axis;
    model.components.row(k) = axis.transpose();
    model.explained_variance[k] = std::max(0.0, eig.eigenvalues()[last - k]);
  }
  return model;
}

ReducedEmbedding project(const PcaModel& pca, const Eigen::Ref<const Vector>& e) {
  require(static_cast<std::size_t>(e.size()) == pca.v_dim(), Errc::kDimensionMismatch,
          "embedding has length " + std::to_string(e.size()) + ", PCA expects " +
              std::to_string(pca.v_dim()));
  return ReducedEmbedding{pca.components * (e - pca.mean)};
}

ReducedEmbedding project(const PcaModel& pca, const SpeakerEmbedding& e) {
  require(static_cast<std::size_t>(e.raw.size()) == pca.v_dim(), Errc::kDimensionMismatch,
          "embedding '" + e.utt_id + "' has length " + std::to_string(e.raw.size()) +
              ", PCA expects " + std::to_string(pca.v_dim()));
  return project(pca, Eigen::Ref<const Vector>(e.raw));
}

// ---------------------------------------------------------------------------
// Subsampling

std::vector<std::size_t> subsample_indices(std::size_t rows, std::size_t l,
                                           std::uint64_t seed,
                                           const std::string& utt_id) {
  require(l >= 1, Errc::kInvalidArgument, "subsample size must be >= 1");
  std::vector<std::size_t> idx(rows);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  if (rows <= l) return idx;
  // Partial Fisher-Yates: the first l slots become a uniform l-subset.
  Rng rng(keyed_seed(seed, utt_id));
  for (std::size_t i = 0; i < l; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.uniform_index(rows - i));
    std::swap(idx[i], idx[j]);
  }
  idx.resize(l);
  std::sort(idx.begin(), idx.end());
  return idx;
}

FrameMatrix subsample_frames(const FrameMatrix& s, std::size_t l, std::uint64_t seed) {
  validate(s);
  if (s.frames() <= l) {
    require(l >= 1, Errc::kInvalidArgument, "subsample size must be >= 1");
    return s;
  }
  const auto idx = subsample_indices(s.frames(), l, seed, s.utt_id);
  FrameMatrix out{s.utt_id, Matrix(static_cast<Eigen::Index>(idx.size()), s.data.cols())};
  for (std::size_t r = 0; r < idx.size(); ++r) {
    out.data.row(static_cast<Eigen::Index>(r)) = s.data.row(static_cast<Eigen::Index>(idx[r]));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Accumulation

UtteranceStats utterance_stats(const ReducedEmbedding& d, const FrameMatrix& frames) {
  require(d.d.size() >= 1, Errc::kInvalidArgument, "reduced embedding is empty");
  UtteranceStats st;
  st.d_aug.resize(d.d.size() + 1);
  st.d_aug.head(d.d.size()) = d.d;
  st.d_aug[d.d.size()] = 1.0;
  st.n_frames = frames.frames();
  // Sequential row order keeps the sum independent of any threading.
  st.frame_sum = Vector::Zero(frames.data.cols());
  for (Eigen::Index r = 0; r < frames.data.rows(); ++r) {
    st.frame_sum += frames.data.row(r).transpose();
  }
  return st;
}

GramAccumulator::GramAccumulator(std::size_t p_dim, std::size_t q_dim)
    : p_dim_(p_dim),
      q_dim_(q_dim),
      dtd_(Matrix::Zero(static_cast<Eigen::Index>(p_dim + 1),
                        static_cast<Eigen::Index>(p_dim + 1))),
      dts_(Matrix::Zero(static_cast<Eigen::Index>(p_dim + 1),
                        static_cast<Eigen::Index>(q_dim))) {
  require(p_dim >= 1 && q_dim >= 1, Errc::kInvalidArgument,
          "accumulator dimensions must be >= 1");
}

void GramAccumulator::add(const ReducedEmbedding& d, const FrameMatrix& frames) {
  require(static_cast<std::size_t>(d.d.size()) == p_dim_, Errc::kDimensionMismatch,
          "reduced embedding has length " + std::to_string(d.d.size()) + ", expected " +
              std::to_string(p_dim_));
  require(frames.dim() == q_dim_, Errc::kDimensionMismatch,
          "frames '" + frames.utt_id + "' have " + std::to_string(frames.dim()) +
              " columns, expected " + std::to_string(q_dim_));
  add(utterance_stats(d, frames));
}

void GramAccumulator::add(const UtteranceStats& st) {
  require(static_cast<std::size_t>(st.d_aug.size()) == p_dim_ + 1 &&
              static_cast<std::size_t>(st.frame_sum.size()) == q_dim_,
          Errc::kDimensionMismatch, "utterance statistics have the wrong shape");
  const double n = static_cast<double>(st.n_frames);
  // Scale after the product so dtd stays exactly symmetric.
  for (Eigen::Index i = 0; i < dtd_.rows(); ++i) {
    for (Eigen::Index j = 0; j < dtd_.cols(); ++j) {
      dtd_(i, j) += (st.d_aug[i] * st.d_aug[j]) * n;
    }
  }
  dts_.noalias() += st.d_aug * st.frame_sum.transpose();
  n_frames_ += st.n_frames;
}

void GramAccumulator::merge(const GramAccumulator& other) {
  require(other.p_dim_ == p_dim_ && other.q_dim_ == q_dim_, Errc::kDimensionMismatch,
          "cannot merge accumulators of different shapes");
  dtd_ += other.dtd_;
  dts_ += other.dts_;
  n_frames_ += other.n_frames_;
}

// ---------------------------------------------------------------------------
// Solve

const char* solver_name(Solver s) noexcept {
  switch (s) {
    case Solver::kSvd: return "svd";
    case Solver::kQr: return "qr";
    case Solver::kNormalEq: return "normal_eq";
  }
  return "svd";
}

Solver parse_solver(const std::string& name) {
  if (name == "svd") return Solver::kSvd;
  if (name == "qr") return Solver::kQr;
  if (name == "normal_eq" || name == "normal-eq") return Solver::kNormalEq;
  fail(Errc::kInvalidArgument, "unknown solver '" + name + "'");
}

LatentModel solve(const GramAccumulator& acc, Solver solver, SolveDiagnostics* diagnostics) {
  const std::size_t p = acc.p_dim();
  require(acc.n_frames() >= p + 1, Errc::kInsufficientData,
          "need at least " + std::to_string(p + 1) + " frames, got " +
              std::to_string(acc.n_frames()));
  require(acc.dtd().allFinite() && acc.dts().allFinite(), Errc::kNonFinite,
          "accumulated statistics contain non-finite values");

  const Eigen::MatrixXd gram = acc.dtd();
  const Eigen::MatrixXd rhs = acc.dts();

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(gram, Eigen::ComputeFullU | Eigen::ComputeFullV);
  svd.setThreshold(kPinvRcond);
  const auto& sv = svd.singularValues();

  Eigen::MatrixXd coef;
  switch (solver) {
    case Solver::kSvd:
      coef = svd.solve(rhs);
      break;
    case Solver::kQr:
      coef = gram.colPivHouseholderQr().solve(rhs);
      break;
    case Solver::kNormalEq: {
      Eigen::LDLT<Eigen::MatrixXd> ldlt(gram);
      require(ldlt.info() == Eigen::Success, Errc::kInternal,
              "normal-equation factorization failed");
      coef = ldlt.solve(rhs);
      break;
    }
  }
  require(coef.allFinite(), Errc::kNonFinite, "least-squares solution is not finite");

  if (diagnostics) {
    const double smax = sv.size() ? sv[0] : 0.0;
    const double smin = sv.size() ? sv[sv.size() - 1] : 0.0;
    diagnostics->condition_number =
        smin > 0 ? smax / smin : std::numeric_limits<double>::infinity();
    diagnostics->rank = static_cast<std::size_t>(svd.rank());
  }

  LatentModel model;
  const auto pi = static_cast<Eigen::Index>(p);
  model.basis = coef.topRows(pi);
  model.bias = coef.row(pi).transpose();
  model.fit_meta.n_frames_used = acc.n_frames();
  model.fit_meta.solver = solver;
  return model;
}

Vector speaker_component(const LatentModel& model, const ReducedEmbedding& d) {
  require(static_cast<std::size_t>(d.d.size()) == model.p_dim(), Errc::kDimensionMismatch,
          "reduced embedding has length " + std::to_string(d.d.size()) +
              ", model expects " + std::to_string(model.p_dim()));
  return model.basis.transpose() * d.d + model.bias;
}

FrameMatrix eta_transform(const LatentModel& model, const ReducedEmbedding& d,
                          const FrameMatrix& frames) {
  require(frames.dim() == model.q_dim(), Errc::kDimensionMismatch,
          "frames '" + frames.utt_id + "' have " + std::to_string(frames.dim()) +
              " columns, model expects " + std::to_string(model.q_dim()));
  const RowVector f = speaker_component(model, d).transpose();
  FrameMatrix out{frames.utt_id, frames.data};
  out.data.rowwise() -= f;
  return out;
}

}  // namespace eta
