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

#include "eta/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <json.hpp>

#include "eta/datastore.hpp"
#include "eta/error.hpp"
#include "eta/rng.hpp"

namespace eta {

FrameMatrix utterance_standardize(const FrameMatrix& frames, double epsilon) {
  validate(frames);
  require(epsilon > 0, Errc::kInvalidArgument, "epsilon must be positive");
  const double n = static_cast<double>(frames.frames());
  const RowVector mean = frames.data.colwise().sum() / n;
  Matrix centered = frames.data.rowwise() - mean;
  const RowVector sd = (centered.array().square().colwise().sum() / n).sqrt().matrix();
  const RowVector scale = sd.cwiseMax(epsilon);
  centered.array().rowwise() /= scale.array();
  return FrameMatrix{frames.utt_id, std::move(centered)};
}

namespace {

double squared_distance(const Eigen::Ref<const RowVector>& a, const Eigen::Ref<const RowVector>& b) {
  return (a - b).squaredNorm();
}

Matrix stack(std::span<const FrameMatrix> frames) {
  Eigen::Index rows = 0, cols = -1;
  for (const auto& f : frames) {
    validate(f);
    if (cols < 0) cols = f.data.cols();
    require(f.data.cols() == cols, Errc::kDimensionMismatch,
            "frames '" + f.utt_id + "' have " + std::to_string(f.data.cols()) +
                " columns, expected " + std::to_string(cols));
    rows += f.data.rows();
  }
  Matrix x(rows, std::max<Eigen::Index>(cols, 0));
  Eigen::Index r = 0;
  for (const auto& f : frames) {
    x.middleRows(r, f.data.rows()) = f.data;
    r += f.data.rows();
  }
  return x;
}

Matrix kmeans_pp_init(const Matrix& x, std::size_t c, Rng& rng) {
  const Eigen::Index n = x.rows();
  Matrix centroids(static_cast<Eigen::Index>(c), x.cols());
  centroids.row(0) = x.row(static_cast<Eigen::Index>(rng.uniform_index(static_cast<std::uint64_t>(n))));
  Vector d2(n);
  for (Eigen::Index i = 0; i < n; ++i) d2[i] = squared_distance(x.row(i), centroids.row(0));
  for (std::size_t k = 1; k < c; ++k) {
    const double total = d2.sum();
    Eigen::Index pick = n - 1;
    if (total > 0) {
      const double target = rng.uniform01() * total;
      double run = 0.0;
      for (Eigen::Index i = 0; i < n; ++i) {
        run += d2[i];
        if (target < run && d2[i] > 0) {
          pick = i;
          break;
        }
      }
      // Rounding can leave target >= run at the end; fall back to the last
      // point with positive weight.
      if (d2[pick] == 0) {
        for (Eigen::Index i = n - 1; i >= 0; --i) {
          if (d2[i] > 0) {
            pick = i;
            break;
          }
        }
      }
    } else {
      pick = static_cast<Eigen::Index>(rng.uniform_index(static_cast<std::uint64_t>(n)));
    }
    const auto ki = static_cast<Eigen::Index>(k);
    centroids.row(ki) = x.row(pick);
    for (Eigen::Index i = 0; i < n; ++i) {
      d2[i] = std::min(d2[i], squared_distance(x.row(i), centroids.row(ki)));
    }
  }
  return centroids;
}

std::size_t nearest(const Matrix& centroids, const Eigen::Ref<const RowVector>& x, double* dist) {
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (Eigen::Index k = 0; k < centroids.rows(); ++k) {
    const double d = squared_distance(x, centroids.row(k));
    if (d < best_d) {
      best_d = d;
      best = static_cast<std::size_t>(k);
    }
  }
  if (dist) *dist = best_d;
  return best;
}

}  // namespace

KMeansModel fit_kmeans(std::span<const FrameMatrix> frames, const KMeansOptions& opt) {
  require(opt.c_count >= 1, Errc::kInvalidArgument, "c_count must be >= 1");
  require(opt.max_iters >= 1, Errc::kInvalidArgument, "max_iters must be >= 1");
  const Matrix x = stack(frames);
  const Eigen::Index n = x.rows();
  require(static_cast<std::size_t>(n) >= opt.c_count, Errc::kTooFewPoints,
          "k-means with " + std::to_string(opt.c_count) + " centroids needs at least that many "
          "frames, got " + std::to_string(n));

  Rng rng(mix_seed(opt.rng_seed, 0x6b6d65616e73ULL));
  KMeansModel model;
  model.rng_seed = opt.rng_seed;
  model.centroids = kmeans_pp_init(x, opt.c_count, rng);

  const auto c = static_cast<Eigen::Index>(opt.c_count);
  std::vector<std::size_t> assign(static_cast<std::size_t>(n));
  Vector dist(n);
  for (std::size_t it = 0; it < opt.max_iters; ++it) {
    double inertia = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      assign[static_cast<std::size_t>(i)] = nearest(model.centroids, x.row(i), &dist[i]);
      inertia += dist[i];
    }
    model.inertia_history.push_back(inertia);
    model.inertia = inertia;
    model.iterations = it + 1;
    if (it > 0) {
      const double prev = model.inertia_history[it - 1];
      const double rel = prev > 0 ? (prev - inertia) / prev : 0.0;
      if (rel < opt.tol) break;
    }
    if (it + 1 == opt.max_iters) break;

    Matrix sums = Matrix::Zero(c, x.cols());
    std::vector<std::size_t> counts(opt.c_count, 0);
    for (Eigen::Index i = 0; i < n; ++i) {
      const auto k = assign[static_cast<std::size_t>(i)];
      sums.row(static_cast<Eigen::Index>(k)) += x.row(i);
      ++counts[k];
    }
    for (Eigen::Index k = 0; k < c; ++k) {
      const auto kk = static_cast<std::size_t>(k);
      if (counts[kk] > 0) {
        model.centroids.row(k) = sums.row(k) / static_cast<double>(counts[kk]);
        continue;
      }
      // Empty cluster: move it onto the worst-served point, which then no
      // longer counts as far from anything.
      Eigen::Index far = 0;
      dist.maxCoeff(&far);
      model.centroids.row(k) = x.row(far);
      dist[far] = 0.0;
    }
  }
  return model;
}

std::size_t nearest_centroid(const KMeansModel& model, const Eigen::Ref<const RowVector>& x) {
  require(x.size() == model.centroids.cols(), Errc::kDimensionMismatch,
          "frame has " + std::to_string(x.size()) + " dims, centroids have " +
              std::to_string(model.centroids.cols()));
  return nearest(model.centroids, x, nullptr);
}

FrameMatrix quantize(const KMeansModel& model, const FrameMatrix& frames) {
  require(frames.data.cols() == model.centroids.cols(), Errc::kDimensionMismatch,
          "frames '" + frames.utt_id + "' have " + std::to_string(frames.dim()) +
              " columns, centroids have " + std::to_string(model.centroids.cols()));
  FrameMatrix out{frames.utt_id, Matrix(frames.data.rows(), frames.data.cols())};
  for (Eigen::Index r = 0; r < frames.data.rows(); ++r) {
    const auto k = nearest(model.centroids, frames.data.row(r), nullptr);
    out.data.row(r) = model.centroids.row(static_cast<Eigen::Index>(k));
  }
  return out;
}

void save_kmeans(const KMeansModel& model, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) fail(Errc::kIoError, dir.string() + ": " + ec.message());
  nlohmann::ordered_json meta;
  meta["schema_version"] = kBundleSchemaVersion;
  meta["kind"] = "kmeans";
  meta["c_count"] = model.c_count();
  meta["Q"] = model.centroids.cols();
  meta["inertia"] = model.inertia;
  meta["rng_seed"] = model.rng_seed;
  meta["iterations"] = model.iterations;
  write_matrix(dir / "centroids.npy", model.centroids, Precision::kF64);
  write_text_file(dir / "meta.json", meta.dump(2) + "\n");
}

KMeansModel load_kmeans(const std::filesystem::path& dir) {
  nlohmann::json meta;
  try {
    meta = nlohmann::json::parse(read_text_file(dir / "meta.json"));
    if (meta.at("schema_version").get<int>() != kBundleSchemaVersion) {
      fail(Errc::kSchemaVersionMismatch, (dir / "meta.json").string() + ": unsupported schema");
    }
  } catch (const nlohmann::json::exception& e) {
    fail(Errc::kBadJson, (dir / "meta.json").string() + ": " + e.what());
  }
  KMeansModel m;
  try {
    m.inertia = meta.at("inertia").get<double>();
    m.rng_seed = meta.at("rng_seed").get<std::uint64_t>();
    m.iterations = meta.at("iterations").get<std::size_t>();
  } catch (const nlohmann::json::exception& e) {
    fail(Errc::kMissingField, (dir / "meta.json").string() + ": " + e.what());
  }
  const NpyArray c = read_array(dir / "centroids.npy");
  const auto want_c = meta.value("c_count", std::size_t{0});
  const auto want_q = meta.value("Q", std::size_t{0});
  if (c.rank() != 2 || c.shape[0] != want_c || c.shape[1] != want_q) {
    fail(Errc::kShapeMismatch, (dir / "centroids.npy").string() + ": shape does not match meta");
  }
  m.centroids = to_matrix(c);
  return m;
}

}  // namespace eta
