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

#include "eta/probe.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>

#include "eta/core.hpp"
#include "eta/datastore.hpp"
#include "eta/error.hpp"
#include "eta/rng.hpp"
#include "eta/student_t.hpp"

namespace eta {

Vector pool_utterance(const FrameMatrix& frames) {
  require(frames.data.rows() >= 1, Errc::kInvalidArgument,
          "cannot pool utterance '" + frames.utt_id + "' with no frames");
  return frames.data.colwise().mean().transpose();
}

ProbeDataset::ProbeDataset(std::vector<ProbeRow> rows) : rows_(std::move(rows)) {
  require(!rows_.empty(), Errc::kInvalidArgument, "probe dataset is empty");
  const auto dim = rows_.front().vector.size();
  std::map<std::string, int> index;
  for (const auto& r : rows_) {
    require(r.vector.size() == dim, Errc::kDimensionMismatch,
            "probe vector for '" + r.utt_id + "' has length " + std::to_string(r.vector.size()) +
                ", expected " + std::to_string(dim));
    index.emplace(r.speaker_id, 0);
  }
  int next = 0;
  for (auto& [name, id] : index) {
    id = next++;
    classes_.push_back(name);
  }
  labels_.reserve(rows_.size());
  for (const auto& r : rows_) labels_.push_back(index.at(r.speaker_id));
}

Matrix ProbeDataset::features(std::span<const std::size_t> idx) const {
  Matrix x(static_cast<Eigen::Index>(idx.size()), static_cast<Eigen::Index>(dim()));
  for (std::size_t i = 0; i < idx.size(); ++i) {
    x.row(static_cast<Eigen::Index>(i)) = rows_.at(idx[i]).vector.transpose();
  }
  return x;
}

std::vector<int> ProbeDataset::labels_of(std::span<const std::size_t> idx) const {
  std::vector<int> out;
  out.reserve(idx.size());
  for (auto i : idx) out.push_back(labels_.at(i));
  return out;
}

Folds stratified_folds(const ProbeDataset& dataset, std::size_t k, std::uint64_t seed) {
  require(k >= 2, Errc::kInvalidArgument, "k-fold needs k >= 2");
  std::vector<std::vector<std::size_t>> by_class(dataset.class_count());
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    by_class[static_cast<std::size_t>(dataset.labels()[i])].push_back(i);
  }
  for (std::size_t c = 0; c < by_class.size(); ++c) {
    require(by_class[c].size() >= k, Errc::kClassTooSmall,
            "class '" + dataset.classes()[c] + "' has " + std::to_string(by_class[c].size()) +
                " rows, fewer than k = " + std::to_string(k));
  }
  Rng rng(mix_seed(seed, 0x666f6c6473ULL));
  Folds folds(k);
  std::size_t cursor = 0;
  for (auto& members : by_class) {
    for (std::size_t i = members.size(); i > 1; --i) {
      std::swap(members[i - 1], members[static_cast<std::size_t>(rng.uniform_index(i))]);
    }
    for (auto idx : members) folds[cursor++ % k].push_back(idx);
  }
  for (auto& f : folds) std::sort(f.begin(), f.end());
  return folds;
}

Vector LinearProbe::scores(const Eigen::Ref<const Vector>& x) const {
  require(x.size() == mean_.size(), Errc::kDimensionMismatch,
          "probe input has length " + std::to_string(x.size()) + ", expected " +
              std::to_string(mean_.size()));
  Vector z(x.size() + 1);
  z.head(x.size()) = (x - mean_).cwiseQuotient(scale_);
  z[x.size()] = 1.0;
  return weights_.transpose() * z;
}

int LinearProbe::predict(const Eigen::Ref<const Vector>& x) const {
  const Vector s = scores(x);
  int best = 0;
  for (Eigen::Index c = 1; c < s.size(); ++c) {
    if (s[c] > s[best]) best = static_cast<int>(c);
  }
  return best;
}

LinearProbe train_linear_probe(const Matrix& x, std::span<const int> labels,
                               std::size_t class_count, const ProbeTrainingOptions& opt) {
  require(static_cast<std::size_t>(x.rows()) == labels.size(), Errc::kDimensionMismatch,
          "probe training rows and labels differ in count");
  require(opt.lambda > 0 && opt.epochs >= 1, Errc::kInvalidArgument,
          "probe needs lambda > 0 and at least one epoch");
  std::vector<int> present(labels.begin(), labels.end());
  std::sort(present.begin(), present.end());
  present.erase(std::unique(present.begin(), present.end()), present.end());
  require(present.size() >= 2, Errc::kSingleClass, "probe training data has a single class");
  require(present.back() < static_cast<int>(class_count) && present.front() >= 0,
          Errc::kInvalidArgument, "label outside [0, class_count)");

  const Eigen::Index n = x.rows();
  const Eigen::Index q = x.cols();
  const auto c = static_cast<Eigen::Index>(class_count);
  const Vector mean = x.colwise().mean().transpose();
  Vector scale = ((x.rowwise() - mean.transpose()).array().square().colwise().mean())
                     .sqrt().matrix().transpose();
  for (Eigen::Index j = 0; j < q; ++j) {
    if (!(scale[j] > 0)) scale[j] = 1.0;
  }

  Eigen::MatrixXd z(n, q + 1);
  z.leftCols(q) = ((x.rowwise() - mean.transpose()).array().rowwise() /
                   scale.transpose().array()).matrix();
  z.col(q).setOnes();
  Eigen::MatrixXd y = Eigen::MatrixXd::Constant(n, c, -1.0);
  for (Eigen::Index i = 0; i < n; ++i) y(i, labels[static_cast<std::size_t>(i)]) = 1.0;

  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(q + 1, c);
  const double inv_n = 1.0 / static_cast<double>(n);
  for (std::size_t t = 1; t <= opt.epochs; ++t) {
    const double step = 1.0 / (opt.lambda * static_cast<double>(t));
    const Eigen::ArrayXXd margin = y.array() * (z * w).array();
    const Eigen::MatrixXd active = (y.array() * (margin < 1.0).cast<double>()).matrix();
    const Eigen::MatrixXd grad = opt.lambda * w - inv_n * (z.transpose() * active);
    w -= step * grad;
  }
  return LinearProbe(mean, scale, Matrix(w));
}

ProbeReport aggregate_folds(std::span<const double> acc, std::uint64_t seed) {
  require(!acc.empty(), Errc::kInvalidArgument, "no fold accuracies");
  ProbeReport r;
  r.fold_accuracies.assign(acc.begin(), acc.end());
  r.k = acc.size();
  r.seed = seed;
  const double k = static_cast<double>(acc.size());
  r.mean = std::accumulate(acc.begin(), acc.end(), 0.0) / k;
  if (acc.size() >= 2) {
    double ss = 0.0;
    for (double a : acc) ss += (a - r.mean) * (a - r.mean);
    r.std = std::sqrt(ss / (k - 1.0));
  }
  return r;
}

ProbeReport run_probe(const ProbeDataset& dataset, const Folds& folds, std::uint64_t seed,
                      const ProbeTrainingOptions& opt) {
  require(folds.size() >= 2, Errc::kInvalidArgument, "need at least two folds");
  std::vector<double> acc;
  acc.reserve(folds.size());
  for (std::size_t f = 0; f < folds.size(); ++f) {
    std::vector<std::size_t> train;
    for (std::size_t g = 0; g < folds.size(); ++g) {
      if (g != f) train.insert(train.end(), folds[g].begin(), folds[g].end());
    }
    std::sort(train.begin(), train.end());
    const auto labels = dataset.labels_of(train);
    const LinearProbe probe =
        train_linear_probe(dataset.features(train), labels, dataset.class_count(), opt);
    std::size_t hits = 0;
    for (auto i : folds[f]) {
      if (probe.predict(dataset.rows()[i].vector) == dataset.labels()[i]) ++hits;
    }
    require(!folds[f].empty(), Errc::kInvalidArgument, "empty fold");
    acc.push_back(static_cast<double>(hits) / static_cast<double>(folds[f].size()));
  }
  return aggregate_folds(acc, seed);
}

ProbeReport run_probe(const ProbeDataset& dataset, std::size_t k, std::uint64_t seed,
                      const ProbeTrainingOptions& opt) {
  return run_probe(dataset, stratified_folds(dataset, k, seed), seed, opt);
}

PairedTestResult paired_t_test(std::span<const double> a, std::span<const double> b) {
  require(a.size() == b.size(), Errc::kInvalidArgument,
          "paired t-test needs equal-length samples");
  require(a.size() >= 2, Errc::kInvalidArgument, "paired t-test needs at least two pairs");
  const std::size_t k = a.size();
  std::vector<double> diff(k);
  for (std::size_t i = 0; i < k; ++i) diff[i] = a[i] - b[i];
  const double mean = std::accumulate(diff.begin(), diff.end(), 0.0) / static_cast<double>(k);
  double ss = 0.0;
  for (double d : diff) ss += (d - mean) * (d - mean);
  const double sd = std::sqrt(ss / static_cast<double>(k - 1));
  // Differences that agree to rounding error count as constant.
  const double scale = std::max(std::abs(mean), 1.0);
  if (!(sd > 1e-12 * scale)) {
    fail(Errc::kZeroVariance, "all paired differences are equal; t statistic is undefined");
  }
  PairedTestResult r;
  r.dof = k - 1;
  r.t_statistic = mean / (sd / std::sqrt(static_cast<double>(k)));
  r.p_value = student_t_two_tailed(r.t_statistic, static_cast<double>(r.dof));
  return r;
}

ProjectionMethod parse_projection(const std::string& name) {
  if (name == "pca2d") return ProjectionMethod::kPca2d;
  if (name == "raw-dump" || name == "raw_dump") return ProjectionMethod::kRawDump;
  fail(Errc::kInvalidArgument, "unknown projection method '" + name + "'");
}

namespace {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + "\"";
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (quoted) {
      if (ch == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (ch == '"') {
        quoted = false;
      } else {
        cur += ch;
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += ch;
    }
  }
  out.push_back(std::move(cur));
  return out;
}

std::string shortest(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

}  // namespace

void export_projection(const ProbeDataset& dataset, ProjectionMethod method,
                       const std::filesystem::path& path) {
  require(dataset.size() >= 1, Errc::kInvalidArgument, "nothing to export");
  if (method == ProjectionMethod::kRawDump) {
    std::error_code ec;
    std::filesystem::create_directories(path, ec);
    if (ec) fail(Errc::kIoError, path.string() + ": " + ec.message());
    std::vector<std::size_t> all(dataset.size());
    std::iota(all.begin(), all.end(), std::size_t{0});
    write_matrix(path / "vectors.npy", dataset.features(all), Precision::kF64);
    std::string labels = "utt_id,speaker_id\n";
    for (const auto& r : dataset.rows()) {
      labels += csv_field(r.utt_id) + "," + csv_field(r.speaker_id) + "\n";
    }
    write_text_file(path / "labels.csv", labels);
    return;
  }

  const std::size_t dim = dataset.dim();
  const std::size_t axes = std::min<std::size_t>({2, dim, dataset.size() - 1});
  PcaModel pca;
  if (axes >= 1) {
    CovarianceAccumulator acc(dim);
    for (const auto& r : dataset.rows()) acc.add(r.vector);
    if (acc.has_distinct_samples()) pca = fit_pca(acc, axes);
  }
  std::string csv = "utt_id,speaker_id,x,y\n";
  for (const auto& r : dataset.rows()) {
    double xy[2] = {0.0, 0.0};
    if (pca.p_dim() > 0) {
      const Vector d = project(pca, r.vector).d;
      for (Eigen::Index i = 0; i < d.size(); ++i) xy[i] = d[i];
    }
    csv += csv_field(r.utt_id) + "," + csv_field(r.speaker_id) + "," + shortest(xy[0]) + "," +
           shortest(xy[1]) + "\n";
  }
  write_text_file(path, csv);
}

ProbeDataset load_raw_dump(const std::filesystem::path& dir) {
  const Matrix v = read_matrix(dir / "vectors.npy");
  std::istringstream in(read_text_file(dir / "labels.csv"));
  std::string line;
  std::getline(in, line);
  require(line == "utt_id,speaker_id", Errc::kValidationError,
          (dir / "labels.csv").string() + ": unexpected header");
  std::vector<ProbeRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    require(f.size() == 2, Errc::kValidationError,
            (dir / "labels.csv").string() + ": expected two fields per row");
    const auto r = static_cast<Eigen::Index>(rows.size());
    require(r < v.rows(), Errc::kShapeMismatch, "more labels than vectors");
    rows.push_back(ProbeRow{f[0], f[1], v.row(r).transpose()});
  }
  require(static_cast<Eigen::Index>(rows.size()) == v.rows(), Errc::kShapeMismatch,
          "label count does not match vector count");
  return ProbeDataset(std::move(rows));
}

}  // namespace eta
