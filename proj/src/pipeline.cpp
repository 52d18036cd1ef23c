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

#include "eta/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

#include "eta/baselines.hpp"
#include "eta/error.hpp"
#include "eta/log.hpp"
#include "eta/parallel.hpp"

namespace eta {

using nlohmann::ordered_json;

namespace {

std::vector<std::size_t> utt_id_order(const UtteranceSource& src) {
  std::vector<std::size_t> order(src.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return src.info(a).utt_id < src.info(b).utt_id; });
  return order;
}

struct ResidualStats {
  double sum_sq = 0.0;
  double max_abs_frame = 0.0;
  Vector d_aug;
  Vector eta_sum;
};

}  // namespace

FitResult fit_corpus(const UtteranceSource& src, const FitConfig& cfg) {
  require(src.size() >= 2, Errc::kTooFewSamples,
          "fitting needs at least 2 utterances, got " + std::to_string(src.size()));
  require(cfg.l_subsample >= 1, Errc::kInvalidArgument, "subsample size must be >= 1");
  const std::size_t workers = resolve_workers(cfg.workers);
  const auto order = utt_id_order(src);
  const std::size_t q = src.q_dim();
  const std::size_t p = cfg.p_dim;

  log::info("fit: " + std::to_string(src.size()) + " utterances, P=" + std::to_string(p) +
            " L=" + std::to_string(cfg.l_subsample) + " workers=" + std::to_string(workers));

  CovarianceAccumulator cov(src.v_dim());
  ordered_map_fold<Vector>(
      order, workers, [&](std::size_t i) { return src.embedding(i).raw; },
      [&](Vector&& e) { cov.add(e); });
  const PcaModel pca = fit_pca(cov, p);
  log::debug("fit: PCA done");

  auto stats_of = [&](std::size_t i) {
    const ReducedEmbedding d = project(pca, src.embedding(i));
    const FrameMatrix f = subsample_frames(src.frames(i), cfg.l_subsample, cfg.seed);
    return utterance_stats(d, f);
  };

  GramAccumulator gram(p, q);
  if (cfg.deterministic) {
    ordered_map_fold<UtteranceStats>(order, workers, stats_of,
                                     [&](UtteranceStats&& s) { gram.add(s); });
  } else {
    gram = parallel_reduce<GramAccumulator>(
        src.size(), workers, [&] { return GramAccumulator(p, q); },
        [&](GramAccumulator& acc, std::size_t i) { acc.add(stats_of(i)); },
        [](GramAccumulator& a, const GramAccumulator& b) { a.merge(b); });
  }

  SolveDiagnostics diag;
  LatentModel latent = solve(gram, cfg.solver, &diag);
  latent.fit_meta.l_subsample = cfg.l_subsample;
  latent.fit_meta.rng_seed = cfg.seed;
  latent.fit_meta.dataset_fingerprint = src.fingerprint();
  log::debug("fit: solve done, cond=" + std::to_string(diag.condition_number));

  // Second pass over the same subsampled frames: residual norm and the
  // normal-equation residual D~ eta.
  Matrix stationarity = Matrix::Zero(static_cast<Eigen::Index>(p + 1), static_cast<Eigen::Index>(q));
  double sum_sq = 0.0;
  double max_abs = 0.0;
  ordered_map_fold<ResidualStats>(
      order, workers,
      [&](std::size_t i) {
        const ReducedEmbedding d = project(pca, src.embedding(i));
        const FrameMatrix f = subsample_frames(src.frames(i), cfg.l_subsample, cfg.seed);
        const FrameMatrix eta = eta_transform(latent, d, f);
        ResidualStats r;
        r.sum_sq = eta.data.squaredNorm();
        r.max_abs_frame = f.data.cwiseAbs().maxCoeff();
        UtteranceStats st = utterance_stats(d, eta);
        r.d_aug = std::move(st.d_aug);
        r.eta_sum = std::move(st.frame_sum);
        return r;
      },
      [&](ResidualStats&& r) {
        sum_sq += r.sum_sq;
        max_abs = std::max(max_abs, r.max_abs_frame);
        stationarity.noalias() += r.d_aug * r.eta_sum.transpose();
      });

  FitResult out;
  out.bundle.pca = pca;
  out.bundle.latent = std::move(latent);
  out.bundle.created_at = bundle_timestamp(cfg.deterministic);
  auto& s = out.summary;
  s.n_utts = src.size();
  s.n_frames_used = gram.n_frames();
  s.residual_frobenius = std::sqrt(sum_sq);
  s.max_abs_frame = max_abs;
  s.stationarity_max_abs = stationarity.cwiseAbs().maxCoeff();
  s.gram_condition_number = diag.condition_number;
  s.gram_rank = diag.rank;
  s.dataset_fingerprint = out.bundle.latent.fit_meta.dataset_fingerprint;
  return out;
}

ordered_json to_json(const FitSummary& s) {
  ordered_json j;
  j["n_utts"] = s.n_utts;
  j["n_frames_used"] = s.n_frames_used;
  j["residual_frobenius"] = s.residual_frobenius;
  j["max_abs_frame"] = s.max_abs_frame;
  j["stationarity_max_abs"] = s.stationarity_max_abs;
  if (std::isfinite(s.gram_condition_number)) {
    j["gram_condition_number"] = s.gram_condition_number;
  } else {
    j["gram_condition_number"] = nullptr;
  }
  j["gram_rank"] = s.gram_rank;
  j["dataset_fingerprint"] = s.dataset_fingerprint;
  return j;
}

// ---------------------------------------------------------------------------
// Transform

namespace {

std::string file_stem_for(std::size_t index, const std::string& utt_id) {
  std::string safe;
  for (char c : utt_id) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
                    c == '-' || c == '_' || c == '.';
    safe += ok ? c : '_';
  }
  char buf[16];
  std::snprintf(buf, sizeof buf, "%06zu_", index);
  return buf + safe;
}

fs::path normalized(const fs::path& p) {
  fs::path n = fs::absolute(p).lexically_normal();
  if (n.filename().empty()) n = n.parent_path();
  return n;
}

}  // namespace

TransformSummary transform_corpus(const ModelBundle& bundle, const ManifestSource& src,
                                  const fs::path& out_dir_in, std::size_t workers) {
  require(bundle.pca.v_dim() == src.v_dim(), Errc::kDimensionMismatch,
          "bundle expects V=" + std::to_string(bundle.pca.v_dim()) + " but the corpus has V=" +
              std::to_string(src.v_dim()));
  require(bundle.latent.q_dim() == src.q_dim(), Errc::kDimensionMismatch,
          "bundle expects Q=" + std::to_string(bundle.latent.q_dim()) +
              " but the corpus has Q=" + std::to_string(src.q_dim()));

  const fs::path out_dir = normalized(out_dir_in);
  const fs::path staging = out_dir.parent_path() / (out_dir.filename().string() + ".partial");
  std::error_code ec;
  if (fs::exists(out_dir, ec) && !fs::is_empty(out_dir, ec) &&
      !fs::exists(out_dir / "manifest.jsonl", ec)) {
    fail(Errc::kIoError, out_dir.string() + " exists and is not an eta corpus; refusing to replace it");
  }
  fs::remove_all(staging, ec);
  fs::create_directories(staging / "frames", ec);
  if (!ec) fs::create_directories(staging / "embeddings", ec);
  if (ec) fail(Errc::kIoError, staging.string() + ": " + ec.message());

  const auto& manifest = src.manifest();
  std::vector<ManifestEntry> out_entries = manifest.entries;
  std::size_t total_frames = 0;
  try {
    total_frames = parallel_reduce<std::size_t>(
        src.size(), resolve_workers(workers), [] { return std::size_t{0}; },
        [&](std::size_t& frames_done, std::size_t i) {
          const auto& in = manifest.entries[i];
          auto& out = out_entries[i];
          const std::string stem = file_stem_for(i, in.utt_id);
          out.feature_path = "frames/" + stem + ".npy";
          out.embedding_path = "embeddings/" + stem + ".npy";
          try {
            const ReducedEmbedding d = project(bundle.pca, src.embedding(i));
            Precision stored = Precision::kF32;
            const FrameMatrix frames = src.frames(i, &stored);
            const FrameMatrix eta = eta_transform(bundle.latent, d, frames);
            write_matrix(staging / out.feature_path, eta.data, stored);
            fs::copy_file(manifest.embedding_file(in), staging / out.embedding_path,
                          fs::copy_options::overwrite_existing);
            frames_done += eta.frames();
          } catch (const Error& e) {
            fail(e.code(), "utterance '" + in.utt_id + "': " + e.what());
          } catch (const fs::filesystem_error& e) {
            fail(Errc::kIoError, "utterance '" + in.utt_id + "': " + e.what());
          }
        },
        [](std::size_t& a, const std::size_t& b) { a += b; });
    write_manifest(staging / "manifest.jsonl", out_entries);
  } catch (...) {
    fs::remove_all(staging, ec);
    throw;
  }

  fs::remove_all(out_dir, ec);
  fs::rename(staging, out_dir, ec);
  if (ec) {
    fs::remove_all(staging);
    fail(Errc::kIoError, "cannot move " + staging.string() + " to " + out_dir.string() + ": " +
                             ec.message());
  }
  TransformSummary s;
  s.n_utts = src.size();
  s.n_frames = total_frames;
  s.manifest_path = out_dir / "manifest.jsonl";
  return s;
}

// ---------------------------------------------------------------------------
// Probe

ProbeDataset pooled_dataset(const UtteranceSource& src) {
  std::vector<ProbeRow> rows;
  rows.reserve(src.size());
  for (std::size_t i = 0; i < src.size(); ++i) {
    const auto& inf = src.info(i);
    rows.push_back(ProbeRow{inf.utt_id, inf.speaker_id, pool_utterance(src.frames(i))});
  }
  return ProbeDataset(std::move(rows));
}

ordered_json to_json(const ProbeReport& r) {
  ordered_json j;
  j["units"] = "proportion";
  j["k"] = r.k;
  j["seed"] = r.seed;
  j["fold_accuracies"] = r.fold_accuracies;
  j["mean"] = r.mean;
  j["std"] = r.std;
  j["mean_percent"] = 100.0 * r.mean;
  j["std_percent"] = 100.0 * r.std;
  return j;
}

ordered_json to_json(const PairedTestResult& r) {
  ordered_json j;
  j["status"] = "ok";
  j["t_statistic"] = r.t_statistic;
  j["p_value"] = r.p_value;
  j["dof"] = r.dof;
  j["significant"] = r.p_value < 0.05;
  return j;
}

namespace {

ProbeDataset aligned_to(const ProbeDataset& reference, const ProbeDataset& other) {
  std::map<std::string, std::size_t> pos;
  for (std::size_t i = 0; i < other.size(); ++i) pos.emplace(other.rows()[i].utt_id, i);
  require(other.size() == reference.size(), Errc::kValidationError,
          "paired corpora have different utterance counts (" + std::to_string(reference.size()) +
              " vs " + std::to_string(other.size()) + ")");
  std::vector<ProbeRow> rows;
  rows.reserve(reference.size());
  for (const auto& r : reference.rows()) {
    const auto it = pos.find(r.utt_id);
    require(it != pos.end(), Errc::kValidationError,
            "utterance '" + r.utt_id + "' is missing from the second corpus");
    const auto& o = other.rows()[it->second];
    require(o.speaker_id == r.speaker_id, Errc::kValidationError,
            "utterance '" + r.utt_id + "' has different speakers in the two corpora");
    rows.push_back(o);
  }
  return ProbeDataset(std::move(rows));
}

std::vector<double> percent_to_proportion(const std::vector<double>& v) {
  std::vector<double> out;
  out.reserve(v.size());
  for (double x : v) {
    require(x >= 0 && x <= 100, Errc::kInvalidArgument,
            "fold accuracy override " + std::to_string(x) + " is outside [0, 100] percent");
    out.push_back(x / 100.0);
  }
  return out;
}

void export_both(const ProbeRequest& req, const ProbeDataset* a, const ProbeDataset* b) {
  if (!req.projection) return;
  require(req.projection_dir.has_value(), Errc::kInvalidArgument,
          "a projection export needs an output directory");
  std::error_code ec;
  fs::create_directories(*req.projection_dir, ec);
  if (ec) fail(Errc::kIoError, req.projection_dir->string() + ": " + ec.message());
  const bool csv = *req.projection == ProjectionMethod::kPca2d;
  auto target = [&](const char* tag) {
    return *req.projection_dir / (csv ? std::string("projection_") + tag + ".csv"
                                      : std::string("raw_") + tag);
  };
  if (a) export_projection(*a, *req.projection, target("a"));
  if (b) export_projection(*b, *req.projection, target("b"));
}

}  // namespace

ordered_json run_probe_request(const ProbeRequest& req) {
  std::optional<ProbeDataset> ds_a, ds_b;
  std::optional<ProbeReport> rep_a, rep_b;
  std::optional<Folds> folds;

  if (req.manifest_a) {
    ds_a = pooled_dataset(ManifestSource::open(*req.manifest_a));
    folds = stratified_folds(*ds_a, req.k, req.seed);
  }
  if (req.manifest_b) {
    ProbeDataset b = pooled_dataset(ManifestSource::open(*req.manifest_b));
    ds_b = ds_a ? aligned_to(*ds_a, b) : std::move(b);
    if (!folds) folds = stratified_folds(*ds_b, req.k, req.seed);
  }

  if (!req.override_a.empty()) {
    rep_a = aggregate_folds(percent_to_proportion(req.override_a), req.seed);
  } else if (ds_a) {
    rep_a = run_probe(*ds_a, *folds, req.seed);
  }
  if (!req.override_b.empty()) {
    rep_b = aggregate_folds(percent_to_proportion(req.override_b), req.seed);
  } else if (ds_b) {
    rep_b = run_probe(*ds_b, *folds, req.seed);
  }
  require(rep_a || rep_b, Errc::kInvalidArgument,
          "probe needs a manifest or fold accuracy overrides");

  ordered_json out;
  if (rep_a) out["a"] = to_json(*rep_a);
  if (rep_b) out["b"] = to_json(*rep_b);
  if (rep_a && rep_b) {
    require(rep_a->k == rep_b->k, Errc::kInvalidArgument,
            "paired comparison needs the same number of folds on both sides");
    out["accuracy_drop_points"] = 100.0 * (rep_a->mean - rep_b->mean);
    try {
      out["paired_t_test"] = to_json(paired_t_test(rep_a->fold_accuracies, rep_b->fold_accuracies));
    } catch (const Error& e) {
      if (e.code() != Errc::kZeroVariance) throw;
      ordered_json t;
      t["status"] = "degenerate";
      t["reason"] = errc_name(e.code());
      t["message"] = e.what();
      t["dof"] = rep_a->k - 1;
      t["significant"] = false;
      out["paired_t_test"] = t;
    }
  }
  export_both(req, ds_a ? &*ds_a : nullptr, ds_b ? &*ds_b : nullptr);
  return out;
}

// ---------------------------------------------------------------------------
// Inspect

namespace {

std::string describe_manifest(const fs::path& path) {
  const ManifestSource src = ManifestSource::open(path, /*strict=*/true);
  std::set<std::string> speakers;
  std::size_t total = 0, min_frames = SIZE_MAX, max_frames = 0;
  for (std::size_t i = 0; i < src.size(); ++i) {
    const auto& inf = src.info(i);
    speakers.insert(inf.speaker_id);
    total += inf.n_frames;
    min_frames = std::min(min_frames, inf.n_frames);
    max_frames = std::max(max_frames, inf.n_frames);
  }
  const auto& first = src.manifest().entries.front();
  const auto fh = read_array_header(src.manifest().feature_file(first));
  const auto eh = read_array_header(src.manifest().embedding_file(first));
  std::ostringstream os;
  os << "manifest: " << path.string() << "\n"
     << "  validation: ok (strict)\n"
     << "  utterances: " << src.size() << "\n"
     << "  speakers: " << speakers.size() << "\n"
     << "  frames: total " << total << ", min " << min_frames << ", max " << max_frames << "\n"
     << "  Q: " << src.q_dim() << "\n"
     << "  V: " << src.v_dim() << "\n"
     << "  frame dtype: " << precision_name(fh.precision) << "\n"
     << "  embedding dtype: " << precision_name(eh.precision) << "\n"
     << "  fingerprint: " << src.fingerprint() << "\n";
  return os.str();
}

std::string describe_npy(const fs::path& path) {
  const NpyArray a = read_array(path);
  std::ostringstream os;
  os << "npy: " << path.string() << "\n  dtype: " << (a.precision == Precision::kF32 ? "<f4" : "<f8")
     << "\n  shape: (";
  for (std::size_t i = 0; i < a.shape.size(); ++i) os << (i ? ", " : "") << a.shape[i];
  os << (a.shape.size() == 1 ? ",)" : ")") << "\n";
  if (!a.data.empty()) {
    const auto [mn, mx] = std::minmax_element(a.data.begin(), a.data.end());
    const double mean = std::accumulate(a.data.begin(), a.data.end(), 0.0) / static_cast<double>(a.data.size());
    os << "  min: " << *mn << "\n  max: " << *mx << "\n  mean: " << mean << "\n";
  }
  return os.str();
}

std::string describe_bundle(const fs::path& dir) {
  const nlohmann::json meta = [&] {
    try {
      return nlohmann::json::parse(read_text_file(dir / "meta.json"));
    } catch (const nlohmann::json::parse_error& e) {
      fail(Errc::kBadJson, (dir / "meta.json").string() + ": " + e.what());
    }
  }();
  std::ostringstream os;
  const std::string kind = meta.value("kind", std::string("eta_model"));
  if (kind == "kmeans") {
    const KMeansModel m = load_kmeans(dir);
    os << "kmeans bundle: " << dir.string() << "\n  centroids: " << m.c_count() << "\n  Q: "
       << m.centroids.cols() << "\n  inertia: " << m.inertia << "\n  seed: " << m.rng_seed << "\n";
    return os.str();
  }
  if (kind == "synthetic_ground_truth") {
    os << "synthetic ground truth: " << dir.string() << "\n" << meta.dump(2) << "\n";
    return os.str();
  }
  const ModelBundle b = load_bundle(dir);
  const auto& fm = b.latent.fit_meta;
  os << "model bundle: " << dir.string() << "\n"
     << "  P: " << b.pca.p_dim() << "\n"
     << "  Q: " << b.latent.q_dim() << "\n"
     << "  V: " << b.pca.v_dim() << "\n"
     << "  L: " << fm.l_subsample << "\n"
     << "  seed: " << fm.rng_seed << "\n"
     << "  solver: " << solver_name(fm.solver) << "\n"
     << "  n_frames_used: " << fm.n_frames_used << "\n"
     << "  dataset_fingerprint: " << fm.dataset_fingerprint << "\n"
     << "  created_at: " << b.created_at << "\n"
     << "  explained_variance_total: " << b.pca.explained_variance.sum() << "\n";
  return os.str();
}

bool has_npy_magic(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  char buf[6] = {};
  in.read(buf, 6);
  return in.gcount() == 6 && std::string(buf, 6) == std::string("\x93NUMPY", 6);
}

}  // namespace

std::string inspect_path(const fs::path& path) {
  std::error_code ec;
  if (fs::is_directory(path, ec)) {
    if (fs::exists(path / "meta.json", ec)) return describe_bundle(path);
    if (fs::exists(path / "manifest.jsonl", ec)) return describe_manifest(path / "manifest.jsonl");
    fail(Errc::kIoError, path.string() + ": no meta.json or manifest.jsonl to inspect");
  }
  if (!fs::is_regular_file(path, ec)) fail(Errc::kIoError, path.string() + ": no such file");
  if (path.extension() == ".npy" || has_npy_magic(path)) return describe_npy(path);
  return describe_manifest(path);
}

}  // namespace eta
