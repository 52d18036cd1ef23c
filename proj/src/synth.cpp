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

#include "eta/synth.hpp"

#include <cmath>
#include <cstdio>

#include <Eigen/LU>
#include <Eigen/QR>
#include <json.hpp>

#include "eta/datastore.hpp"
#include "eta/error.hpp"
#include "eta/rng.hpp"

namespace eta {

void SynthSpec::validate() const {
  require(n_speakers >= 1 && utts_per_speaker >= 1 && frames_per_utt >= 1 && q_dim >= 1 &&
              v_dim >= 1 && p_true >= 1,
          Errc::kInvalidArgument, "synthetic corpus counts must all be >= 1");
  require(p_true <= v_dim, Errc::kInvalidArgument, "p_true must not exceed v_dim");
  require(noise_sigma >= 0 && content_sigma >= 0 && jitter_sigma >= 0 && nonlinear_leakage >= 0,
          Errc::kInvalidArgument, "synthetic noise scales must be non-negative");
}

namespace {

Matrix gaussian(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  Matrix m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = rng.normal();
  }
  return m;
}

std::string padded(std::size_t v, int width) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%0*zu", width, v);
  return buf;
}

}  // namespace

SynthCorpus::SynthCorpus(SynthSpec spec) : spec_(std::move(spec)) {
  spec_.validate();
  const auto v = static_cast<Eigen::Index>(spec_.v_dim);
  const auto q = static_cast<Eigen::Index>(spec_.q_dim);
  const auto p = static_cast<Eigen::Index>(spec_.p_true);

  Rng world(mix_seed(spec_.world_seed, 0x776f726c64ULL));
  const Eigen::MatrixXd g = gaussian(v, p, world);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  truth_.mixing = (qr.householderQ() * Eigen::MatrixXd::Identity(v, p));
  truth_.basis = gaussian(p, q, world);
  truth_.bias = gaussian(q, 1, world).col(0);
  truth_.leakage_basis = gaussian(p, q, world);

  Rng speakers(mix_seed(spec_.seed, 0x7370656172ULL));
  truth_.speaker_latents = gaussian(static_cast<Eigen::Index>(spec_.n_speakers), p, speakers);
  const std::string tag = "s" + std::to_string(spec_.seed) + "_spk";
  for (std::size_t s = 0; s < spec_.n_speakers; ++s) {
    truth_.speaker_ids.push_back(tag + padded(s, 4));
  }
  infos_.reserve(spec_.n_speakers * spec_.utts_per_speaker);
  for (std::size_t s = 0; s < spec_.n_speakers; ++s) {
    for (std::size_t u = 0; u < spec_.utts_per_speaker; ++u) {
      infos_.push_back(UtteranceInfo{truth_.speaker_ids[s] + "_utt" + padded(u, 4),
                                     truth_.speaker_ids[s], spec_.frames_per_utt});
    }
  }
}

SpeakerEmbedding SynthCorpus::embedding(std::size_t i) const {
  const auto& inf = infos_.at(i);
  const Vector z = truth_.speaker_latents.row(static_cast<Eigen::Index>(speaker_of(i))).transpose();
  SpeakerEmbedding e{inf.utt_id, truth_.mixing * z};
  if (spec_.jitter_sigma > 0) {
    Rng rng(keyed_seed(spec_.seed, inf.utt_id + "/embedding"));
    for (Eigen::Index j = 0; j < e.raw.size(); ++j) e.raw[j] += spec_.jitter_sigma * rng.normal();
  }
  return e;
}

FrameMatrix SynthCorpus::frames(std::size_t i, Precision* stored) const {
  if (stored) *stored = Precision::kF64;
  const auto& inf = infos_.at(i);
  const auto si = static_cast<Eigen::Index>(speaker_of(i));
  const RowVector z = truth_.speaker_latents.row(si);
  RowVector mean = z * truth_.basis + truth_.bias.transpose();
  if (spec_.nonlinear_leakage > 0) {
    mean += spec_.nonlinear_leakage * (z.array().tanh().matrix() * truth_.leakage_basis);
  }
  const auto k = static_cast<Eigen::Index>(spec_.frames_per_utt);
  FrameMatrix out{inf.utt_id, mean.replicate(k, 1)};
  if (spec_.content_sigma > 0 || spec_.noise_sigma > 0) {
    Rng rng(keyed_seed(spec_.seed, inf.utt_id + "/frames"));
    for (Eigen::Index r = 0; r < out.data.rows(); ++r) {
      for (Eigen::Index c = 0; c < out.data.cols(); ++c) {
        if (spec_.content_sigma > 0) out.data(r, c) += spec_.content_sigma * rng.normal();
        if (spec_.noise_sigma > 0) out.data(r, c) += spec_.noise_sigma * rng.normal();
      }
    }
  }
  return out;
}

SynthOutput generate(const SynthSpec& spec, const std::filesystem::path& out_dir) {
  SynthCorpus corpus(spec);
  std::error_code ec;
  std::filesystem::create_directories(out_dir / "frames", ec);
  if (!ec) std::filesystem::create_directories(out_dir / "embeddings", ec);
  if (ec) fail(Errc::kIoError, out_dir.string() + ": " + ec.message());

  std::vector<ManifestEntry> entries;
  entries.reserve(corpus.size());
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    const auto& inf = corpus.info(i);
    ManifestEntry e;
    e.utt_id = inf.utt_id;
    e.speaker_id = inf.speaker_id;
    e.feature_path = "frames/" + inf.utt_id + ".npy";
    e.embedding_path = "embeddings/" + inf.utt_id + ".npy";
    e.n_frames = inf.n_frames;
    e.q_dim = spec.q_dim;
    e.v_dim = spec.v_dim;
    write_matrix(out_dir / e.feature_path, corpus.frames(i).data, spec.precision);
    write_vector(out_dir / e.embedding_path, corpus.embedding(i).raw, spec.precision);
    entries.push_back(std::move(e));
  }
  SynthOutput out;
  out.manifest_path = out_dir / "manifest.jsonl";
  write_manifest(out.manifest_path, entries);
  save_ground_truth(corpus.truth(), spec, out_dir / "ground_truth");
  out.truth = corpus.truth();
  return out;
}

void save_ground_truth(const GroundTruth& truth, const SynthSpec& spec,
                       const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) fail(Errc::kIoError, dir.string() + ": " + ec.message());
  nlohmann::ordered_json meta;
  meta["schema_version"] = kBundleSchemaVersion;
  meta["kind"] = "synthetic_ground_truth";
  meta["n_speakers"] = spec.n_speakers;
  meta["utts_per_speaker"] = spec.utts_per_speaker;
  meta["frames_per_utt"] = spec.frames_per_utt;
  meta["Q"] = spec.q_dim;
  meta["V"] = spec.v_dim;
  meta["p_true"] = spec.p_true;
  meta["noise_sigma"] = spec.noise_sigma;
  meta["content_sigma"] = spec.content_sigma;
  meta["jitter_sigma"] = spec.jitter_sigma;
  meta["nonlinear_leakage"] = spec.nonlinear_leakage;
  meta["seed"] = spec.seed;
  meta["world_seed"] = spec.world_seed;
  meta["precision"] = precision_name(spec.precision);
  meta["speaker_ids"] = truth.speaker_ids;
  write_matrix(dir / "basis.npy", truth.basis, Precision::kF64);
  write_vector(dir / "bias.npy", truth.bias, Precision::kF64);
  write_matrix(dir / "mixing.npy", truth.mixing, Precision::kF64);
  write_matrix(dir / "leakage_basis.npy", truth.leakage_basis, Precision::kF64);
  write_matrix(dir / "speaker_latents.npy", truth.speaker_latents, Precision::kF64);
  write_text_file(dir / "meta.json", meta.dump(2) + "\n");
}

GroundTruth load_ground_truth(const std::filesystem::path& dir) {
  GroundTruth t;
  nlohmann::json meta;
  try {
    meta = nlohmann::json::parse(read_text_file(dir / "meta.json"));
    t.speaker_ids = meta.at("speaker_ids").get<std::vector<std::string>>();
  } catch (const nlohmann::json::exception& e) {
    fail(Errc::kBadJson, (dir / "meta.json").string() + ": " + e.what());
  }
  t.basis = read_matrix(dir / "basis.npy");
  t.bias = read_vector(dir / "bias.npy");
  t.mixing = read_matrix(dir / "mixing.npy");
  t.leakage_basis = read_matrix(dir / "leakage_basis.npy");
  t.speaker_latents = read_matrix(dir / "speaker_latents.npy");
  return t;
}

std::pair<Matrix, Vector> reduced_space_truth(const GroundTruth& truth, const PcaModel& pca) {
  require(pca.p_dim() == static_cast<std::size_t>(truth.mixing.cols()),
          Errc::kDimensionMismatch, "PCA must keep exactly p_true components");
  // d = C M z - C mu, so z = G^{-1} (d + C mu) with G = C M.
  const Eigen::MatrixXd g = pca.components * truth.mixing;
  const Eigen::FullPivLU<Eigen::MatrixXd> lu(g);
  require(lu.isInvertible(), Errc::kInvalidArgument,
          "PCA subspace does not span the mixing columns");
  const Eigen::MatrixXd basis_d = lu.transpose().solve(Eigen::MatrixXd(truth.basis));
  const Vector zc = lu.solve(Eigen::VectorXd(pca.components * pca.mean));
  const Vector bias_d = truth.bias + truth.basis.transpose() * zc;
  return {Matrix(basis_d), bias_d};
}

}  // namespace eta
