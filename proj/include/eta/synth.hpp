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

// Synthetic corpora with a known speaker-dependent structure.
//
// Shared across a "world" (world_seed): a mixing matrix M (V x p_true) with
// orthonormal columns, a true basis A (p_true x Q), a true bias b (Q) and an
// optional nonlinear leakage basis B (p_true x Q). Per speaker: a latent
// z ~ N(0, I). Per utterance: embedding e = M z + jitter. Per frame:
//
//     s = z^T A + b + leakage * tanh(z)^T B + c + n
//
// with content c ~ N(0, content_sigma^2 I) and noise n ~ N(0, noise_sigma^2 I).

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "eta/core.hpp"
#include "eta/source.hpp"

namespace eta {

struct SynthSpec {
  std::size_t n_speakers = 10;
  std::size_t utts_per_speaker = 20;
  std::size_t frames_per_utt = 100;
  std::size_t q_dim = 64;
  std::size_t v_dim = 32;
  std::size_t p_true = 8;
  double noise_sigma = 0.1;
  double content_sigma = 1.0;
  double jitter_sigma = 0.0;
  double nonlinear_leakage = 0.0;
  std::uint64_t seed = 0;        // speakers, utterances, frames
  std::uint64_t world_seed = 0;  // M, A, b, B
  Precision precision = Precision::kF32;

  // Throws InvalidArgument.
  void validate() const;
};

struct GroundTruth {
  Matrix basis;            // A, p_true x Q
  Vector bias;             // b, Q
  Matrix mixing;           // M, V x p_true
  Matrix leakage_basis;    // B, p_true x Q
  Matrix speaker_latents;  // n_speakers x p_true
  std::vector<std::string> speaker_ids;
};

// Generates utterances on demand, so arbitrarily long corpora cost no memory.
class SynthCorpus final : public UtteranceSource {
 public:
  explicit SynthCorpus(SynthSpec spec);

  std::size_t size() const override { return infos_.size(); }
  const UtteranceInfo& info(std::size_t i) const override { return infos_.at(i); }
  std::size_t q_dim() const override { return spec_.q_dim; }
  std::size_t v_dim() const override { return spec_.v_dim; }
  SpeakerEmbedding embedding(std::size_t i) const override;
  FrameMatrix frames(std::size_t i, Precision* stored = nullptr) const override;

  const SynthSpec& spec() const { return spec_; }
  const GroundTruth& truth() const { return truth_; }
  std::size_t speaker_of(std::size_t i) const { return i / spec_.utts_per_speaker; }

 private:
  SynthSpec spec_;
  GroundTruth truth_;
  std::vector<UtteranceInfo> infos_;
};

struct SynthOutput {
  std::filesystem::path manifest_path;
  GroundTruth truth;
};

// Writes manifest.jsonl, frames/*.npy, embeddings/*.npy and ground_truth/
// under `out_dir`.
SynthOutput generate(const SynthSpec& spec, const std::filesystem::path& out_dir);

void save_ground_truth(const GroundTruth& truth, const SynthSpec& spec,
                       const std::filesystem::path& dir);
GroundTruth load_ground_truth(const std::filesystem::path& dir);

// The true (basis, bias) expressed over reduced embeddings d = C(e - mu) of a
// fitted PCA. Valid for corpora without jitter or nonlinear leakage, when the
// PCA keeps p_true components spanning the columns of M.
std::pair<Matrix, Vector> reduced_space_truth(const GroundTruth& truth, const PcaModel& pca);

}  // namespace eta
