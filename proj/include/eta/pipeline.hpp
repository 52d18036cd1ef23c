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

// Corpus-level workflows behind the command-line tool: fit, transform, probe
// and inspect.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "eta/core.hpp"
#include "eta/datastore.hpp"
#include "eta/probe.hpp"
#include "eta/source.hpp"

namespace eta {

struct FitConfig {
  std::size_t p_dim = 128;
  std::size_t l_subsample = 100;
  std::uint64_t seed = 0;
  Solver solver = Solver::kSvd;
  std::size_t workers = 0;  // 0 = available parallelism
  // Fold per-utterance statistics in utt_id order so the bundle bytes do not
  // depend on the worker count.
  bool deterministic = true;
};

struct FitSummary {
  std::size_t n_utts = 0;
  std::size_t n_frames_used = 0;
  double residual_frobenius = 0.0;     // ||S - D~^T A~||_F over the frames used
  double max_abs_frame = 0.0;          // max |S|
  double stationarity_max_abs = 0.0;   // max |D~ eta| over the frames used
  double gram_condition_number = 0.0;
  std::size_t gram_rank = 0;
  std::string dataset_fingerprint;
};

struct FitResult {
  ModelBundle bundle;
  FitSummary summary;
};

// PCA over all embeddings, then one pass accumulating the Gram statistics of
// the subsampled frames, the solve, and a second pass measuring the residual.
// Memory is O(V^2 + P Q) plus one utterance per worker.
FitResult fit_corpus(const UtteranceSource& source, const FitConfig& config);

nlohmann::ordered_json to_json(const FitSummary& s);

struct TransformSummary {
  std::size_t n_utts = 0;
  std::size_t n_frames = 0;
  std::filesystem::path manifest_path;
};

// Writes an eta corpus (manifest.jsonl, frames/, embeddings/) to `out_dir`.
// Output is staged next to `out_dir` and moved into place only on success. An
// existing `out_dir` is replaced only if it holds a previous corpus.
TransformSummary transform_corpus(const ModelBundle& bundle, const ManifestSource& source,
                                  const std::filesystem::path& out_dir, std::size_t workers = 0);

// Speaker probe dataset with one mean-pooled vector per utterance.
ProbeDataset pooled_dataset(const UtteranceSource& source);

struct ProbeRequest {
  std::optional<std::filesystem::path> manifest_a;
  std::optional<std::filesystem::path> manifest_b;
  std::size_t k = 5;
  std::uint64_t seed = 0;
  // Fold accuracies in percent; when set, replace the measured ones.
  std::vector<double> override_a;
  std::vector<double> override_b;
  std::optional<ProjectionMethod> projection;
  std::optional<std::filesystem::path> projection_dir;
};

// {"a": report, "b": report, "paired_t_test": {...}}. A zero-variance paired
// test is reported as degenerate rather than raised.
nlohmann::ordered_json run_probe_request(const ProbeRequest& request);

nlohmann::ordered_json to_json(const ProbeReport& r);
nlohmann::ordered_json to_json(const PairedTestResult& r);

// Human-readable description of an NPY file, manifest, corpus directory,
// model bundle or k-means bundle. Manifests are validated strictly.
std::string inspect_path(const std::filesystem::path& path);

}  // namespace eta
