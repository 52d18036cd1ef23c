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

// On-disk formats: NPY v1.0 arrays, JSON-lines manifests and model bundle
// directories.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "eta/core.hpp"
#include "eta/types.hpp"

namespace eta {

namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// NPY

// A rank-1 or rank-2 little-endian C-order array of f4/f8. Values are always
// held as double; f32 -> f64 widening is exact, so every round trip is
// bit-exact in the stored precision.
struct NpyArray {
  std::vector<std::size_t> shape;
  Precision precision = Precision::kF64;
  std::vector<double> data;

  std::size_t rank() const { return shape.size(); }
  std::size_t element_count() const;
};

struct NpyHeader {
  std::vector<std::size_t> shape;
  Precision precision = Precision::kF64;
  std::size_t data_offset = 0;
};

// Throws UnsupportedShape for rank 0 or > 2, NonFinite, IoError.
void write_array(const fs::path& path, const NpyArray& array);
void write_matrix(const fs::path& path, const Eigen::Ref<const Matrix>& m, Precision precision);
void write_vector(const fs::path& path, const Eigen::Ref<const Vector>& v, Precision precision);

// Throws MalformedHeader (including truncation), UnsupportedDtype (anything but
// '<f4'/'<f8', or fortran_order=True), ShapeRankError (rank 0 or > 2), IoError.
NpyArray read_array(const fs::path& path);
NpyHeader read_array_header(const fs::path& path);

// Rank-2 arrays map directly; rank-1 arrays become a single row.
Matrix to_matrix(const NpyArray& a);
// Accepts rank 1 or a single-row rank-2 array.
Vector to_vector(const NpyArray& a);

Matrix read_matrix(const fs::path& path, Precision* precision = nullptr);
Vector read_vector(const fs::path& path, Precision* precision = nullptr);

// Header bytes for an array of the given shape (exposed for format tests).
std::string npy_header_bytes(const std::vector<std::size_t>& shape, Precision precision);

// ---------------------------------------------------------------------------
// Manifests

struct ManifestEntry {
  std::string utt_id;
  std::string speaker_id;
  std::string feature_path;     // relative to the manifest's directory
  std::string embedding_path;   // relative to the manifest's directory
  std::size_t n_frames = 0;
  std::size_t q_dim = 0;
  std::size_t v_dim = 0;
};

struct Manifest {
  fs::path base_dir;
  std::vector<ManifestEntry> entries;

  fs::path feature_file(const ManifestEntry& e) const { return base_dir / e.feature_path; }
  fs::path embedding_file(const ManifestEntry& e) const { return base_dir / e.embedding_path; }
};

// Parses one JSON object per line, in file order. Blank lines are skipped and
// unknown keys ignored. Throws BadJson (with line number), MissingField,
// DuplicateUttId, IoError.
Manifest load_manifest(const fs::path& path);

void write_manifest(const fs::path& path, const std::vector<ManifestEntry>& entries);

// Checks dims are consistent across entries and, in strict mode, that every
// referenced file exists and its stored shape matches the declared one.
// Throws ValidationError.
void validate_manifest(const Manifest& manifest, bool strict);

// Deterministic digest over sorted utt_ids, their frame counts and dims.
std::string dataset_fingerprint(const std::vector<ManifestEntry>& entries);

// ---------------------------------------------------------------------------
// Model bundles

inline constexpr int kBundleSchemaVersion = 1;

struct ModelBundle {
  PcaModel pca;
  LatentModel latent;
  std::string created_at;
};

// Writes meta.json, pca_mean.npy, pca_components.npy,
// pca_explained_variance.npy, latent_basis.npy, latent_bias.npy (all f64).
void save_bundle(const ModelBundle& bundle, const fs::path& dir);

// Throws SchemaVersionMismatch, ShapeMismatch, IoError, BadJson, MissingField.
ModelBundle load_bundle(const fs::path& dir);

// UTC time in ISO-8601; in deterministic mode the SOURCE_DATE_EPOCH value (or
// the Unix epoch when unset) so that identical fits produce identical bytes.
std::string bundle_timestamp(bool deterministic);

// Byte-exact file write/read helpers.
void write_text_file(const fs::path& path, const std::string& content);
std::string read_text_file(const fs::path& path);

}  // namespace eta
