/*
 * Copyright 2026 The eta-decompose Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef ETA_ETA_H_
#define ETA_ETA_H_

/*
 * C interface to the eta decomposition library.
 *
 * Every fallible call returns an eta_status. On failure a message is kept per
 * thread and can be read with eta_last_error(). Strings handed out through
 * `char**` parameters are owned by the caller and released with
 * eta_string_free(). Matrices are dense, row-major doubles.
 */

#include <stddef.h>
#include <stdint.h>

#if defined(ETA_BUILDING_LIBRARY)
#define ETA_API __attribute__((visibility("default")))
#else
#define ETA_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum eta_status {
  ETA_OK = 0,
  ETA_INVALID_ARGUMENT = 1,
  ETA_TOO_FEW_SAMPLES = 2,
  ETA_DIMENSION_MISMATCH = 3,
  ETA_INSUFFICIENT_DATA = 4,
  ETA_NON_FINITE = 5,
  ETA_IO_ERROR = 6,
  ETA_UNSUPPORTED_SHAPE = 7,
  ETA_MALFORMED_HEADER = 8,
  ETA_UNSUPPORTED_DTYPE = 9,
  ETA_SHAPE_RANK_ERROR = 10,
  ETA_DUPLICATE_UTT_ID = 11,
  ETA_MISSING_FIELD = 12,
  ETA_BAD_JSON = 13,
  ETA_VALIDATION_ERROR = 14,
  ETA_SCHEMA_VERSION_MISMATCH = 15,
  ETA_SHAPE_MISMATCH = 16,
  ETA_TOO_FEW_POINTS = 17,
  ETA_CLASS_TOO_SMALL = 18,
  ETA_SINGLE_CLASS = 19,
  ETA_ZERO_VARIANCE = 20,
  ETA_INTERNAL = 21
} eta_status;

/* Error class name, e.g. "MalformedHeader". Static storage. */
ETA_API const char* eta_status_name(eta_status status);
/* Message of the last failed call on this thread, or "". */
ETA_API const char* eta_last_error(void);
ETA_API void eta_string_free(char* s);
ETA_API const char* eta_version(void);

/* ---- Corpus workflows ---------------------------------------------------- */

typedef struct eta_fit_options {
  const char* manifest_path;
  const char* out_dir; /* bundle directory; may be NULL to skip saving */
  size_t p_dim;
  size_t l_subsample;
  uint64_t seed;
  const char* solver; /* "svd", "qr" or "normal_eq" */
  size_t workers;     /* 0 = available parallelism */
  int deterministic;
} eta_fit_options;

ETA_API void eta_fit_options_init(eta_fit_options* options);
/* Fits and saves a bundle; *summary_json receives the fit summary. */
ETA_API eta_status eta_fit(const eta_fit_options* options, char** summary_json);

ETA_API eta_status eta_transform_corpus(const char* bundle_dir, const char* manifest_path,
                                        const char* out_dir, size_t workers,
                                        char** summary_json);

typedef struct eta_probe_options {
  const char* manifest_a; /* may be NULL when override_a is given */
  const char* manifest_b; /* may be NULL */
  size_t k;
  uint64_t seed;
  const double* override_a; /* fold accuracies in percent */
  size_t override_a_len;
  const double* override_b;
  size_t override_b_len;
  const char* projection; /* NULL, "pca2d" or "raw-dump" */
  const char* projection_dir;
} eta_probe_options;

ETA_API void eta_probe_options_init(eta_probe_options* options);
ETA_API eta_status eta_probe(const eta_probe_options* options, char** report_json);

typedef struct eta_synth_options {
  const char* out_dir;
  size_t n_speakers;
  size_t utts_per_speaker;
  size_t frames_per_utt;
  size_t q_dim;
  size_t v_dim;
  size_t p_true;
  double noise_sigma;
  double content_sigma;
  double jitter_sigma;
  double nonlinear_leakage;
  uint64_t seed;
  uint64_t world_seed;
  int f64; /* nonzero stores float64 arrays, otherwise float32 */
} eta_synth_options;

ETA_API void eta_synth_options_init(eta_synth_options* options);
ETA_API eta_status eta_synth(const eta_synth_options* options, char** summary_json);

/* Human-readable summary of an NPY file, manifest, corpus or bundle. */
ETA_API eta_status eta_inspect(const char* path, char** text);

/* ---- Model bundles ------------------------------------------------------- */

typedef struct eta_bundle eta_bundle;

ETA_API eta_status eta_bundle_load(const char* dir, eta_bundle** out);
ETA_API eta_status eta_bundle_save(const eta_bundle* bundle, const char* dir);
ETA_API void eta_bundle_free(eta_bundle* bundle);
ETA_API eta_status eta_bundle_dims(const eta_bundle* bundle, size_t* p_dim, size_t* q_dim,
                                   size_t* v_dim);
/* d_out has p_dim entries. */
ETA_API eta_status eta_bundle_project(const eta_bundle* bundle, const double* embedding,
                                      size_t v_dim, double* d_out, size_t p_dim);
/* frames and eta_out are n_frames x q_dim. */
ETA_API eta_status eta_bundle_eta_transform(const eta_bundle* bundle, const double* embedding,
                                            size_t v_dim, const double* frames, size_t n_frames,
                                            size_t q_dim, double* eta_out);

/* ---- Streaming least squares --------------------------------------------- */

typedef struct eta_accumulator eta_accumulator;

ETA_API eta_status eta_accumulator_create(size_t p_dim, size_t q_dim, eta_accumulator** out);
ETA_API void eta_accumulator_free(eta_accumulator* acc);
/* d has p_dim entries; frames is n_frames x q_dim. */
ETA_API eta_status eta_accumulator_add(eta_accumulator* acc, const double* d, size_t p_dim,
                                       const double* frames, size_t n_frames, size_t q_dim);
ETA_API eta_status eta_accumulator_merge(eta_accumulator* dst, const eta_accumulator* src);
ETA_API eta_status eta_accumulator_frames(const eta_accumulator* acc, size_t* n_frames);
/* basis_out is p_dim x q_dim, bias_out has q_dim entries. */
ETA_API eta_status eta_accumulator_solve(const eta_accumulator* acc, const char* solver,
                                         double* basis_out, double* bias_out);

/* ---- Statistics ---------------------------------------------------------- */

ETA_API eta_status eta_paired_t_test(const double* a, const double* b, size_t k,
                                     double* t_statistic, double* p_value);

#ifdef __cplusplus
}
#endif

#endif /* ETA_ETA_H_ */
