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

#include "eta/eta.h"

#include <cstring>
#include <exception>
#include <new>
#include <string>

#include <json.hpp>

#include "eta/core.hpp"
#include "eta/datastore.hpp"
#include "eta/error.hpp"
#include "eta/pipeline.hpp"
#include "eta/probe.hpp"
#include "eta/synth.hpp"

struct eta_bundle {
  eta::ModelBundle model;
};

struct eta_accumulator {
  eta::GramAccumulator acc;
};

namespace {

thread_local std::string g_last_error;

template <class F>
eta_status guarded(F&& f) {
  try {
    f();
    g_last_error.clear();
    return ETA_OK;
  } catch (const eta::Error& e) {
    g_last_error = e.what();
    return static_cast<eta_status>(e.code());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return ETA_INTERNAL;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return ETA_INTERNAL;
  } catch (...) {
    g_last_error = "unknown exception";
    return ETA_INTERNAL;
  }
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.data(), s.size() + 1);
  return out;
}

void need(const void* p, const char* what) {
  eta::require(p != nullptr, eta::Errc::kInvalidArgument, std::string(what) + " must not be NULL");
}

void put_string(char** out, const std::string& s) {
  if (out) *out = dup_string(s);
}

}  // namespace

extern "C" {

const char* eta_status_name(eta_status status) {
  return eta::errc_name(static_cast<eta::Errc>(status));
}

const char* eta_last_error(void) { return g_last_error.c_str(); }

void eta_string_free(char* s) { std::free(s); }

const char* eta_version(void) { return "1.0.0"; }

void eta_fit_options_init(eta_fit_options* o) {
  if (!o) return;
  *o = eta_fit_options{};
  const eta::FitConfig def;
  o->p_dim = def.p_dim;
  o->l_subsample = def.l_subsample;
  o->seed = def.seed;
  o->solver = "svd";
  o->workers = def.workers;
  o->deterministic = def.deterministic ? 1 : 0;
}

eta_status eta_fit(const eta_fit_options* o, char** summary_json) {
  return guarded([&] {
    need(o, "options");
    need(o->manifest_path, "manifest_path");
    eta::FitConfig cfg;
    cfg.p_dim = o->p_dim;
    cfg.l_subsample = o->l_subsample;
    cfg.seed = o->seed;
    cfg.solver = eta::parse_solver(o->solver ? o->solver : "svd");
    cfg.workers = o->workers;
    cfg.deterministic = o->deterministic != 0;
    const auto src = eta::ManifestSource::open(o->manifest_path);
    const auto result = eta::fit_corpus(src, cfg);
    auto j = eta::to_json(result.summary);
    if (o->out_dir) {
      eta::save_bundle(result.bundle, o->out_dir);
      j["bundle"] = std::string(o->out_dir);
    }
    put_string(summary_json, j.dump());
  });
}

eta_status eta_transform_corpus(const char* bundle_dir, const char* manifest_path,
                                const char* out_dir, size_t workers, char** summary_json) {
  return guarded([&] {
    need(bundle_dir, "bundle_dir");
    need(manifest_path, "manifest_path");
    need(out_dir, "out_dir");
    const auto bundle = eta::load_bundle(bundle_dir);
    const auto src = eta::ManifestSource::open(manifest_path);
    const auto s = eta::transform_corpus(bundle, src, out_dir, workers);
    nlohmann::ordered_json j;
    j["n_utts"] = s.n_utts;
    j["n_frames"] = s.n_frames;
    j["manifest"] = s.manifest_path.string();
    put_string(summary_json, j.dump());
  });
}

void eta_probe_options_init(eta_probe_options* o) {
  if (!o) return;
  *o = eta_probe_options{};
  o->k = eta::ProbeRequest{}.k;
}

eta_status eta_probe(const eta_probe_options* o, char** report_json) {
  return guarded([&] {
    need(o, "options");
    eta::ProbeRequest req;
    if (o->manifest_a) req.manifest_a = o->manifest_a;
    if (o->manifest_b) req.manifest_b = o->manifest_b;
    req.k = o->k;
    req.seed = o->seed;
    if (o->override_a_len) {
      need(o->override_a, "override_a");
      req.override_a.assign(o->override_a, o->override_a + o->override_a_len);
    }
    if (o->override_b_len) {
      need(o->override_b, "override_b");
      req.override_b.assign(o->override_b, o->override_b + o->override_b_len);
    }
    if (o->projection) req.projection = eta::parse_projection(o->projection);
    if (o->projection_dir) req.projection_dir = o->projection_dir;
    put_string(report_json, eta::run_probe_request(req).dump());
  });
}

void eta_synth_options_init(eta_synth_options* o) {
  if (!o) return;
  *o = eta_synth_options{};
  const eta::SynthSpec d;
  o->n_speakers = d.n_speakers;
  o->utts_per_speaker = d.utts_per_speaker;
  o->frames_per_utt = d.frames_per_utt;
  o->q_dim = d.q_dim;
  o->v_dim = d.v_dim;
  o->p_true = d.p_true;
  o->noise_sigma = d.noise_sigma;
  o->content_sigma = d.content_sigma;
  o->jitter_sigma = d.jitter_sigma;
  o->nonlinear_leakage = d.nonlinear_leakage;
  o->seed = d.seed;
  o->world_seed = d.world_seed;
  o->f64 = d.precision == eta::Precision::kF64 ? 1 : 0;
}

eta_status eta_synth(const eta_synth_options* o, char** summary_json) {
  return guarded([&] {
    need(o, "options");
    need(o->out_dir, "out_dir");
    eta::SynthSpec s;
    s.n_speakers = o->n_speakers;
    s.utts_per_speaker = o->utts_per_speaker;
    s.frames_per_utt = o->frames_per_utt;
    s.q_dim = o->q_dim;
    s.v_dim = o->v_dim;
    s.p_true = o->p_true;
    s.noise_sigma = o->noise_sigma;
    s.content_sigma = o->content_sigma;
    s.jitter_sigma = o->jitter_sigma;
    s.nonlinear_leakage = o->nonlinear_leakage;
    s.seed = o->seed;
    s.world_seed = o->world_seed;
    s.precision = o->f64 ? eta::Precision::kF64 : eta::Precision::kF32;
    const auto out = eta::generate(s, o->out_dir);
    nlohmann::ordered_json j;
    j["manifest"] = out.manifest_path.string();
    j["n_speakers"] = s.n_speakers;
    j["n_utts"] = s.n_speakers * s.utts_per_speaker;
    j["n_frames"] = s.n_speakers * s.utts_per_speaker * s.frames_per_utt;
    j["Q"] = s.q_dim;
    j["V"] = s.v_dim;
    j["p_true"] = s.p_true;
    j["precision"] = eta::precision_name(s.precision);
    put_string(summary_json, j.dump());
  });
}

eta_status eta_inspect(const char* path, char** text) {
  return guarded([&] {
    need(path, "path");
    put_string(text, eta::inspect_path(path));
  });
}

eta_status eta_bundle_load(const char* dir, eta_bundle** out) {
  return guarded([&] {
    need(dir, "dir");
    need(out, "out");
    *out = nullptr;
    auto* b = new eta_bundle{eta::load_bundle(dir)};
    *out = b;
  });
}

eta_status eta_bundle_save(const eta_bundle* bundle, const char* dir) {
  return guarded([&] {
    need(bundle, "bundle");
    need(dir, "dir");
    eta::save_bundle(bundle->model, dir);
  });
}

void eta_bundle_free(eta_bundle* bundle) { delete bundle; }

eta_status eta_bundle_dims(const eta_bundle* bundle, size_t* p_dim, size_t* q_dim, size_t* v_dim) {
  return guarded([&] {
    need(bundle, "bundle");
    if (p_dim) *p_dim = bundle->model.pca.p_dim();
    if (q_dim) *q_dim = bundle->model.latent.q_dim();
    if (v_dim) *v_dim = bundle->model.pca.v_dim();
  });
}

namespace {

eta::ReducedEmbedding project_raw(const eta_bundle* bundle, const double* embedding, size_t v_dim) {
  need(bundle, "bundle");
  need(embedding, "embedding");
  eta::require(v_dim == bundle->model.pca.v_dim(), eta::Errc::kDimensionMismatch,
               "embedding has " + std::to_string(v_dim) + " entries, bundle expects " +
                   std::to_string(bundle->model.pca.v_dim()));
  eta::SpeakerEmbedding e{"", Eigen::Map<const eta::Vector>(embedding, static_cast<Eigen::Index>(v_dim))};
  return eta::project(bundle->model.pca, e);
}

eta::FrameMatrix frames_raw(const double* frames, size_t n_frames, size_t q_dim) {
  need(frames, "frames");
  return eta::FrameMatrix{"", Eigen::Map<const eta::Matrix>(frames, static_cast<Eigen::Index>(n_frames),
                                                            static_cast<Eigen::Index>(q_dim))};
}

}  // namespace

eta_status eta_bundle_project(const eta_bundle* bundle, const double* embedding, size_t v_dim,
                              double* d_out, size_t p_dim) {
  return guarded([&] {
    need(d_out, "d_out");
    const auto d = project_raw(bundle, embedding, v_dim);
    eta::require(p_dim == static_cast<size_t>(d.d.size()), eta::Errc::kDimensionMismatch,
                 "output buffer has " + std::to_string(p_dim) + " entries, bundle has P=" +
                     std::to_string(d.d.size()));
    Eigen::Map<eta::Vector>(d_out, d.d.size()) = d.d;
  });
}

eta_status eta_bundle_eta_transform(const eta_bundle* bundle, const double* embedding,
                                    size_t v_dim, const double* frames, size_t n_frames,
                                    size_t q_dim, double* eta_out) {
  return guarded([&] {
    need(eta_out, "eta_out");
    const auto d = project_raw(bundle, embedding, v_dim);
    const auto eta = eta::eta_transform(bundle->model.latent, d, frames_raw(frames, n_frames, q_dim));
    Eigen::Map<eta::Matrix>(eta_out, eta.data.rows(), eta.data.cols()) = eta.data;
  });
}

eta_status eta_accumulator_create(size_t p_dim, size_t q_dim, eta_accumulator** out) {
  return guarded([&] {
    need(out, "out");
    *out = nullptr;
    *out = new eta_accumulator{eta::GramAccumulator(p_dim, q_dim)};
  });
}

void eta_accumulator_free(eta_accumulator* acc) { delete acc; }

eta_status eta_accumulator_add(eta_accumulator* acc, const double* d, size_t p_dim,
                               const double* frames, size_t n_frames, size_t q_dim) {
  return guarded([&] {
    need(acc, "acc");
    need(d, "d");
    eta::ReducedEmbedding rd{Eigen::Map<const eta::Vector>(d, static_cast<Eigen::Index>(p_dim))};
    acc->acc.add(rd, frames_raw(frames, n_frames, q_dim));
  });
}

eta_status eta_accumulator_merge(eta_accumulator* dst, const eta_accumulator* src) {
  return guarded([&] {
    need(dst, "dst");
    need(src, "src");
    dst->acc.merge(src->acc);
  });
}

eta_status eta_accumulator_frames(const eta_accumulator* acc, size_t* n_frames) {
  return guarded([&] {
    need(acc, "acc");
    need(n_frames, "n_frames");
    *n_frames = acc->acc.n_frames();
  });
}

eta_status eta_accumulator_solve(const eta_accumulator* acc, const char* solver,
                                 double* basis_out, double* bias_out) {
  return guarded([&] {
    need(acc, "acc");
    need(basis_out, "basis_out");
    need(bias_out, "bias_out");
    const auto m = eta::solve(acc->acc, eta::parse_solver(solver ? solver : "svd"));
    Eigen::Map<eta::Matrix>(basis_out, m.basis.rows(), m.basis.cols()) = m.basis;
    Eigen::Map<eta::Vector>(bias_out, m.bias.size()) = m.bias;
  });
}

eta_status eta_paired_t_test(const double* a, const double* b, size_t k, double* t_statistic,
                             double* p_value) {
  return guarded([&] {
    need(a, "a");
    need(b, "b");
    const auto r = eta::paired_t_test(std::span<const double>(a, k), std::span<const double>(b, k));
    if (t_statistic) *t_statistic = r.t_statistic;
    if (p_value) *p_value = r.p_value;
  });
}

}  // extern "C"
