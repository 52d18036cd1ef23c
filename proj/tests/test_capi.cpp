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

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <string>
#include <vector>

#include <doctest.h>
#include <json.hpp>

#include "eta/eta.h"
#include "temp_dir.hpp"

using eta::test::TempDir;

namespace {

std::string take(char* s) {
  std::string out = s ? s : "";
  eta_string_free(s);
  return out;
}

}  // namespace

TEST_SUITE("capi") {

TEST_CASE("status names") {
  CHECK(std::string(eta_status_name(ETA_OK)) == "Ok");
  CHECK(std::string(eta_status_name(ETA_MALFORMED_HEADER)) == "MalformedHeader");
  CHECK(std::string(eta_status_name(ETA_ZERO_VARIANCE)) == "ZeroVariance");
  CHECK(std::string(eta_version()) == "1.0.0");
}

TEST_CASE("synth, fit, transform and probe") {
  TempDir tmp;
  const std::string raw = (tmp / "raw").string();
  const std::string bundle = (tmp / "bundle").string();
  const std::string eta_dir = (tmp / "eta").string();

  eta_synth_options so;
  eta_synth_options_init(&so);
  CHECK(so.n_speakers == 10);
  so.out_dir = raw.c_str();
  so.n_speakers = 5;
  so.utts_per_speaker = 6;
  so.frames_per_utt = 30;
  so.q_dim = 12;
  so.v_dim = 10;
  so.p_true = 3;
  char* out = nullptr;
  REQUIRE(eta_synth(&so, &out) == ETA_OK);
  CHECK(nlohmann::json::parse(take(out))["n_utts"] == 30);

  eta_fit_options fo;
  eta_fit_options_init(&fo);
  CHECK(fo.p_dim == 128);
  CHECK(fo.l_subsample == 100);
  CHECK(fo.deterministic == 1);
  const std::string manifest = raw + "/manifest.jsonl";
  fo.manifest_path = manifest.c_str();
  fo.out_dir = bundle.c_str();
  fo.p_dim = 3;
  REQUIRE(eta_fit(&fo, &out) == ETA_OK);
  const auto summary = nlohmann::json::parse(take(out));
  CHECK(summary["n_utts"] == 30);
  CHECK(summary["n_frames_used"] == 30 * 30);

  REQUIRE(eta_transform_corpus(bundle.c_str(), manifest.c_str(), eta_dir.c_str(), 1, &out) == ETA_OK);
  CHECK(nlohmann::json::parse(take(out))["n_frames"] == 900);

  const std::string eta_manifest = eta_dir + "/manifest.jsonl";
  eta_probe_options po;
  eta_probe_options_init(&po);
  CHECK(po.k == 5);
  po.manifest_a = manifest.c_str();
  po.manifest_b = eta_manifest.c_str();
  REQUIRE(eta_probe(&po, &out) == ETA_OK);
  const auto rep = nlohmann::json::parse(take(out));
  CHECK(rep["a"]["mean"].get<double>() > rep["b"]["mean"].get<double>());

  REQUIRE(eta_inspect(bundle.c_str(), &out) == ETA_OK);
  CHECK(take(out).find("P: 3") != std::string::npos);
}

TEST_CASE("errors carry a status and message") {
  TempDir tmp;
  const std::string bad = (tmp / "bad.npy").string();
  {
    std::FILE* f = std::fopen(bad.c_str(), "wb");
    std::fputs("garbage", f);
    std::fclose(f);
  }
  char* out = nullptr;
  CHECK(eta_inspect(bad.c_str(), &out) == ETA_MALFORMED_HEADER);
  CHECK(out == nullptr);
  CHECK(std::string(eta_last_error()).find("bad.npy") != std::string::npos);
  CHECK(eta_inspect(nullptr, &out) == ETA_INVALID_ARGUMENT);
  CHECK(eta_fit(nullptr, &out) == ETA_INVALID_ARGUMENT);
  eta_bundle* b = nullptr;
  CHECK(eta_bundle_load((tmp / "none").string().c_str(), &b) != ETA_OK);
  CHECK(b == nullptr);
  CHECK(eta_inspect((tmp / "bad.npy").string().c_str(), nullptr) == ETA_MALFORMED_HEADER);
}

TEST_CASE("accumulator handle") {
  eta_accumulator* acc = nullptr;
  REQUIRE(eta_accumulator_create(1, 2, &acc) == ETA_OK);
  const double d1[] = {0.0};
  const double d2[] = {1.0};
  // s = 3 d + 1 in column 0, s = -d + 2 in column 1.
  const double f1[] = {1.0, 2.0, 1.0, 2.0};
  const double f2[] = {4.0, 1.0};
  REQUIRE(eta_accumulator_add(acc, d1, 1, f1, 2, 2) == ETA_OK);
  eta_accumulator* other = nullptr;
  REQUIRE(eta_accumulator_create(1, 2, &other) == ETA_OK);
  REQUIRE(eta_accumulator_add(other, d2, 1, f2, 1, 2) == ETA_OK);
  REQUIRE(eta_accumulator_merge(acc, other) == ETA_OK);
  size_t n = 0;
  REQUIRE(eta_accumulator_frames(acc, &n) == ETA_OK);
  CHECK(n == 3);
  double basis[2], bias[2];
  REQUIRE(eta_accumulator_solve(acc, "svd", basis, bias) == ETA_OK);
  CHECK(basis[0] == doctest::Approx(3.0));
  CHECK(basis[1] == doctest::Approx(-1.0));
  CHECK(bias[0] == doctest::Approx(1.0));
  CHECK(bias[1] == doctest::Approx(2.0));
  CHECK(eta_accumulator_solve(acc, "cholesky", basis, bias) == ETA_INVALID_ARGUMENT);
  CHECK(eta_accumulator_add(acc, d1, 2, f1, 2, 2) == ETA_DIMENSION_MISMATCH);
  eta_accumulator* wrong = nullptr;
  REQUIRE(eta_accumulator_create(2, 2, &wrong) == ETA_OK);
  CHECK(eta_accumulator_merge(acc, wrong) == ETA_DIMENSION_MISMATCH);
  eta_accumulator_free(wrong);
  eta_accumulator_free(other);
  eta_accumulator_free(acc);
  eta_accumulator_free(nullptr);
}

TEST_CASE("bundle handle") {
  TempDir tmp;
  const std::string raw = (tmp / "raw").string();
  eta_synth_options so;
  eta_synth_options_init(&so);
  so.out_dir = raw.c_str();
  so.n_speakers = 4;
  so.utts_per_speaker = 3;
  so.frames_per_utt = 10;
  so.q_dim = 5;
  so.v_dim = 6;
  so.p_true = 2;
  char* out = nullptr;
  REQUIRE(eta_synth(&so, &out) == ETA_OK);
  eta_string_free(out);
  eta_fit_options fo;
  eta_fit_options_init(&fo);
  const std::string manifest = raw + "/manifest.jsonl";
  const std::string dir = (tmp / "b").string();
  fo.manifest_path = manifest.c_str();
  fo.out_dir = dir.c_str();
  fo.p_dim = 2;
  REQUIRE(eta_fit(&fo, nullptr) == ETA_OK);

  eta_bundle* b = nullptr;
  REQUIRE(eta_bundle_load(dir.c_str(), &b) == ETA_OK);
  size_t p = 0, q = 0, v = 0;
  REQUIRE(eta_bundle_dims(b, &p, &q, &v) == ETA_OK);
  CHECK(p == 2);
  CHECK(q == 5);
  CHECK(v == 6);
  std::vector<double> e(6, 0.5), d(2), frames(3 * 5, 1.0), eta(3 * 5);
  CHECK(eta_bundle_project(b, e.data(), 6, d.data(), 2) == ETA_OK);
  CHECK(eta_bundle_project(b, e.data(), 5, d.data(), 2) == ETA_DIMENSION_MISMATCH);
  CHECK(eta_bundle_project(b, e.data(), 6, d.data(), 3) == ETA_DIMENSION_MISMATCH);
  CHECK(eta_bundle_eta_transform(b, e.data(), 6, frames.data(), 3, 5, eta.data()) == ETA_OK);
  CHECK(eta[0] == doctest::Approx(eta[5]));
  CHECK(eta_bundle_eta_transform(b, e.data(), 6, frames.data(), 5, 3, eta.data()) ==
        ETA_DIMENSION_MISMATCH);
  REQUIRE(eta_bundle_save(b, (tmp / "copy").string().c_str()) == ETA_OK);
  eta_bundle_free(b);
}

TEST_CASE("paired t-test entry point") {
  const double a[] = {83.46, 82.33, 80.85, 83.30, 81.55};
  const double b[] = {53.82, 55.14, 58.77, 53.94, 56.96};
  double t = 0, p = 0;
  REQUIRE(eta_paired_t_test(a, b, 5, &t, &p) == ETA_OK);
  CHECK(std::abs(t - 18.41) < 0.01);
  CHECK(eta_paired_t_test(a, a, 5, &t, &p) == ETA_ZERO_VARIANCE);
}

}  // TEST_SUITE
