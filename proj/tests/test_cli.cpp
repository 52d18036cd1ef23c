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

#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <cstdlib>
#include <string>

#include <json.hpp>

#include "eta/core.hpp"
#include "eta/datastore.hpp"
#include "eta/source.hpp"
#include "test_util.hpp"

using namespace eta;
using eta::test::TempDir;

namespace {

struct Run {
  int exit_code = -1;
  std::string out;
  std::string err;
};

Run run(const std::string& args, const TempDir& tmp, const std::string& env = "") {
  const std::string err_path = (tmp / "stderr.txt").string();
  const std::string cmd = env + " '" ETA_CLI_PATH "' " + args + " 2>'" + err_path + "'";
  Run r;
  std::FILE* p = ::popen(cmd.c_str(), "r");
  REQUIRE(p != nullptr);
  std::array<char, 4096> buf{};
  std::size_t n;
  while ((n = std::fread(buf.data(), 1, buf.size(), p)) > 0) r.out.append(buf.data(), n);
  const int status = ::pclose(p);
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.err = read_text_file(err_path);
  return r;
}

std::string q(const fs::path& p) { return "'" + p.string() + "'"; }

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("usage errors exit with 2") {
  TempDir tmp;
  CHECK(run("", tmp).exit_code == 2);
  CHECK(run("frobnicate", tmp).exit_code == 2);
  CHECK(run("fit --manifest x.jsonl", tmp).exit_code == 2);
  CHECK(run("fit --manifest x.jsonl --out b --solver cholesky", tmp).exit_code == 2);
  CHECK(run("fit --manifest x.jsonl --out b --p-dim many", tmp).exit_code == 2);
  CHECK(run("probe --folds-override 1,2,x", tmp).exit_code == 2);
  CHECK(run("probe --folds-override 1,2 --projection pca2d", tmp).exit_code == 2);
  const Run h = run("--help", tmp);
  CHECK(h.exit_code == 0);
  CHECK(h.out.find("transform") != std::string::npos);
}

TEST_CASE("runtime errors exit with 1 and a JSON diagnostic") {
  TempDir tmp;
  write_text_file(tmp / "bad.npy", std::string("\x93NUMPY\x01\x00\xff", 9));
  const Run r = run("inspect " + q(tmp / "bad.npy"), tmp);
  CHECK(r.exit_code == 1);
  CHECK(r.out.empty());
  const auto j = nlohmann::json::parse(r.err);
  CHECK(j["error"] == "MalformedHeader");
  CHECK(run("fit --manifest " + q(tmp / "none.jsonl") + " --out " + q(tmp / "b"), tmp).exit_code == 1);
}

TEST_CASE("synth with defaults passes inspection") {
  TempDir tmp;
  const Run s = run("synth --out " + q(tmp / "c"), tmp);
  REQUIRE(s.exit_code == 0);
  CHECK(nlohmann::json::parse(s.out)["n_utts"] == 200);
  const Run i = run("inspect " + q(tmp / "c"), tmp);
  CHECK(i.exit_code == 0);
  CHECK(i.out.find("validation: ok") != std::string::npos);
  CHECK(i.out.find("frame dtype: f32") != std::string::npos);
}

TEST_CASE("fit, inspect and transform") {
  TempDir tmp;
  REQUIRE(run("synth --out " + q(tmp / "c") +
                  " --n-speakers 6 --utts-per-speaker 4 --frames-per-utt 50 --q-dim 16 --v-dim 12"
                  " --p-true 4 --noise-sigma 0 --content-sigma 0 --precision f64",
              tmp)
              .exit_code == 0);
  const std::string manifest = q(tmp / "c/manifest.jsonl");
  const std::string fit_args = "fit --manifest " + manifest + " --p-dim 4 --subsample 30 --seed 5 --out ";
  const Run f = run(fit_args + q(tmp / "b1"), tmp);
  REQUIRE(f.exit_code == 0);
  const auto summary = nlohmann::json::parse(f.out);
  CHECK(summary["residual_frobenius"].get<double>() <= 1e-6);
  CHECK(summary["n_frames_used"] == 24 * 30);

  REQUIRE(run(fit_args + q(tmp / "b2") + " --workers 3", tmp).exit_code == 0);
  for (const char* file : {"meta.json", "latent_basis.npy", "latent_bias.npy", "pca_components.npy"}) {
    CHECK(read_text_file(tmp / "b1" / file) == read_text_file(tmp / "b2" / file));
  }

  const Run i = run("inspect " + q(tmp / "b1"), tmp);
  CHECK(i.exit_code == 0);
  for (const char* s : {"P: 4", "Q: 16", "V: 12", "L: 30", "seed: 5"}) {
    CAPTURE(s);
    CHECK(i.out.find(s) != std::string::npos);
  }

  const Run t = run("transform --bundle " + q(tmp / "b1") + " --manifest " + manifest + " --out " +
                        q(tmp / "eta"),
                    tmp);
  REQUIRE(t.exit_code == 0);
  const ModelBundle b = load_bundle(tmp / "b1");
  const ManifestSource in = ManifestSource::open(tmp / "c/manifest.jsonl");
  const ManifestSource out = ManifestSource::open(tmp / "eta/manifest.jsonl");
  REQUIRE(out.size() == in.size());
  for (std::size_t u = 0; u < in.size(); ++u) {
    const FrameMatrix lib = eta_transform(b.latent, project(b.pca, in.embedding(u)), in.frames(u));
    CHECK(out.frames(u).data == lib.data);
    CHECK(out.info(u).n_frames == in.info(u).n_frames);
  }
}

TEST_CASE("probe from reference fold accuracies") {
  TempDir tmp;
  const Run r = run(
      "probe --folds-override '83.46,82.33,80.85,83.30,81.55;53.82,55.14,58.77,53.94,56.96'", tmp);
  REQUIRE(r.exit_code == 0);
  const auto j = nlohmann::json::parse(r.out);
  CHECK(std::abs(j["a"]["mean_percent"].get<double>() - 82.30) <= 0.005);
  CHECK(std::abs(j["b"]["mean_percent"].get<double>() - 55.73) <= 0.005);
  CHECK(std::abs(j["paired_t_test"]["t_statistic"].get<double>() - 18.41) <= 0.01);
  CHECK(std::abs(j["paired_t_test"]["p_value"].get<double>() - 5.12e-5) <= 0.05 * 5.12e-5);
}

TEST_CASE("probe of a corpus against itself is degenerate") {
  TempDir tmp;
  REQUIRE(run("synth --out " + q(tmp / "c") + " --n-speakers 3 --utts-per-speaker 5 --frames-per-utt 10",
              tmp)
              .exit_code == 0);
  const std::string m = q(tmp / "c/manifest.jsonl");
  const Run r = run("probe --manifest " + m + " " + m + " --projection raw-dump --out " + q(tmp / "p"),
                    tmp, "ETA_LOG=debug");
  REQUIRE(r.exit_code == 0);
  const auto j = nlohmann::json::parse(r.out);
  CHECK(j["paired_t_test"]["status"] == "degenerate");
  CHECK(j["paired_t_test"]["significant"] == false);
  CHECK(fs::exists(tmp / "p/raw_a/vectors.npy"));
}

TEST_CASE("log verbosity goes to stderr") {
  TempDir tmp;
  REQUIRE(run("synth --out " + q(tmp / "c") + " --n-speakers 3 --utts-per-speaker 4 --frames-per-utt 10",
              tmp)
              .exit_code == 0);
  const std::string fit = "fit --manifest " + q(tmp / "c/manifest.jsonl") + " --p-dim 2 --out " + q(tmp / "b");
  const Run quiet = run(fit, tmp);
  const Run loud = run(fit, tmp, "ETA_LOG=debug");
  CHECK(quiet.err.empty());
  CHECK(loud.err.find("fit:") != std::string::npos);
  CHECK(nlohmann::json::parse(loud.out) == nlohmann::json::parse(quiet.out));
}

}  // TEST_SUITE
