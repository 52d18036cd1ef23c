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
#include <fstream>
#include <numeric>

#include "eta/parallel.hpp"
#include "eta/pipeline.hpp"
#include "eta/rng.hpp"
#include "eta/synth.hpp"
#include "test_util.hpp"

using namespace eta;
using eta::test::max_abs_diff;
using eta::test::TempDir;

namespace {

SynthSpec small_spec(double noise = 0.0, double content = 0.0) {
  SynthSpec s;
  s.n_speakers = 12;
  s.utts_per_speaker = 3;
  s.frames_per_utt = 20;
  s.q_dim = 10;
  s.v_dim = 8;
  s.p_true = 4;
  s.noise_sigma = noise;
  s.content_sigma = content;
  s.seed = 1;
  s.world_seed = 2;
  s.precision = Precision::kF64;
  return s;
}

FitConfig small_config(std::size_t p = 4) {
  FitConfig c;
  c.p_dim = p;
  c.l_subsample = 15;
  c.seed = 3;
  c.workers = 1;
  return c;
}

std::string file_bytes(const fs::path& p) { return read_text_file(p); }

}  // namespace

TEST_SUITE("rng") {

TEST_CASE("fnv1a64 reference values") {
  CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
  CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
  CHECK(fnv1a64("foobar") == 0x85944171f73967e8ULL);
}

TEST_CASE("generator streams") {
  Rng a(5), b(5), c(6);
  for (int i = 0; i < 10; ++i) CHECK(a.next_u64() == b.next_u64());
  CHECK(Rng(5).next_u64() != c.next_u64());
  CHECK(keyed_seed(1, "x") != keyed_seed(1, "y"));
  CHECK(keyed_seed(1, "x") != keyed_seed(2, "x"));
  CHECK(mix_seed(1, 2) != mix_seed(2, 1));

  Rng r(7);
  std::vector<int> counts(7, 0);
  double sum = 0, sq = 0, usum = 0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const auto k = r.uniform_index(7);
    REQUIRE(k < 7);
    ++counts[k];
    const double u = r.uniform01();
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
    usum += u;
    const double z = r.normal();
    sum += z;
    sq += z * z;
  }
  for (int c7 : counts) CHECK(std::abs(c7 - n / 7.0) < 5 * std::sqrt(n / 7.0));
  CHECK(std::abs(usum / n - 0.5) < 0.005);
  CHECK(std::abs(sum / n) < 0.01);
  CHECK(std::abs(sq / n - 1.0) < 0.02);
  CHECK(r.uniform_index(1) == 0);
}

}  // TEST_SUITE

TEST_SUITE("parallel") {

TEST_CASE("ordered fold preserves order for any worker count") {
  std::vector<std::size_t> order(200);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::reverse(order.begin(), order.end());
  for (std::size_t w : {1, 2, 3, 8}) {
    std::vector<std::size_t> seen;
    ordered_map_fold<std::size_t>(
        order, w, [](std::size_t i) { return i * 2; }, [&](std::size_t&& v) { seen.push_back(v); });
    REQUIRE(seen.size() == 200);
    for (std::size_t i = 0; i < 200; ++i) CHECK(seen[i] == order[i] * 2);
  }
}

TEST_CASE("ordered fold propagates exceptions") {
  std::vector<std::size_t> order(100);
  std::iota(order.begin(), order.end(), std::size_t{0});
  for (std::size_t w : {1, 4}) {
    CHECK_ERRC(ordered_map_fold<int>(
                   order, w,
                   [](std::size_t i) {
                     if (i == 37) fail(Errc::kIoError, "boom");
                     return 1;
                   },
                   [](int&&) {}),
               Errc::kIoError);
  }
}

TEST_CASE("parallel reduce") {
  for (std::size_t w : {1, 3, 8}) {
    const auto total = parallel_reduce<long>(
        1000, w, [] { return 0L; }, [](long& acc, std::size_t i) { acc += static_cast<long>(i); },
        [](long& a, const long& b) { a += b; });
    CHECK(total == 999L * 1000L / 2);
  }
  CHECK_ERRC(parallel_reduce<int>(
                 10, 2, [] { return 0; },
                 [](int&, std::size_t i) {
                   if (i == 3) fail(Errc::kNonFinite, "bad");
                 },
                 [](int&, const int&) {}),
             Errc::kNonFinite);
}

}  // TEST_SUITE

TEST_SUITE("synth") {

TEST_CASE("synthetic corpus layout") {
  const SynthCorpus c(small_spec());
  CHECK(c.size() == 36);
  CHECK(c.info(0).utt_id == "s1_spk0000_utt0000");
  CHECK(c.info(4).speaker_id == "s1_spk0001");
  CHECK(c.speaker_of(4) == 1);
  const auto& t = c.truth();
  CHECK(t.mixing.rows() == 8);
  CHECK(t.mixing.cols() == 4);
  CHECK(max_abs_diff(t.mixing.transpose() * t.mixing, Eigen::MatrixXd::Identity(4, 4)) < 1e-12);
  // Noiseless frames are exactly z A + b, embeddings exactly M z.
  const Vector z = t.speaker_latents.row(1).transpose();
  const FrameMatrix f = c.frames(4);
  CHECK(f.frames() == 20);
  const RowVector expect = z.transpose() * t.basis + t.bias.transpose();
  CHECK(max_abs_diff(f.data.row(7), expect) < 1e-12);
  CHECK(max_abs_diff(c.embedding(4).raw, t.mixing * z) < 1e-12);
}

TEST_CASE("synthetic seeds") {
  SynthSpec a = small_spec(0.1, 1.0), b = a;
  b.seed = 9;
  const SynthCorpus ca(a), ca2(a), cb(b);
  CHECK(ca.frames(3).data == ca2.frames(3).data);
  CHECK(ca.truth().basis == cb.truth().basis);
  CHECK(ca.truth().mixing == cb.truth().mixing);
  CHECK(ca.truth().speaker_latents != cb.truth().speaker_latents);
  CHECK(ca.info(0).utt_id != cb.info(0).utt_id);
  b = a;
  b.world_seed = 3;
  CHECK(SynthCorpus(b).truth().basis != ca.truth().basis);
  SynthSpec bad = a;
  bad.p_true = 9;
  CHECK_ERRC(SynthCorpus{bad}, Errc::kInvalidArgument);
  bad = a;
  bad.noise_sigma = -1;
  CHECK_ERRC(SynthCorpus{bad}, Errc::kInvalidArgument);
}

TEST_CASE("generated corpus on disk") {
  TempDir tmp;
  SynthSpec s = small_spec(0.1, 1.0);
  s.precision = Precision::kF32;
  const SynthOutput out = generate(s, tmp / "c");
  const ManifestSource src = ManifestSource::open(out.manifest_path);
  const SynthCorpus mem(s);
  CHECK(src.size() == mem.size());
  CHECK(src.fingerprint() == mem.fingerprint());
  Precision stored{};
  const FrameMatrix f = src.frames(5, &stored);
  CHECK(stored == Precision::kF32);
  CHECK(f.data == mem.frames(5).data.cast<float>().cast<double>());
  const GroundTruth t = load_ground_truth(tmp / "c/ground_truth");
  CHECK(t.basis == out.truth.basis);
  CHECK(t.mixing == out.truth.mixing);
  CHECK(t.speaker_ids == out.truth.speaker_ids);
  CHECK(inspect_path(tmp / "c").find("validation: ok") != std::string::npos);
}

}  // TEST_SUITE

TEST_SUITE("pipeline") {

TEST_CASE("fit recovers the reduced-space truth") {
  const SynthCorpus c(small_spec());
  const FitResult r = fit_corpus(c, small_config());
  const auto [basis, bias] = reduced_space_truth(c.truth(), r.bundle.pca);
  CHECK(max_abs_diff(r.bundle.latent.basis, basis) < 1e-8);
  CHECK(max_abs_diff(r.bundle.latent.bias, bias) < 1e-8);
  CHECK(r.summary.n_utts == 36);
  CHECK(r.summary.n_frames_used == 36 * 15);
  CHECK(r.summary.residual_frobenius < 1e-6);
  CHECK(r.bundle.latent.fit_meta.l_subsample == 15);
  CHECK(r.bundle.latent.fit_meta.rng_seed == 3);
  CHECK(r.bundle.latent.fit_meta.dataset_fingerprint == c.fingerprint());
  for (Solver s : {Solver::kQr, Solver::kNormalEq}) {
    FitConfig cfg = small_config();
    cfg.solver = s;
    const FitResult rs = fit_corpus(c, cfg);
    CHECK(max_abs_diff(rs.bundle.latent.basis, basis) < 1e-8);
  }
}

TEST_CASE("fit stationarity on noisy data") {
  const SynthCorpus c(small_spec(0.2, 1.0));
  const FitResult r = fit_corpus(c, small_config());
  CHECK(r.summary.stationarity_max_abs <=
        1e-8 * static_cast<double>(r.summary.n_frames_used) * r.summary.max_abs_frame);
  CHECK(r.summary.residual_frobenius > 1.0);
}

TEST_CASE("fit from disk matches the in-memory corpus") {
  TempDir tmp;
  const SynthSpec s = small_spec(0.1, 1.0);
  generate(s, tmp / "c");
  const FitResult disk = fit_corpus(ManifestSource::open(tmp / "c/manifest.jsonl"), small_config());
  const FitResult mem = fit_corpus(SynthCorpus(s), small_config());
  CHECK(disk.bundle.latent.basis == mem.bundle.latent.basis);
  CHECK(disk.bundle.latent.bias == mem.bundle.latent.bias);
  CHECK(disk.bundle.pca.components == mem.bundle.pca.components);
}

TEST_CASE("fit is independent of the worker count") {
  TempDir tmp;
  const SynthCorpus c(small_spec(0.1, 1.0));
  FitConfig cfg = small_config();
  const FitResult one = fit_corpus(c, cfg);
  cfg.workers = 6;
  const FitResult six = fit_corpus(c, cfg);
  save_bundle(one.bundle, tmp / "one");
  save_bundle(six.bundle, tmp / "six");
  for (const char* f : {"meta.json", "pca_components.npy", "latent_basis.npy", "latent_bias.npy"}) {
    CHECK(file_bytes(tmp / "one" / f) == file_bytes(tmp / "six" / f));
  }
  cfg.deterministic = false;
  const FitResult loose = fit_corpus(c, cfg);
  CHECK(max_abs_diff(loose.bundle.latent.basis, one.bundle.latent.basis) < 1e-10);
  CHECK(max_abs_diff(loose.bundle.latent.bias, one.bundle.latent.bias) < 1e-10);
}

TEST_CASE("fit argument errors") {
  const SynthCorpus c(small_spec());
  FitConfig cfg = small_config(9);
  CHECK_ERRC(fit_corpus(c, cfg), Errc::kInvalidArgument);
  cfg = small_config();
  cfg.l_subsample = 0;
  CHECK_ERRC(fit_corpus(c, cfg), Errc::kInvalidArgument);
  SynthSpec one = small_spec();
  one.n_speakers = 1;
  one.utts_per_speaker = 1;
  CHECK_ERRC(fit_corpus(SynthCorpus(one), small_config()), Errc::kTooFewSamples);
}

TEST_CASE("fit summary json") {
  const SynthCorpus c(small_spec());
  const auto j = to_json(fit_corpus(c, small_config()).summary);
  for (const char* k : {"n_utts", "n_frames_used", "residual_frobenius", "gram_condition_number"}) {
    CHECK(j.contains(k));
  }
}

TEST_CASE("transform writes a mirrored eta corpus") {
  TempDir tmp;
  SynthSpec s = small_spec(0.1, 1.0);
  generate(s, tmp / "raw");
  const ManifestSource src = ManifestSource::open(tmp / "raw/manifest.jsonl");
  const ModelBundle b = fit_corpus(src, small_config()).bundle;
  const TransformSummary ts = transform_corpus(b, src, tmp / "eta", 2);
  CHECK(ts.n_utts == src.size());
  CHECK(ts.n_frames == 36 * 20);
  CHECK(!fs::exists(tmp / "eta.partial"));
  const ManifestSource out = ManifestSource::open(ts.manifest_path);
  REQUIRE(out.size() == src.size());
  for (std::size_t i = 0; i < src.size(); ++i) {
    CHECK(out.info(i).utt_id == src.info(i).utt_id);
    CHECK(out.info(i).speaker_id == src.info(i).speaker_id);
    CHECK(out.info(i).n_frames == src.info(i).n_frames);
    const FrameMatrix expect =
        eta_transform(b.latent, project(b.pca, src.embedding(i)), src.frames(i));
    CHECK(out.frames(i).data == expect.data);
    CHECK(out.embedding(i).raw == src.embedding(i).raw);
  }
  // Running again replaces the previous output.
  CHECK_NOTHROW(transform_corpus(b, src, tmp / "eta", 1));
}

TEST_CASE("transform with a zero model is the identity") {
  TempDir tmp;
  generate(small_spec(0.1, 1.0), tmp / "raw");
  const ManifestSource src = ManifestSource::open(tmp / "raw/manifest.jsonl");
  ModelBundle b = fit_corpus(src, small_config()).bundle;
  b.latent.basis.setZero();
  b.latent.bias.setZero();
  transform_corpus(b, src, tmp / "eta");
  const ManifestSource out = ManifestSource::open(tmp / "eta/manifest.jsonl");
  for (std::size_t i = 0; i < src.size(); ++i) CHECK(out.frames(i).data == src.frames(i).data);
}

TEST_CASE("transform failures leave nothing behind") {
  TempDir tmp;
  generate(small_spec(0.1, 1.0), tmp / "raw");
  const ManifestSource src = ManifestSource::open(tmp / "raw/manifest.jsonl");
  ModelBundle b = fit_corpus(src, small_config()).bundle;

  SUBCASE("dimension mismatch") {
    ModelBundle wrong = b;
    wrong.latent.basis = Matrix::Zero(4, 11);
    wrong.latent.bias = Vector::Zero(11);
    CHECK_ERRC(transform_corpus(wrong, src, tmp / "eta"), Errc::kDimensionMismatch);
    CHECK(!fs::exists(tmp / "eta"));
  }
  SUBCASE("corrupt utterance") {
    const auto& e = src.manifest().entries[7];
    const fs::path f = src.manifest().feature_file(e);
    std::string bytes = file_bytes(f);
    const double nan = std::numeric_limits<double>::quiet_NaN();
    std::memcpy(bytes.data() + read_array_header(f).data_offset, &nan, sizeof nan);
    write_text_file(f, bytes);
    try {
      transform_corpus(b, src, tmp / "eta", 2);
      FAIL("transform should have failed");
    } catch (const Error& err) {
      CHECK(err.code() == Errc::kNonFinite);
      CHECK(std::string(err.what()).find(e.utt_id) != std::string::npos);
    }
    CHECK(!fs::exists(tmp / "eta"));
    CHECK(!fs::exists(tmp / "eta.partial"));
  }
  SUBCASE("refuses to replace unrelated directories") {
    fs::create_directories(tmp / "keep");
    write_text_file(tmp / "keep/notes.txt", "x");
    CHECK_ERRC(transform_corpus(b, src, tmp / "keep"), Errc::kIoError);
    CHECK(fs::exists(tmp / "keep/notes.txt"));
  }
}

TEST_CASE("probe request with reference fold accuracies") {
  ProbeRequest req;
  req.override_a = {83.46, 82.33, 80.85, 83.30, 81.55};
  req.override_b = {53.82, 55.14, 58.77, 53.94, 56.96};
  const auto j = run_probe_request(req);
  CHECK(j["a"]["mean_percent"].get<double>() == doctest::Approx(82.298));
  CHECK(j["b"]["mean_percent"].get<double>() == doctest::Approx(55.726));
  CHECK(j["paired_t_test"]["status"] == "ok");
  CHECK(std::abs(j["paired_t_test"]["t_statistic"].get<double>() - 18.41) < 0.01);
  CHECK(j["paired_t_test"]["significant"] == true);
  req.override_b = {101.0, 1, 1, 1, 1};
  CHECK_ERRC(run_probe_request(req), Errc::kInvalidArgument);
  CHECK_ERRC(run_probe_request(ProbeRequest{}), Errc::kInvalidArgument);
}

TEST_CASE("probe request on corpora") {
  TempDir tmp;
  SynthSpec s = small_spec(0.1, 1.0);
  s.utts_per_speaker = 5;
  s.n_speakers = 4;
  generate(s, tmp / "raw");
  ProbeRequest req;
  req.manifest_a = tmp / "raw/manifest.jsonl";
  req.manifest_b = tmp / "raw/manifest.jsonl";
  req.projection = ProjectionMethod::kPca2d;
  req.projection_dir = tmp / "proj";
  const auto j = run_probe_request(req);
  CHECK(j["paired_t_test"]["status"] == "degenerate");
  CHECK(j["paired_t_test"]["reason"] == "ZeroVariance");
  CHECK(j["paired_t_test"]["significant"] == false);
  CHECK(j["a"]["fold_accuracies"] == j["b"]["fold_accuracies"]);
  CHECK(fs::exists(tmp / "proj/projection_a.csv"));
  CHECK(fs::exists(tmp / "proj/projection_b.csv"));
}

TEST_CASE("inspect") {
  TempDir tmp;
  generate(small_spec(), tmp / "c");
  const ManifestSource src = ManifestSource::open(tmp / "c/manifest.jsonl");
  save_bundle(fit_corpus(src, small_config()).bundle, tmp / "b");
  const std::string b = inspect_path(tmp / "b");
  for (const char* s : {"P: 4", "Q: 10", "V: 8", "L: 15", "seed: 3"}) {
    CAPTURE(s);
    CHECK(b.find(s) != std::string::npos);
  }
  const std::string m = inspect_path(tmp / "c/manifest.jsonl");
  CHECK(m.find("utterances: 36") != std::string::npos);
  CHECK(m.find("speakers: 12") != std::string::npos);
  const std::string n = inspect_path(tmp / "c/frames/s1_spk0000_utt0000.npy");
  CHECK(n.find("shape: (20, 10)") != std::string::npos);
  write_text_file(tmp / "bad.npy", "\x93NUMPY\x01");
  CHECK_ERRC(inspect_path(tmp / "bad.npy"), Errc::kMalformedHeader);
  CHECK_ERRC(inspect_path(tmp / "nothing"), Errc::kIoError);
  CHECK(inspect_path(tmp / "c/ground_truth").find("synthetic ground truth") != std::string::npos);
}

}  // TEST_SUITE
