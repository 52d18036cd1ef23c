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

// eta: fit, apply and evaluate the speaker / eta decomposition.

#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "eta/eta.h"

namespace {

constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

using owned_string = std::unique_ptr<char, decltype(&eta_string_free)>;

int report_failure(eta_status st) {
  nlohmann::ordered_json j;
  j["error"] = eta_status_name(st);
  j["message"] = eta_last_error();
  std::cerr << j.dump() << "\n";
  return kExitRuntime;
}

int emit_json(eta_status st, char* raw) {
  owned_string s(raw, eta_string_free);
  if (st != ETA_OK) return report_failure(st);
  std::cout << nlohmann::ordered_json::parse(s.get()).dump(2) << "\n";
  return 0;
}

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.find_first_not_of(" \t") == std::string::npos) continue;
    std::size_t used = 0;
    double v = 0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      throw UsageError("--folds-override: '" + item + "' is not a number");
    }
    if (item.find_first_not_of(" \t", used) != std::string::npos) {
      throw UsageError("--folds-override: '" + item + "' is not a number");
    }
    out.push_back(v);
  }
  return out;
}

// "a1,a2,...;b1,b2,..." with either side optionally empty.
std::pair<std::vector<double>, std::vector<double>> parse_overrides(const std::string& text) {
  const auto semi = text.find(';');
  if (semi == std::string::npos) return {parse_list(text), {}};
  if (text.find(';', semi + 1) != std::string::npos) {
    throw UsageError("--folds-override takes at most two ';'-separated lists");
  }
  return {parse_list(text.substr(0, semi)), parse_list(text.substr(semi + 1))};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Linear speaker / eta decomposition of frame-level speech features", "eta"};
  app.require_subcommand(1);
  app.set_version_flag("--version", eta_version());

  // fit
  eta_fit_options fit;
  eta_fit_options_init(&fit);
  std::string fit_manifest, fit_out, fit_solver = "svd";
  bool fit_det = true;
  auto* fit_cmd = app.add_subcommand("fit", "Fit PCA, latent basis and bias; write a model bundle");
  fit_cmd->add_option("--manifest", fit_manifest, "Input corpus manifest (JSONL)")->required();
  fit_cmd->add_option("--out", fit_out, "Bundle output directory")->required();
  fit_cmd->add_option("--p-dim", fit.p_dim, "PCA dimension P")->capture_default_str();
  fit_cmd->add_option("--subsample", fit.l_subsample, "Frames sampled per utterance L")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  fit_cmd->add_option("--seed", fit.seed, "Subsampling seed")->capture_default_str();
  fit_cmd->add_option("--solver", fit_solver, "Least-squares solver")
      ->capture_default_str()
      ->check(CLI::IsMember({"svd", "qr", "normal-eq", "normal_eq"}));
  fit_cmd->add_option("--workers", fit.workers, "Worker threads (0 = all cores)")->capture_default_str();
  fit_cmd->add_flag("--deterministic,!--no-deterministic", fit_det,
                    "Fixed reduction order (default on)");

  // transform
  std::string tr_bundle, tr_manifest, tr_out;
  std::size_t tr_workers = 0;
  auto* tr_cmd = app.add_subcommand("transform", "Write the eta corpus of a manifest");
  tr_cmd->add_option("--bundle", tr_bundle, "Model bundle directory")->required();
  tr_cmd->add_option("--manifest", tr_manifest, "Input corpus manifest")->required();
  tr_cmd->add_option("--out", tr_out, "Output corpus directory")->required();
  tr_cmd->add_option("--workers", tr_workers, "Worker threads (0 = all cores)")->capture_default_str();

  // probe
  eta_probe_options probe;
  eta_probe_options_init(&probe);
  std::vector<std::string> pr_manifests;
  std::string pr_override, pr_projection, pr_out;
  auto* pr_cmd = app.add_subcommand("probe", "Cross-validated speaker probe and paired t-test");
  pr_cmd->add_option("--manifest", pr_manifests, "One or two corpus manifests (A then B)")
      ->expected(1, 2);
  pr_cmd->add_option("--folds", probe.k, "Number of folds k")->capture_default_str();
  pr_cmd->add_option("--seed", probe.seed, "Fold assignment seed")->capture_default_str();
  pr_cmd->add_option("--folds-override", pr_override,
                     "Fold accuracies in percent, \"a1,a2,...;b1,b2,...\"");
  pr_cmd->add_option("--projection", pr_projection, "Export pooled vectors")
      ->check(CLI::IsMember({"pca2d", "raw-dump"}));
  pr_cmd->add_option("--out", pr_out, "Directory for --projection output");

  // synth
  eta_synth_options syn;
  eta_synth_options_init(&syn);
  std::string syn_out, syn_precision = "f32";
  auto* syn_cmd = app.add_subcommand("synth", "Generate a synthetic corpus with known ground truth");
  syn_cmd->add_option("--out", syn_out, "Output corpus directory")->required();
  syn_cmd->add_option("--n-speakers", syn.n_speakers)->capture_default_str();
  syn_cmd->add_option("--utts-per-speaker", syn.utts_per_speaker)->capture_default_str();
  syn_cmd->add_option("--frames-per-utt", syn.frames_per_utt)->capture_default_str();
  syn_cmd->add_option("--q-dim", syn.q_dim)->capture_default_str();
  syn_cmd->add_option("--v-dim", syn.v_dim)->capture_default_str();
  syn_cmd->add_option("--p-true", syn.p_true)->capture_default_str();
  syn_cmd->add_option("--noise-sigma", syn.noise_sigma)->capture_default_str();
  syn_cmd->add_option("--content-sigma", syn.content_sigma)->capture_default_str();
  syn_cmd->add_option("--jitter-sigma", syn.jitter_sigma)->capture_default_str();
  syn_cmd->add_option("--nonlinear-leakage", syn.nonlinear_leakage)->capture_default_str();
  syn_cmd->add_option("--seed", syn.seed)->capture_default_str();
  syn_cmd->add_option("--world-seed", syn.world_seed, "Seed of the shared basis and mixing")
      ->capture_default_str();
  syn_cmd->add_option("--precision", syn_precision)
      ->capture_default_str()
      ->check(CLI::IsMember({"f32", "f64"}));

  // inspect
  std::string in_path;
  auto* in_cmd = app.add_subcommand("inspect", "Describe an NPY file, manifest, corpus or bundle");
  in_cmd->add_option("path", in_path, "File or directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*fit_cmd) {
      fit.manifest_path = fit_manifest.c_str();
      fit.out_dir = fit_out.c_str();
      fit.solver = fit_solver.c_str();
      fit.deterministic = fit_det ? 1 : 0;
      char* out = nullptr;
      const eta_status st = eta_fit(&fit, &out);
      return emit_json(st, out);
    }
    if (*tr_cmd) {
      char* out = nullptr;
      const eta_status st = eta_transform_corpus(tr_bundle.c_str(), tr_manifest.c_str(),
                                                 tr_out.c_str(), tr_workers, &out);
      return emit_json(st, out);
    }
    if (*pr_cmd) {
      std::vector<double> oa, ob;
      if (!pr_override.empty()) std::tie(oa, ob) = parse_overrides(pr_override);
      if (pr_manifests.empty() && oa.empty() && ob.empty()) {
        throw UsageError("probe needs --manifest or --folds-override");
      }
      if (!pr_projection.empty() && pr_out.empty()) {
        throw UsageError("--projection needs --out");
      }
      if (!pr_manifests.empty()) probe.manifest_a = pr_manifests[0].c_str();
      if (pr_manifests.size() > 1) probe.manifest_b = pr_manifests[1].c_str();
      probe.override_a = oa.data();
      probe.override_a_len = oa.size();
      probe.override_b = ob.data();
      probe.override_b_len = ob.size();
      if (!pr_projection.empty()) {
        probe.projection = pr_projection.c_str();
        probe.projection_dir = pr_out.c_str();
      }
      char* out = nullptr;
      const eta_status st = eta_probe(&probe, &out);
      return emit_json(st, out);
    }
    if (*syn_cmd) {
      syn.out_dir = syn_out.c_str();
      syn.f64 = syn_precision == "f64" ? 1 : 0;
      char* out = nullptr;
      const eta_status st = eta_synth(&syn, &out);
      return emit_json(st, out);
    }
    if (*in_cmd) {
      char* raw = nullptr;
      const eta_status st = eta_inspect(in_path.c_str(), &raw);
      owned_string text(raw, eta_string_free);
      if (st != ETA_OK) return report_failure(st);
      std::cout << text.get();
      return 0;
    }
  } catch (const UsageError& e) {
    std::cerr << "eta " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    nlohmann::ordered_json j;
    j["error"] = "Internal";
    j["message"] = e.what();
    std::cerr << j.dump() << "\n";
    return kExitRuntime;
  }
  return kExitUsage;
}
