// Copyright 2026 the kmv authors
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

#include <CLI11.hpp>
#include <cstdio>
#include <cstdlib>
#include <iostream>

#include "kmv/experiment.hpp"
#include "kmv/repro.hpp"

namespace {

// exit codes: 0 pass, 1 assertion fail, 2 config error, 3 numerical error
constexpr int kExitOk = 0;
constexpr int kExitAssert = 1;
constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

std::string output_root() {
  const char* env = std::getenv("KMV_OUTPUT_ROOT");
  return env ? env : ".";
}

void print_manifest(const kmv::Manifest& manifest) {
  std::printf("config_hash: %s\n", manifest.config_hash.c_str());
  std::printf("wall_time_ms: %.1f\n", manifest.wall_ms);
  for (const auto& [name, hash] : manifest.artifacts)
    std::printf("artifact: %s %s\n", name.c_str(), hash.c_str());
}

int print_repro(const kmv::ReproResult& res) {
  for (const auto& check : res.checks)
    std::printf("  %-48s measured %-14.6g required %s\n", check.metric.c_str(), check.measured,
                check.requirement.c_str());
  if (res.passed()) {
    std::printf("[PASS] %s\n", res.name.c_str());
    return kExitOk;
  }
  std::printf("[FAIL] %s\n", res.name.c_str());
  for (const auto& check : res.checks)
    if (!check.ok)
      std::printf("  failed: %s = %.6g, required %s\n", check.metric.c_str(), check.measured,
                  check.requirement.c_str());
  return kExitAssert;
}

struct EstimatorArgs {
  std::string input;
  std::string system = "lorenz";
  std::string dictionary = "linear";
  std::string weights;
  std::string out = "out";
  std::string initial;
  double dt = 0.01;
  long steps = 1000;
  long burn_in = 0;
  long substeps = 1;
  long rank = 2;
  long input_rank = 0;
  long window = 10;
  long levels = 2;
  long oversample = 10;
  long power = 2;
  long compress_dim = 0;
  long sparsity = 0;
  long grid = 32;
  long mode_pairs = 5;
  double rho = 1.0;
  double eps = 0.05;
  double noise = 0.0;
  long seed = 1;
  long noise_seed = 1;
  long dict_seed = 1;
};

void add_common_options(CLI::App* cmd, EstimatorArgs& args) {
  cmd->add_option("--input", args.input, "snapshot CSV instead of a simulated system");
  cmd->add_option("--system", args.system, "lorenz|duffing|duffing-damped|rossler|torus");
  cmd->add_option("--weights", args.weights, "quadrature weight file (one value per line)");
  cmd->add_option("--out", args.out, "output directory");
  cmd->add_option("--dt", args.dt, "sampling step");
  cmd->add_option("--steps", args.steps, "trajectory steps");
  cmd->add_option("--burn-in", args.burn_in, "burn-in samples to discard");
  cmd->add_option("--substeps", args.substeps, "RK4 substeps per sample");
  cmd->add_option("--initial", args.initial, "initial condition, space separated");
  cmd->add_option("--rank", args.rank, "truncation rank");
  cmd->add_option("--seed", args.seed, "sampling/method seed");
  cmd->add_option("--noise", args.noise, "relative sensor-noise level");
  cmd->add_option("--noise-seed", args.noise_seed, "sensor-noise seed");
  cmd->add_option("--grid", args.grid, "torus grid side length");
  cmd->add_option("--mode-pairs", args.mode_pairs, "torus conjugate mode pairs");
}

kmv::ExperimentConfig to_config(const EstimatorArgs& args, const std::string& method) {
  kmv::ExperimentConfig cfg;
  cfg.system = args.system;
  cfg.input_csv = args.input;
  cfg.grid = args.grid;
  cfg.mode_pairs = args.mode_pairs;
  cfg.dt = args.dt;
  cfg.steps = args.steps;
  cfg.burn_in = args.burn_in;
  cfg.substeps = args.substeps;
  cfg.weights_file = args.weights;
  cfg.seed = static_cast<std::uint64_t>(args.seed);
  if (!args.initial.empty()) {
    std::istringstream is(args.initial);
    double v;
    while (is >> v) cfg.initial.push_back(v);
  }
  cfg.dictionary = args.dictionary;
  cfg.dictionary_seed = static_cast<std::uint64_t>(args.dict_seed);
  cfg.method = method;
  cfg.rank = args.rank;
  cfg.input_rank = args.input_rank;
  cfg.oversample = args.oversample;
  cfg.power = args.power;
  cfg.compress_dim = args.compress_dim;
  cfg.sparsity = args.sparsity;
  cfg.levels = args.levels;
  cfg.rho = args.rho;
  cfg.window = args.window;
  cfg.eps = args.eps;
  cfg.method_seed = static_cast<std::uint64_t>(args.seed);
  cfg.noise_level = args.noise;
  cfg.noise_seed = static_cast<std::uint64_t>(args.noise_seed);
  cfg.out_dir = args.out;
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"kmv: dynamic mode decomposition and Koopman spectral analysis"};
  app.require_subcommand(1);

  // kmv run <config>
  std::string config_path;
  CLI::App* run_cmd = app.add_subcommand("run", "run a declarative experiment config");
  run_cmd->add_option("config", config_path, "config file")->required();

  // kmv repro <name>
  std::string repro_name, repro_out;
  CLI::App* repro_cmd = app.add_subcommand("repro", "run a named desk-scale reproduction");
  repro_cmd->add_option("name", repro_name, "experiment id (see `kmv list`)")->required();
  repro_cmd->add_option("--out", repro_out, "output directory (default <root>/<name>)");

  CLI::App* list_cmd = app.add_subcommand("list", "list systems, methods and reproductions");

  // kmv dmd <variant> [...]
  EstimatorArgs dmd_args;
  std::string dmd_variant;
  CLI::App* dmd_cmd = app.add_subcommand("dmd", "regression/compression DMD variants");
  dmd_cmd->add_option("variant", dmd_variant, "exact|fb|tls|opt|dmdc|mrdmd|rdmd|cdmd|csdmd")
      ->required();
  add_common_options(dmd_cmd, dmd_args);
  dmd_cmd->add_option("--input-rank", dmd_args.input_rank,
                      "DMDc stacked-input rank (default rank+1)");
  dmd_cmd->add_option("--levels", dmd_args.levels, "mrDMD recursion depth");
  dmd_cmd->add_option("--rho", dmd_args.rho, "mrDMD base cycle threshold");
  dmd_cmd->add_option("--oversample", dmd_args.oversample, "rDMD oversampling");
  dmd_cmd->add_option("--power", dmd_args.power, "rDMD power iterations q");
  dmd_cmd->add_option("--compress-dim", dmd_args.compress_dim, "cDMD/csDMD measurement count p");
  dmd_cmd->add_option("--sparsity", dmd_args.sparsity, "csDMD mode sparsity s");

  // kmv edmd [method]
  EstimatorArgs galerkin_args;
  std::string galerkin_method = "edmd";
  CLI::App* edmd_cmd = app.add_subcommand("edmd", "Galerkin estimators on a dictionary");
  edmd_cmd->add_option("method", galerkin_method, "edmd|mpedmd|resdmd|pseudospec (default edmd)");
  add_common_options(edmd_cmd, galerkin_args);
  edmd_cmd->add_option("--dictionary", galerkin_args.dictionary,
                       "linear | rbf:N | fourier:K | delay:N");
  edmd_cmd->add_option("--dict-seed", galerkin_args.dict_seed, "dictionary seed (rbf centers)");
  edmd_cmd->add_option("--eps", galerkin_args.eps, "residual tolerance / pseudospectrum level");

  // kmv hankel / havok
  EstimatorArgs hankel_args;
  CLI::App* hankel_cmd = app.add_subcommand("hankel", "Hankel-DMD on the first state coordinate");
  add_common_options(hankel_cmd, hankel_args);
  hankel_cmd->add_option("--window", hankel_args.window, "delay-embedding window N");

  EstimatorArgs havok_args;
  CLI::App* havok_cmd = app.add_subcommand("havok", "HAVOK forced linear model");
  add_common_options(havok_cmd, havok_args);
  havok_cmd->add_option("--window", havok_args.window, "delay-embedding window N");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run_cmd) {
      std::ifstream is(config_path);
      if (!is) throw kmv::ConfigError("cannot open config file " + config_path);
      std::stringstream ss;
      ss << is.rdbuf();
      kmv::ExperimentConfig cfg = kmv::parse_config(ss.str());
      kmv::Manifest manifest = kmv::run(cfg, ss.str());
      print_manifest(manifest);
      return kExitOk;
    }
    if (*repro_cmd) {
      const std::string out = repro_out.empty() ? output_root() + "/" + repro_name : repro_out;
      return print_repro(kmv::run_repro(repro_name, out));
    }
    if (*list_cmd) {
      std::printf("systems: lorenz duffing duffing-damped rossler torus\n");
      std::printf(
          "methods: exact fb tls opt dmdc mrdmd rdmd cdmd csdmd pidmd-orthogonal "
          "pidmd-symmetric pidmd-causal pidmd-circulant edmd mpedmd hankel havok resdmd "
          "pseudospec\n");
      std::printf("dictionaries: linear rbf:N fourier:K delay:N\n");
      std::printf("repro:");
      for (const auto& name : kmv::repro_names()) std::printf(" %s", name.c_str());
      std::printf("\n");
      return kExitOk;
    }
    if (*dmd_cmd) {
      print_manifest(kmv::run(to_config(dmd_args, dmd_variant)));
      return kExitOk;
    }
    if (*edmd_cmd) {
      print_manifest(kmv::run(to_config(galerkin_args, galerkin_method)));
      return kExitOk;
    }
    if (*hankel_cmd) {
      print_manifest(kmv::run(to_config(hankel_args, "hankel")));
      return kExitOk;
    }
    if (*havok_cmd) {
      print_manifest(kmv::run(to_config(havok_args, "havok")));
      return kExitOk;
    }
  } catch (const kmv::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfig;
  } catch (const kmv::ParseError& e) {
    std::fprintf(stderr, "parse error: %s\n", e.what());
    return kExitConfig;
  } catch (const kmv::Error& e) {
    std::fprintf(stderr, "numerical error: %s\n", e.what());
    return kExitNumerical;
  }
  return kExitConfig;
}
