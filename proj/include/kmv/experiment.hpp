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

#pragma once

#include <chrono>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "kmv/kmv.hpp"

namespace kmv {

// Declarative experiment pipeline: system -> snapshots -> estimator -> CSV
// artifacts plus a manifest. A fixed config yields byte-identical artifacts.

struct ExperimentConfig {
  // [system]
  std::string system = "lorenz";
  std::string input_csv;  // nonempty: load a snapshot pair instead of simulating
  Index grid = 32;
  Index mode_pairs = 5;
  // [sampling]
  double dt = 0.01;
  Index steps = 1000;
  Index burn_in = 0;
  Index substeps = 1;
  std::vector<double> initial;  // empty: per-system default
  std::string weights_file;     // nonempty: custom quadrature weights
  std::uint64_t seed = 1;
  // [embedding] (optional)
  bool embed = false;
  Index delays = 1;
  Index stride = 1;
  std::string embed_mode = "full";  // full | scalar
  // [dictionary]
  std::string dictionary = "linear";  // linear | rbf:N | fourier:K | delay:N
  std::uint64_t dictionary_seed = 1;
  // [method]
  std::string method = "exact";
  Index rank = 2;
  Index input_rank = 0;  // dmdc stacked-input rank; 0 -> rank + 1
  Index oversample = 10;
  Index power = 2;
  Index compress_dim = 0;
  Index sparsity = 0;
  Index levels = 2;
  double rho = 1.0;
  Index max_modes = 8;
  Index window = 10;
  double eps = 0.05;
  double grid_re_min = -1.5, grid_re_max = 1.5, grid_im_min = -1.5, grid_im_max = 1.5;
  Index grid_nx = 100, grid_ny = 100;
  std::uint64_t method_seed = 1;
  // [noise]
  double noise_level = 0.0;
  std::uint64_t noise_seed = 1;
  // [outputs]
  std::string out_dir = "out";
};

namespace detail {

inline std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

inline std::string file_hash(const std::filesystem::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::stringstream ss;
  ss << is.rdbuf();
  return hex64(fnv1a64(ss.str()));
}

inline double parse_double(const std::string& v, const std::string& key) {
  try {
    size_t used = 0;
    double d = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument("trailing");
    return d;
  } catch (const std::exception&) {
    throw ConfigError("config: key '" + key + "': expected a number, got '" + v + "'");
  }
}

inline long long parse_int(const std::string& v, const std::string& key) {
  try {
    size_t used = 0;
    long long d = std::stoll(v, &used);
    if (used != v.size()) throw std::invalid_argument("trailing");
    return d;
  } catch (const std::exception&) {
    throw ConfigError("config: key '" + key + "': expected an integer, got '" + v + "'");
  }
}

inline std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

}  // namespace detail

/// Parses the flat key-value config format with [section] headers. Unknown
/// sections or keys are rejected before any computation.
inline ExperimentConfig parse_config(const std::string& text) {
  static const std::map<std::string, std::set<std::string>> allowed = {
      {"system", {"name", "input", "grid", "mode_pairs"}},
      {"sampling", {"dt", "steps", "burn_in", "substeps", "initial", "weights", "seed"}},
      {"embedding", {"delays", "stride", "mode"}},
      {"dictionary", {"key", "seed"}},
      {"method",
       {"name", "rank", "input_rank", "oversample", "power", "compress_dim", "sparsity", "levels",
        "rho", "max_modes", "window", "eps", "grid_re_min", "grid_re_max", "grid_im_min",
        "grid_im_max", "grid_nx", "grid_ny", "seed"}},
      {"noise", {"level", "seed"}},
      {"outputs", {"dir"}},
  };
  static const std::set<std::string> known_systems = {"lorenz", "duffing", "duffing-damped",
                                                      "rossler", "torus"};
  static const std::set<std::string> known_methods = {
      "exact", "fb",     "tls",    "opt",    "dmdc",   "mrdmd",  "rdmd",      "cdmd",
      "csdmd", "pidmd-orthogonal", "pidmd-symmetric", "pidmd-causal", "pidmd-circulant",
      "edmd",  "mpedmd", "hankel", "havok",  "resdmd", "pseudospec"};

  ExperimentConfig cfg;
  std::istringstream is(text);
  std::string line, section;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    line = detail::trim(line);
    if (line.empty() || line[0] == '#') continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ConfigError("config line " + std::to_string(lineno) + ": malformed section header");
      section = line.substr(1, line.size() - 2);
      if (!allowed.count(section))
        throw ConfigError("config line " + std::to_string(lineno) + ": unknown section [" +
                          section + "]");
      if (section == "embedding") cfg.embed = true;
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = detail::trim(line.substr(0, eq));
    const std::string value = detail::trim(line.substr(eq + 1));
    if (section.empty())
      throw ConfigError("config line " + std::to_string(lineno) + ": key outside any section");
    if (!allowed.at(section).count(key))
      throw ConfigError("config line " + std::to_string(lineno) + ": unknown key '" + key +
                        "' in [" + section + "]");
    const std::string qual = section + "." + key;

    if (qual == "system.name") {
      if (!known_systems.count(value)) throw ConfigError("config: unknown system '" + value + "'");
      cfg.system = value;
    } else if (qual == "system.input") {
      cfg.input_csv = value;
    } else if (qual == "system.grid") {
      cfg.grid = detail::parse_int(value, qual);
    } else if (qual == "system.mode_pairs") {
      cfg.mode_pairs = detail::parse_int(value, qual);
    } else if (qual == "sampling.dt") {
      cfg.dt = detail::parse_double(value, qual);
    } else if (qual == "sampling.steps") {
      cfg.steps = detail::parse_int(value, qual);
    } else if (qual == "sampling.burn_in") {
      cfg.burn_in = detail::parse_int(value, qual);
    } else if (qual == "sampling.substeps") {
      cfg.substeps = detail::parse_int(value, qual);
    } else if (qual == "sampling.initial") {
      std::istringstream vs(value);
      double d;
      cfg.initial.clear();
      while (vs >> d) cfg.initial.push_back(d);
      if (cfg.initial.empty()) throw ConfigError("config: sampling.initial: no values");
    } else if (qual == "sampling.weights") {
      cfg.weights_file = value;
    } else if (qual == "sampling.seed") {
      cfg.seed = static_cast<std::uint64_t>(detail::parse_int(value, qual));
    } else if (qual == "embedding.delays") {
      cfg.delays = detail::parse_int(value, qual);
    } else if (qual == "embedding.stride") {
      cfg.stride = detail::parse_int(value, qual);
    } else if (qual == "embedding.mode") {
      if (value != "full" && value != "scalar")
        throw ConfigError("config: embedding.mode must be 'full' or 'scalar'");
      cfg.embed_mode = value;
    } else if (qual == "dictionary.key") {
      cfg.dictionary = value;
    } else if (qual == "dictionary.seed") {
      cfg.dictionary_seed = static_cast<std::uint64_t>(detail::parse_int(value, qual));
    } else if (qual == "method.name") {
      if (!known_methods.count(value)) throw ConfigError("config: unknown method '" + value + "'");
      cfg.method = value;
    } else if (qual == "method.rank") {
      cfg.rank = detail::parse_int(value, qual);
    } else if (qual == "method.input_rank") {
      cfg.input_rank = detail::parse_int(value, qual);
    } else if (qual == "method.oversample") {
      cfg.oversample = detail::parse_int(value, qual);
    } else if (qual == "method.power") {
      cfg.power = detail::parse_int(value, qual);
    } else if (qual == "method.compress_dim") {
      cfg.compress_dim = detail::parse_int(value, qual);
    } else if (qual == "method.sparsity") {
      cfg.sparsity = detail::parse_int(value, qual);
    } else if (qual == "method.levels") {
      cfg.levels = detail::parse_int(value, qual);
    } else if (qual == "method.rho") {
      cfg.rho = detail::parse_double(value, qual);
    } else if (qual == "method.max_modes") {
      cfg.max_modes = detail::parse_int(value, qual);
    } else if (qual == "method.window") {
      cfg.window = detail::parse_int(value, qual);
    } else if (qual == "method.eps") {
      cfg.eps = detail::parse_double(value, qual);
    } else if (qual == "method.grid_re_min") {
      cfg.grid_re_min = detail::parse_double(value, qual);
    } else if (qual == "method.grid_re_max") {
      cfg.grid_re_max = detail::parse_double(value, qual);
    } else if (qual == "method.grid_im_min") {
      cfg.grid_im_min = detail::parse_double(value, qual);
    } else if (qual == "method.grid_im_max") {
      cfg.grid_im_max = detail::parse_double(value, qual);
    } else if (qual == "method.grid_nx") {
      cfg.grid_nx = detail::parse_int(value, qual);
    } else if (qual == "method.grid_ny") {
      cfg.grid_ny = detail::parse_int(value, qual);
    } else if (qual == "method.seed") {
      cfg.method_seed = static_cast<std::uint64_t>(detail::parse_int(value, qual));
    } else if (qual == "noise.level") {
      cfg.noise_level = detail::parse_double(value, qual);
    } else if (qual == "noise.seed") {
      cfg.noise_seed = static_cast<std::uint64_t>(detail::parse_int(value, qual));
    } else if (qual == "outputs.dir") {
      cfg.out_dir = value;
    }
  }
  return cfg;
}

inline ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open config file " + path.string());
  std::stringstream ss;
  ss << is.rdbuf();
  return parse_config(ss.str());
}

struct Manifest {
  std::string config_hash;
  double wall_ms = 0;
  std::vector<std::pair<std::string, std::string>> artifacts;  // (name, content hash)
};

namespace detail {

class ArtifactWriter {
 public:
  explicit ArtifactWriter(const std::filesystem::path& dir) : dir_(dir) {
    std::filesystem::create_directories(dir);
  }

  std::ofstream open(const std::string& name) {
    std::ofstream os(dir_ / name);
    if (!os) throw ConfigError("cannot write artifact " + (dir_ / name).string());
    names_.push_back(name);
    return os;
  }

  /// Removes everything written so far (partial artifacts after a failure).
  void rollback() {
    for (const auto& n : names_) std::filesystem::remove(dir_ / n);
    names_.clear();
  }

  void finalize(Manifest& manifest) const {
    for (const auto& n : names_) manifest.artifacts.emplace_back(n, file_hash(dir_ / n));
  }

  const std::filesystem::path& dir() const { return dir_; }

 private:
  std::filesystem::path dir_;
  std::vector<std::string> names_;
};

inline void write_eigs_csv(std::ofstream& os, const Vector& lambdas, double dt,
                           bool continuous_time) {
  os << "re,im,abs,log_re,log_im\n";
  for (Index j = 0; j < lambdas.size(); ++j) {
    Complex lam = lambdas(j);
    Complex eta;
    if (continuous_time) {
      eta = lam;
      lam = std::exp(eta * dt);
    } else {
      eta = lam == Complex(0, 0) ? Complex(0, 0) : std::log(lam) / dt;
    }
    os << format_full(lam.real()) << ',' << format_full(lam.imag()) << ','
       << format_full(std::abs(lam)) << ',' << format_full(eta.real()) << ','
       << format_full(eta.imag()) << '\n';
  }
}

}  // namespace detail

namespace detail {

struct PipelineData {
  SnapshotPair pair;        // snapshot pair after optional embedding and noise
  RealMatrix trajectory;    // raw sampled trajectory (d x (steps+1))
  RealVector times;         // sample times for trajectory columns
  ControlSnapshots control; // torus only
  bool has_control = false;
};

inline OdeSystem system_by_name(const std::string& name) {
  if (name == "lorenz") return lorenz();
  if (name == "duffing") return duffing(false);
  if (name == "duffing-damped") return duffing(true);
  if (name == "rossler") return rossler();
  throw ConfigError("not an ODE system: " + name);
}

inline RealVector default_initial(const std::string& name, std::uint64_t seed) {
  RealVector x;
  if (name == "lorenz") {
    x.resize(3);
    x << 1, 1, 1;
  } else if (name == "rossler") {
    x.resize(3);
    x << 1, 1, 0;
  } else if (name == "duffing" || name == "duffing-damped") {
    Rng rng(seed);
    x.resize(2);
    x << rng.uniform(-2, 2), rng.uniform(-2, 2);
  }
  return x;
}

inline PipelineData build_data(const ExperimentConfig& cfg) {
  PipelineData data;
  if (!cfg.input_csv.empty()) {
    if (cfg.embed)
      throw ConfigError("config: [embedding] applies to simulated trajectories, not file input");
    data.pair = load_snapshots(cfg.input_csv);
    if (!cfg.weights_file.empty())
      data.pair.weights = load_weights(cfg.weights_file, data.pair.samples());
    if (cfg.noise_level > 0) {
      data.pair.X = add_sensor_noise(data.pair.X.real(), cfg.noise_level, cfg.noise_seed)
                        .cast<Complex>();
      data.pair.Y = add_sensor_noise(data.pair.Y.real(), cfg.noise_level, cfg.noise_seed + 1)
                        .cast<Complex>();
    }
    // single-trajectory reconstruction for methods that work on the raw series
    data.trajectory.resize(data.pair.dim(), data.pair.samples() + 1);
    data.trajectory << data.pair.X.real(), data.pair.Y.rightCols(1).real();
    data.times = RealVector::LinSpaced(data.trajectory.cols(), 0.0,
                                       cfg.dt * static_cast<double>(data.trajectory.cols() - 1));
    return data;
  }
  if (cfg.system == "torus") {
    LinearSpectralSystem sys = make_torus_system(cfg.grid, cfg.mode_pairs, cfg.dt, cfg.seed);
    ControlTrajectory traj = sample_controlled_trajectory(sys, cfg.steps, cfg.seed + 1);
    RealMatrix x = traj.X, y = traj.Y;
    if (cfg.noise_level > 0) {
      x = add_sensor_noise(x, cfg.noise_level, cfg.noise_seed);
      y = add_sensor_noise(y, cfg.noise_level, cfg.noise_seed + 1);
    }
    data.control.X = x.cast<Complex>();
    data.control.Y = y.cast<Complex>();
    data.control.U = traj.U.cast<Complex>();
    data.has_control = true;
    data.pair.X = data.control.X;
    data.pair.Y = data.control.Y;
    data.pair.weights = RealVector::Constant(x.cols(), 1.0 / static_cast<double>(x.cols()));
    data.trajectory.resize(x.rows(), x.cols() + 1);
    data.trajectory << x, y.rightCols(1);
    data.times = RealVector::LinSpaced(x.cols() + 1, 0.0, cfg.dt * static_cast<double>(x.cols()));
    return data;
  }

  OdeSystem sys = system_by_name(cfg.system);
  TrajectoryConfig tc;
  tc.dt = cfg.dt;
  tc.steps = cfg.steps;
  tc.burn_in = cfg.burn_in;
  tc.seed = cfg.seed;
  if (!cfg.initial.empty()) {
    tc.initial = Eigen::Map<const RealVector>(cfg.initial.data(),
                                              static_cast<Index>(cfg.initial.size()));
    if (tc.initial.size() != sys.dim)
      throw ConfigError("config: sampling.initial has wrong dimension for " + cfg.system);
  } else {
    tc.initial = default_initial(cfg.system, cfg.seed);
  }
  RealMatrix traj = sample_trajectory(sys, tc, cfg.substeps);
  if (cfg.noise_level > 0) traj = add_sensor_noise(traj, cfg.noise_level, cfg.noise_seed);
  data.trajectory = traj;
  data.times = RealVector::LinSpaced(traj.cols(), 0.0, cfg.dt * static_cast<double>(traj.cols() - 1));

  if (cfg.embed) {
    DelaySpec spec;
    spec.delays = cfg.delays;
    spec.stride = cfg.stride;
    spec.mode = cfg.embed_mode == "scalar" ? DelayMode::Scalar : DelayMode::FullState;
    data.pair = delay_embed_state(traj, spec);
  } else {
    data.pair = pairs_from_trajectory(traj);
  }
  if (!cfg.weights_file.empty())
    data.pair.weights = load_weights(cfg.weights_file, data.pair.samples());
  return data;
}

inline Dictionary dictionary_by_key(const std::string& key, const SnapshotPair& pair,
                                    std::uint64_t seed) {
  if (key == "linear") return linear_dictionary(pair.dim());
  if (key.rfind("rbf:", 0) == 0) {
    const Index n = detail::parse_int(key.substr(4), "dictionary.key rbf:N");
    return rbf_dictionary(pair.X.real(), n, seed);
  }
  if (key.rfind("fourier:", 0) == 0) {
    const Index k = detail::parse_int(key.substr(8), "dictionary.key fourier:K");
    return fourier_dictionary(k);
  }
  throw ConfigError("config: unknown dictionary key '" + key + "'");
}

/// EdmdMatrices for the configured dictionary. "delay:N" builds the Hankel
/// dictionary of the first state coordinate instead of evaluating functions.
inline EdmdMatrices matrices_for(const ExperimentConfig& cfg, const PipelineData& data) {
  if (cfg.dictionary.rfind("delay:", 0) == 0) {
    const Index n = detail::parse_int(cfg.dictionary.substr(6), "dictionary.key delay:N");
    RealVector series = data.trajectory.row(0).transpose();
    auto [px, py] = hankel_embed(series, n);
    const Index m = px.rows();
    return assemble_from_features(px, py,
                                  RealVector::Constant(m, 1.0 / static_cast<double>(m)),
                                  Matrix(px.transpose().cast<Complex>()));
  }
  return assemble(data.pair, dictionary_by_key(cfg.dictionary, data.pair, cfg.dictionary_seed));
}

}  // namespace detail

/// Executes the configured pipeline and writes the CSV artifacts and a
/// manifest. Any stage failure removes partial artifacts and rethrows with
/// the stage named.
inline Manifest run(const ExperimentConfig& cfg, const std::string& config_text = "") {
  const auto t0 = std::chrono::steady_clock::now();
  Manifest manifest;
  manifest.config_hash = detail::hex64(detail::fnv1a64(config_text));
  detail::ArtifactWriter writer(cfg.out_dir);
  std::string stage = "data";
  try {
    detail::PipelineData data = detail::build_data(cfg);
    stage = "method:" + cfg.method;
    const std::string& m = cfg.method;

    if (m == "exact" || m == "fb" || m == "tls" || m == "rdmd" || m == "cdmd") {
      DmdResult res;
      if (m == "exact")
        res = exact_dmd(data.pair, cfg.rank);
      else if (m == "fb")
        res = fbdmd(data.pair, cfg.rank);
      else if (m == "tls")
        res = tlsdmd(data.pair, cfg.rank);
      else if (m == "rdmd") {
        RdmdOptions opt;
        opt.oversample = cfg.oversample;
        opt.power_iters = cfg.power;
        res = rdmd(data.pair, cfg.rank, cfg.method_seed, opt);
      } else {
        const Index p = cfg.compress_dim > 0 ? cfg.compress_dim : 4 * cfg.rank;
        CompressionOperators ops = gaussian_compression(p, data.pair.dim(), cfg.method_seed);
        res = cdmd(data.pair, ops.C, cfg.rank);
      }
      auto os = writer.open("eigs.csv");
      detail::write_eigs_csv(os, res.eigenvalues, cfg.dt, false);
    } else if (m == "opt") {
      DmdResult res = optdmd(data.trajectory.cast<Complex>(), data.times, cfg.rank);
      auto os = writer.open("eigs.csv");
      detail::write_eigs_csv(os, res.eigenvalues, cfg.dt, true);
    } else if (m == "dmdc") {
      if (!data.has_control) throw ConfigError("dmdc requires the torus system");
      const Index p = cfg.input_rank > 0 ? cfg.input_rank : cfg.rank + 1;
      auto [res, btilde] = dmdc(data.control, p, cfg.rank);
      auto os = writer.open("eigs.csv");
      detail::write_eigs_csv(os, res.eigenvalues, cfg.dt, false);
    } else if (m == "csdmd") {
      const Index p = cfg.compress_dim > 0 ? cfg.compress_dim : data.pair.dim() / 4;
      CompressionOperators ops = gaussian_compression(p, data.pair.dim(), cfg.method_seed);
      ops.B = dft_matrix(data.pair.dim()).adjoint();
      const Index s = cfg.sparsity > 0 ? cfg.sparsity : std::max<Index>(1, p / 8);
      CsDmdResult res = csdmd(Matrix(ops.C * data.pair.X), Matrix(ops.C * data.pair.Y), ops,
                              cfg.rank, s);
      auto os = writer.open("eigs.csv");
      detail::write_eigs_csv(os, res.dmd.eigenvalues, cfg.dt, false);
    } else if (m.rfind("pidmd-", 0) == 0) {
      ManifoldKind kind;
      const std::string which = m.substr(6);
      if (which == "orthogonal")
        kind = ManifoldKind::Orthogonal;
      else if (which == "symmetric")
        kind = ManifoldKind::Symmetric;
      else if (which == "causal")
        kind = ManifoldKind::Causal;
      else
        kind = ManifoldKind::Circulant;
      PiDmdResult res = pidmd(data.pair, kind);
      auto os = writer.open("eigs.csv");
      detail::write_eigs_csv(os, res.dmd.eigenvalues, cfg.dt, false);
    } else if (m == "mrdmd") {
      MrDmdOptions opt;
      opt.rho = cfg.rho;
      opt.max_modes = cfg.max_modes;
      MrDmdNode tree = mrdmd(data.trajectory.cast<Complex>(), cfg.dt, cfg.levels, opt);
      auto os = writer.open("mrdmd_modes.csv");
      os << "level,bin,t_start,t_end,eta_re,eta_im,amp_re,amp_im\n";
      std::vector<const MrDmdNode*> nodes;
      for (int lvl = 1; lvl <= cfg.levels; ++lvl) mrdmd_level_nodes(tree, lvl, nodes);
      for (const MrDmdNode* node : nodes)
        for (Index k = 0; k < node->slow.mode_count(); ++k)
          os << node->level << ',' << node->bin << ',' << detail::format_full(node->t_start)
             << ',' << detail::format_full(node->t_end) << ','
             << detail::format_full(node->slow.eigenvalues(k).real()) << ','
             << detail::format_full(node->slow.eigenvalues(k).imag()) << ','
             << detail::format_full(node->slow.amplitudes(k).real()) << ','
             << detail::format_full(node->slow.amplitudes(k).imag()) << '\n';
    } else if (m == "hankel") {
      RealVector series = data.trajectory.row(0).transpose();
      DmdResult res = hankel_dmd(series, cfg.window, cfg.rank);
      auto os = writer.open("eigs.csv");
      detail::write_eigs_csv(os, res.eigenvalues, cfg.dt, false);
    } else if (m == "havok") {
      RealVector series = data.trajectory.row(0).transpose();
      HavokModel model = havok(series, cfg.window, cfg.rank, cfg.dt);
      auto os = writer.open("havok_forcing.csv");
      os << "v_r\n";
      for (Index i = 0; i < model.v_r_series.size(); ++i)
        os << detail::format_full(model.v_r_series(i)) << '\n';
      auto ks = writer.open("havok_model.csv");
      ks << "row,col,k,b\n";
      for (Index i = 0; i < model.K_lin.rows(); ++i)
        for (Index j = 0; j < model.K_lin.cols(); ++j)
          ks << i << ',' << j << ',' << detail::format_full(model.K_lin(i, j)) << ','
             << detail::format_full(j == 0 ? model.B_force(i, 0) : 0.0) << '\n';
    } else if (m == "edmd" || m == "mpedmd" || m == "resdmd" || m == "pseudospec") {
      EdmdMatrices mats = detail::matrices_for(cfg, data);
      if (m == "edmd") {
        EdmdResult res = edmd(mats);
        auto os = writer.open("eigs.csv");
        detail::write_eigs_csv(os, res.eigenvalues, cfg.dt, false);
        // eigenfunction samples at the snapshots for the leading modes
        auto fs = writer.open("eigenfunctions.csv");
        const Index show = std::min<Index>(res.eigenvalues.size(), 8);
        fs << "sample";
        for (Index c = 0; c < mats.states.rows(); ++c) fs << ",x" << c;
        for (Index j = 0; j < show; ++j) fs << ",g" << j << "_re,g" << j << "_im";
        fs << '\n';
        Matrix values(mats.samples(), show);
        if (mats.real_features) {
          values.real() = mats.PsiXr * res.right_vectors.leftCols(show).real();
          values.imag() = mats.PsiXr * res.right_vectors.leftCols(show).imag();
        } else {
          values = mats.PsiX * res.right_vectors.leftCols(show);
        }
        for (Index i = 0; i < mats.samples(); ++i) {
          fs << i;
          for (Index c = 0; c < mats.states.rows(); ++c)
            fs << ',' << detail::format_full(mats.states(c, i).real());
          for (Index j = 0; j < show; ++j)
            fs << ',' << detail::format_full(values(i, j).real()) << ','
               << detail::format_full(values(i, j).imag());
          fs << '\n';
        }
      } else if (m == "mpedmd") {
        MpEdmdResult res = mpedmd(mats);
        auto os = writer.open("mpedmd_eigs.csv");
        os << "re,im\n";
        for (Index j = 0; j < res.eigenvalues.size(); ++j)
          os << detail::format_full(res.eigenvalues(j).real()) << ','
             << detail::format_full(res.eigenvalues(j).imag()) << '\n';
        // spectral measure of the first dictionary element
        Vector g = Vector::Zero(mats.observables());
        g(0) = 1;
        SpectralMeasure mu = spectral_measure(res, g);
        auto cs = writer.open("measure_cdf.csv");
        cs << "theta,F\n";
        for (const auto& atom : mu.atoms) {
          cs << detail::format_full(atom.theta) << ','
             << detail::format_full(measure_cdf(mu, atom.theta)) << '\n';
        }
      } else if (m == "resdmd") {
        EdmdResult ed = edmd(mats);
        ResidualReport rep = residuals(mats, ed.eigenvalues, ed.right_vectors);
        auto os = writer.open("eigs_residuals.csv");
        os << "re,im,res\n";
        for (Index j = 0; j < rep.eigenvalues.size(); ++j)
          os << detail::format_full(rep.eigenvalues(j).real()) << ','
             << detail::format_full(rep.eigenvalues(j).imag()) << ','
             << detail::format_full(rep.residuals(j)) << '\n';
      } else {
        Vector grid = box_grid(cfg.grid_re_min, cfg.grid_re_max, cfg.grid_im_min, cfg.grid_im_max,
                               cfg.grid_nx, cfg.grid_ny);
        PseudospectrumGrid ps = pseudospectrum(mats, grid, cfg.eps);
        auto os = writer.open("pseudospec.csv");
        os << "re,im,tau\n";
        for (Index l = 0; l < grid.size(); ++l)
          os << detail::format_full(grid(l).real()) << ',' << detail::format_full(grid(l).imag())
             << ',' << detail::format_full(ps.tau(l)) << '\n';
      }
    } else {
      throw ConfigError("config: method '" + m + "' is not runnable");
    }
  } catch (const ConfigError&) {
    writer.rollback();
    throw;
  } catch (const Error& e) {
    writer.rollback();
    throw NumericalError("pipeline stage '" + stage + "': " + e.what());
  }

  stage = "manifest";
  manifest.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
                         .count();
  writer.finalize(manifest);
  std::ofstream ms(writer.dir() / "manifest.txt");
  ms << "kmv-manifest v1\n";
  ms << "config_hash: " << manifest.config_hash << '\n';
  ms << "seeds: sampling=" << cfg.seed << " dictionary=" << cfg.dictionary_seed
     << " method=" << cfg.method_seed << " noise=" << cfg.noise_seed << '\n';
  ms << "version: kmv 0.1.0\n";
  ms << "wall_time_ms: " << manifest.wall_ms << '\n';
  for (const auto& [name, hash] : manifest.artifacts) ms << "artifact: " << name << ' ' << hash
                                                         << '\n';
  return manifest;
}

}  // namespace kmv
