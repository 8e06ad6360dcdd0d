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

#include <functional>
#include <map>
#include <mutex>
#include <string>
#include <vector>

#include "kmv/core.hpp"
#include "kmv/linalg.hpp"

namespace kmv {

// Built-in dynamical systems and trajectory sampling. All data used by the
// tests and the experiment harness is generated here.

struct OdeSystem {
  Index dim = 0;
  std::function<RealVector(const RealVector&)> field;
  std::string name;
};

struct TrajectoryConfig {
  double dt = 0.01;
  Index steps = 1;
  Index burn_in = 0;
  RealVector initial;
  std::uint64_t seed = 0;  // reserved for random initial draws
};

/// One classical fourth-order Runge-Kutta step.
inline RealVector rk4_step(const OdeSystem& sys, const RealVector& x, double dt) {
  if (dt <= 0) throw InputError("rk4_step: dt must be positive");
  const RealVector k1 = sys.field(x);
  const RealVector k2 = sys.field(x + 0.5 * dt * k1);
  const RealVector k3 = sys.field(x + 0.5 * dt * k2);
  const RealVector k4 = sys.field(x + dt * k3);
  RealVector out = x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  if (!out.allFinite())
    throw NumericalError("rk4_step: non-finite state integrating " + sys.name);
  return out;
}

/// Samples a trajectory at times 0, dt, ..., steps*dt after discarding
/// burn_in samples. Each output step is integrated with `substeps` internal
/// RK4 steps of size dt/substeps.
inline RealMatrix sample_trajectory(const OdeSystem& sys, const TrajectoryConfig& cfg,
                                    Index substeps = 1) {
  if (cfg.dt <= 0 || cfg.steps < 1 || cfg.burn_in < 0 || substeps < 1)
    throw InputError("sample_trajectory: need dt > 0, steps >= 1, burn_in >= 0, substeps >= 1");
  if (cfg.initial.size() != sys.dim)
    throw DimensionError("sample_trajectory: initial condition has wrong dimension");
  const double h = cfg.dt / static_cast<double>(substeps);
  RealVector x = cfg.initial;
  auto advance = [&](RealVector& state) {
    for (Index s = 0; s < substeps; ++s) state = rk4_step(sys, state, h);
  };
  for (Index b = 0; b < cfg.burn_in; ++b) advance(x);
  RealMatrix traj(sys.dim, cfg.steps + 1);
  traj.col(0) = x;
  for (Index n = 0; n < cfg.steps; ++n) {
    advance(x);
    traj.col(n + 1) = x;
  }
  return traj;
}

inline OdeSystem lorenz() {
  OdeSystem sys;
  sys.dim = 3;
  sys.name = "lorenz";
  sys.field = [](const RealVector& x) {
    RealVector f(3);
    f(0) = 10.0 * (x(1) - x(0));
    f(1) = x(0) * (28.0 - x(2)) - x(1);
    f(2) = x(0) * x(1) - 8.0 * x(2) / 3.0;
    return f;
  };
  return sys;
}

inline OdeSystem duffing(bool damped) {
  OdeSystem sys;
  sys.dim = 2;
  sys.name = damped ? "duffing-damped" : "duffing";
  sys.field = [damped](const RealVector& x) {
    RealVector f(2);
    f(0) = x(1);
    f(1) = (damped ? -0.5 * x(1) : 0.0) + x(0) - x(0) * x(0) * x(0);
    return f;
  };
  return sys;
}

inline OdeSystem rossler() {
  OdeSystem sys;
  sys.dim = 3;
  sys.name = "rossler";
  sys.field = [](const RealVector& x) {
    RealVector f(3);
    f(0) = -x(1) - x(2);
    f(1) = x(0) + 0.1 * x(1);
    f(2) = 0.1 + x(2) * (x(0) - 14.0);
    return f;
  };
  return sys;
}

/// One spectral mode of the actuated lattice system: a flattened grid index,
/// the continuous eigenvalue eta (discrete eigenvalue is exp(eta*dt)) and the
/// actuation coefficient in transform space.
struct SpectralMode {
  Index row = 0;
  Index col = 0;
  Complex eta{0, 0};
  Complex input{0, 0};
};

/// Diagonal linear system on an n x n periodic grid, evolved in 2-D Fourier
/// space with a scalar input: xhat_{k+1} = Ahat xhat_k + Bhat u_k. The state
/// in physical space is the flattened real grid.
struct LinearSpectralSystem {
  Index grid = 0;
  std::vector<SpectralMode> modes;
  double dt = 0.01;
  bool real_output = true;
};

namespace detail {

/// DFT matrices are reused across steps; building one per call would
/// dominate the cost of stepping small grids.
inline const Matrix& cached_dft(Index n) {
  static std::mutex mu;
  static std::map<Index, Matrix> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, dft_matrix(n)).first;
  return it->second;
}

inline void check_conjugate_symmetry(const LinearSpectralSystem& sys) {
  const Index n = sys.grid;
  for (const SpectralMode& m : sys.modes) {
    const Index cr = (n - m.row) % n;
    const Index cc = (n - m.col) % n;
    bool found = false;
    for (const SpectralMode& other : sys.modes) {
      if (other.row == cr && other.col == cc &&
          std::abs(other.eta - std::conj(m.eta)) <= 1e-12 * (1.0 + std::abs(m.eta)) &&
          std::abs(other.input - std::conj(m.input)) <= 1e-12 * (1.0 + std::abs(m.input))) {
        found = true;
        break;
      }
    }
    if (!found)
      throw ConfigError("LinearSpectralSystem: mode list is not conjugate-symmetric but real "
                        "output was requested");
  }
}

}  // namespace detail

/// Builds the desk-scale torus benchmark: `pairs` conjugate mode pairs at
/// distinct grid indices, frequencies in [1, 10] rad/s and dampings in
/// [0.01, 0.1], all drawn from the seed.
inline LinearSpectralSystem make_torus_system(Index grid, Index pairs, double dt,
                                              std::uint64_t seed) {
  if (grid < 4 || pairs < 1 || 2 * pairs > (grid / 2 - 1) * (grid / 2 - 1))
    throw ConfigError("make_torus_system: grid too small for requested mode pairs");
  LinearSpectralSystem sys;
  sys.grid = grid;
  sys.dt = dt;
  Rng rng(seed);
  std::vector<std::pair<Index, Index>> used;
  while (static_cast<Index>(sys.modes.size()) < 2 * pairs) {
    // indices in [1, grid/2-1]^2 are never self-conjugate
    Index r = 1 + static_cast<Index>(rng.uniform_index(static_cast<std::uint64_t>(grid / 2 - 1)));
    Index c = 1 + static_cast<Index>(rng.uniform_index(static_cast<std::uint64_t>(grid / 2 - 1)));
    bool dup = false;
    for (auto& u : used) dup = dup || (u.first == r && u.second == c);
    if (dup) continue;
    used.emplace_back(r, c);
    const double omega = rng.uniform(1.0, 10.0);
    const double gamma = rng.uniform(0.01, 0.1);
    const double phase = rng.uniform(0.0, 2.0 * M_PI);
    SpectralMode m;
    m.row = r;
    m.col = c;
    m.eta = Complex(-gamma, omega);
    m.input = std::polar(1.0, phase);
    sys.modes.push_back(m);
    SpectralMode conj = m;
    conj.row = (grid - r) % grid;
    conj.col = (grid - c) % grid;
    conj.eta = std::conj(m.eta);
    conj.input = std::conj(m.input);
    sys.modes.push_back(conj);
  }
  detail::check_conjugate_symmetry(sys);
  return sys;
}

/// Applies one step of the actuated diagonal update in 2-D Fourier space and
/// transforms back to the physical grid.
inline RealVector linear_spectral_step(const LinearSpectralSystem& sys, const RealVector& x,
                                       double u) {
  const Index n = sys.grid;
  if (x.size() != n * n) throw DimensionError("linear_spectral_step: state length must be grid^2");
  if (sys.real_output) detail::check_conjugate_symmetry(sys);
  const Matrix& f = detail::cached_dft(n);
  Matrix grid_state = Eigen::Map<const RealMatrix>(x.data(), n, n).cast<Complex>();
  Matrix xhat = f * grid_state * f;  // F is symmetric, so F X F is the 2-D DFT
  Matrix next = Matrix::Zero(n, n);
  for (const SpectralMode& m : sys.modes) {
    const Complex lambda = std::exp(m.eta * sys.dt);
    next(m.row, m.col) = lambda * xhat(m.row, m.col) + m.input * u;
  }
  Matrix back = f.conjugate() * next * f.conjugate();
  RealVector out(n * n);
  Eigen::Map<RealMatrix>(out.data(), n, n) = back.real();
  return out;
}

/// State/shifted-state/input triplet generated by driving a
/// LinearSpectralSystem with seeded Gaussian scalar inputs from rest.
struct ControlTrajectory {
  RealMatrix X;  // d x M
  RealMatrix Y;  // d x M
  RealMatrix U;  // 1 x M
};

inline ControlTrajectory sample_controlled_trajectory(const LinearSpectralSystem& sys, Index m,
                                                      std::uint64_t seed) {
  const Index d = sys.grid * sys.grid;
  Rng rng(seed);
  ControlTrajectory out;
  out.X.resize(d, m);
  out.Y.resize(d, m);
  out.U.resize(1, m);
  RealVector x = RealVector::Zero(d);
  for (Index k = 0; k < m; ++k) {
    const double u = rng.gaussian();
    out.X.col(k) = x;
    out.U(0, k) = u;
    x = linear_spectral_step(sys, x, u);
    out.Y.col(k) = x;
  }
  return out;
}

/// Additive Gaussian sensor noise with standard deviation
/// level * ||X||_F / sqrt(entry count), i.e. `level` relative to the RMS
/// entry magnitude. Deterministic per seed.
inline RealMatrix add_sensor_noise(const RealMatrix& x, double level, std::uint64_t seed) {
  if (level < 0) throw InputError("add_sensor_noise: level must be nonnegative");
  if (level == 0) return x;
  const double sigma = level * x.norm() / std::sqrt(static_cast<double>(x.size()));
  Rng rng(seed);
  RealMatrix out = x;
  for (Index j = 0; j < x.cols(); ++j)
    for (Index i = 0; i < x.rows(); ++i) out(i, j) += sigma * rng.gaussian();
  return out;
}

}  // namespace kmv
