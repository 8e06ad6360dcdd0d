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

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>

namespace kmv {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealMatrix = Eigen::MatrixXd;
using RealVector = Eigen::VectorXd;
using Index = Eigen::Index;

inline constexpr double kEps = std::numeric_limits<double>::epsilon();

/// Base class for all errors thrown by the library.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Shape mismatches and out-of-range sizes.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Non-finite entries or otherwise inadmissible input values.
class InputError : public Error {
 public:
  using Error::Error;
};

/// Numerical rank below what an operation requires.
class RankError : public Error {
 public:
  using Error::Error;
};

/// Iterative or factorization failure.
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// Matrix-function branch cut hit (eigenvalue on the closed negative axis).
class BranchError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// Invalid experiment/pipeline configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Malformed file contents.
class ParseError : public Error {
 public:
  using Error::Error;
};

template <typename Derived>
bool all_finite(const Eigen::MatrixBase<Derived>& a) {
  return a.allFinite();
}

template <typename Derived>
void require_finite(const Eigen::MatrixBase<Derived>& a, const char* what) {
  if (!a.allFinite()) throw InputError(std::string(what) + ": non-finite entries");
}

/// Seeded random stream. Gaussian draws use Box-Muller on top of raw
/// mt19937_64 output so results do not depend on the standard library's
/// distribution implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed ? seed : 0x9e3779b97f4a7c15ull) {}

  std::uint64_t next() {
    // xorshift-multiply step to decorrelate, then advance mt-like LCG mix.
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  /// Uniform double in [0, 1).
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  /// Uniform double in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, n).
  std::uint64_t uniform_index(std::uint64_t n) {
    // rejection sampling, no modulo bias
    std::uint64_t bound = n * (UINT64_MAX / n);
    std::uint64_t x;
    do {
      x = next();
    } while (x >= bound);
    return x % n;
  }

  /// Standard normal draw.
  double gaussian() {
    if (have_cached_) {
      have_cached_ = false;
      return cached_;
    }
    double u1, u2;
    do {
      u1 = uniform();
    } while (u1 <= 0.0);
    u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * M_PI * u2;
    cached_ = r * std::sin(theta);
    have_cached_ = true;
    return r * std::cos(theta);
  }

 private:
  std::uint64_t state_;
  bool have_cached_ = false;
  double cached_ = 0.0;
};

inline RealMatrix gaussian_matrix(Index rows, Index cols, Rng& rng) {
  RealMatrix g(rows, cols);
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i) g(i, j) = rng.gaussian();
  return g;
}

inline Matrix complex_gaussian_matrix(Index rows, Index cols, Rng& rng) {
  Matrix g(rows, cols);
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i) g(i, j) = Complex(rng.gaussian(), rng.gaussian()) / std::sqrt(2.0);
  return g;
}

}  // namespace kmv
