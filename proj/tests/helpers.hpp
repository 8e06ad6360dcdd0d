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

#include <algorithm>
#include <vector>

#include "kmv/core.hpp"
#include "kmv/linalg.hpp"

namespace kmv::test {

inline Matrix random_complex(Index rows, Index cols, std::uint64_t seed) {
  Rng rng(seed);
  return complex_gaussian_matrix(rows, cols, rng);
}

inline RealMatrix random_real(Index rows, Index cols, std::uint64_t seed) {
  Rng rng(seed);
  return gaussian_matrix(rows, cols, rng);
}

inline Matrix random_unitary(Index n, std::uint64_t seed) {
  return economy_qr(random_complex(n, n, seed)).Q;
}

inline RealMatrix random_orthogonal(Index n, std::uint64_t seed) {
  Matrix q = economy_qr(random_real(n, n, seed).cast<Complex>()).Q;
  return q.real();
}

/// Spectral norm through the symmetric eigensolver, independent of the SVD
/// machinery under test.
inline double spectral_norm_oracle(const Matrix& a) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(Matrix(a.adjoint() * a), Eigen::EigenvaluesOnly);
  return std::sqrt(std::max(0.0, es.eigenvalues().maxCoeff()));
}

/// Greedy minimal-distance matching between computed and reference
/// eigenvalue sets; returns the mean matched distance.
inline double eigenvalue_match_error(const Vector& computed, const Vector& reference) {
  std::vector<bool> used(static_cast<size_t>(computed.size()), false);
  double total = 0;
  for (Index i = 0; i < reference.size(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    Index best_j = -1;
    for (Index j = 0; j < computed.size(); ++j) {
      if (used[static_cast<size_t>(j)]) continue;
      const double d = std::abs(computed(j) - reference(i));
      if (d < best) {
        best = d;
        best_j = j;
      }
    }
    used[static_cast<size_t>(best_j)] = true;
    total += best;
  }
  return total / static_cast<double>(reference.size());
}

inline double max_eigenvalue_match_error(const Vector& computed, const Vector& reference) {
  std::vector<bool> used(static_cast<size_t>(computed.size()), false);
  double worst = 0;
  for (Index i = 0; i < reference.size(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    Index best_j = -1;
    for (Index j = 0; j < computed.size(); ++j) {
      if (used[static_cast<size_t>(j)]) continue;
      const double d = std::abs(computed(j) - reference(i));
      if (d < best) {
        best = d;
        best_j = j;
      }
    }
    used[static_cast<size_t>(best_j)] = true;
    worst = std::max(worst, best);
  }
  return worst;
}

}  // namespace kmv::test
