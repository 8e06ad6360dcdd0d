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

#include <catch2/catch_amalgamated.hpp>

#include "helpers.hpp"
#include "kmv/compression.hpp"

using namespace kmv;
using kmv::test::max_eigenvalue_match_error;

namespace {

/// Synthetic pair of exact rank `modes.cols()`: x_{n+1} evolves each mode by
/// its eigenvalue.
SnapshotPair low_rank_pair(const Matrix& modes, const Vector& lambdas, Index m,
                           std::uint64_t seed) {
  Rng rng(seed);
  const Index r = modes.cols();
  Vector coeff(r);
  for (Index j = 0; j < r; ++j) coeff(j) = Complex(1.0 + rng.uniform(), rng.uniform() - 0.5);
  Matrix traj(modes.rows(), m + 1);
  for (Index k = 0; k <= m; ++k) {
    traj.col(k) = modes * coeff;
    coeff = coeff.cwiseProduct(lambdas);
  }
  SnapshotPair pair;
  pair.X = traj.leftCols(m);
  pair.Y = traj.rightCols(m);
  pair.weights = RealVector::Constant(m, 1.0 / static_cast<double>(m));
  return pair;
}

Vector spread_eigenvalues(Index r, std::uint64_t seed) {
  Rng rng(seed);
  Vector lam(r);
  for (Index j = 0; j < r; ++j)
    lam(j) = std::polar(0.9 + 0.1 * rng.uniform(), 0.2 + 2.5 * rng.uniform());
  return lam;
}

}  // namespace

TEST_CASE("range finder captures an exact low-rank range", "[compression]") {
  Matrix modes = kmv::test::random_complex(120, 5, 301);
  SnapshotPair pair = low_rank_pair(modes, spread_eigenvalues(5, 302), 40, 303);
  Matrix q = randomized_range_finder(pair.X, 5, 5, 0, 7);
  REQUIRE(q.cols() == 10);
  REQUIRE((pair.X - q * (q.adjoint() * pair.X)).norm() <= 1e-8 * pair.X.norm());
}

TEST_CASE("range finder on the identity captures the sampled fraction", "[compression]") {
  const Index d = 100, k = 20;
  Matrix x = Matrix::Identity(d, d);
  Matrix q = randomized_range_finder(x, 10, 10, 0, 11);
  const double captured = (q.adjoint() * x).squaredNorm() / x.squaredNorm();
  // isotropic spectrum: expect about (r+p)/d of the energy
  REQUIRE(captured == Catch::Approx(static_cast<double>(k) / d).margin(0.08));
}

TEST_CASE("power iterations sharpen slowly decaying spectra", "[compression]") {
  // singular values 1/k: slow decay
  const Index d = 80, m = 60, r = 5, p = 3;
  Matrix u = kmv::test::random_unitary(d, 311).leftCols(m);
  Matrix v = kmv::test::random_unitary(m, 312);
  RealVector s(m);
  for (Index i = 0; i < m; ++i) s(i) = 1.0 / static_cast<double>(i + 1);
  Matrix x = u * s.asDiagonal() * v.adjoint();

  int q2_wins = 0;
  std::vector<double> res0, res2;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Matrix q0 = randomized_range_finder(x, r, p, 0, 1000 + seed);
    Matrix q2 = randomized_range_finder(x, r, p, 2, 1000 + seed);
    const double e0 = (x - q0 * (q0.adjoint() * x)).norm();
    const double e2 = (x - q2 * (q2.adjoint() * x)).norm();
    res0.push_back(e0);
    res2.push_back(e2);
    if (e2 < e0) ++q2_wins;
  }
  REQUIRE(q2_wins == 20);  // strict improvement on every seed

  auto median = [](std::vector<double> v) {
    std::sort(v.begin(), v.end());
    return v[v.size() / 2];
  };
  REQUIRE(median(res2) < median(res0));
}

TEST_CASE("rdmd agrees with exact DMD on low-rank data", "[compression]") {
  Matrix modes = kmv::test::random_complex(200, 10, 321);
  Vector lam = spread_eigenvalues(10, 322);
  SnapshotPair pair = low_rank_pair(modes, lam, 60, 323);
  DmdResult rd = rdmd(pair, 10, 99);
  DmdResult ex = exact_dmd(pair, 10);
  REQUIRE(max_eigenvalue_match_error(rd.eigenvalues, ex.eigenvalues) < 1e-8);

  // identity dynamics: eigenvalue 1 with multiplicity r
  SnapshotPair same;
  same.X = kmv::test::random_complex(50, 30, 324);
  same.Y = same.X;
  same.weights = RealVector::Constant(30, 1.0 / 30.0);
  DmdResult id = rdmd(same, 4, 5);
  for (Index j = 0; j < 4; ++j) REQUIRE(std::abs(id.eigenvalues(j) - Complex(1, 0)) < 1e-8);

  // determinism per seed
  DmdResult again = rdmd(pair, 10, 99);
  REQUIRE(again.eigenvalues == rd.eigenvalues);
  REQUIRE(again.modes == rd.modes);
}

TEST_CASE("cdmd is exactly invariant under unitary compression", "[compression]") {
  Matrix modes = kmv::test::random_complex(40, 4, 331);
  SnapshotPair pair = low_rank_pair(modes, spread_eigenvalues(4, 332), 30, 333);
  Matrix c = kmv::test::random_unitary(40, 334);
  DmdResult comp = cdmd(pair, c, 4);
  DmdResult ex = exact_dmd(pair, 4);
  REQUIRE(max_eigenvalue_match_error(comp.eigenvalues, ex.eigenvalues) < 1e-10);
}

TEST_CASE("cdmd with Gaussian measurements recovers rank-r spectra", "[compression]") {
  const Index d = 128, r = 3;
  Matrix modes = kmv::test::random_complex(d, r, 341);
  Vector lam = spread_eigenvalues(r, 342);
  SnapshotPair pair = low_rank_pair(modes, lam, 40, 343);
  DmdResult ex = exact_dmd(pair, r);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    CompressionOperators ops = gaussian_compression(4 * r, d, 2000 + seed);
    DmdResult comp = cdmd(pair, ops.C, r);
    REQUIRE(max_eigenvalue_match_error(comp.eigenvalues, ex.eigenvalues) <= 1e-6);
  }

  // a single measurement row cannot carry rank-2 dynamics
  SnapshotPair two = low_rank_pair(kmv::test::random_complex(d, 2, 344),
                                   spread_eigenvalues(2, 345), 30, 346);
  Matrix row = kmv::test::random_complex(1, d, 347);
  REQUIRE_THROWS_AS(cdmd(two, row, 2), RankError);
}

TEST_CASE("csdmd recovers planted sparse modes from compressed data", "[compression]") {
  const Index d = 64, p = 32, s = 3, r = 2;
  Rng rng(351);
  Matrix b = dft_matrix(d).adjoint();  // columns: inverse-DFT basis
  Matrix phi_s = Matrix::Zero(d, r);
  for (Index j = 0; j < r; ++j)
    for (Index pick = 0; pick < s; ++pick) {
      Index at = static_cast<Index>(rng.uniform_index(d));
      phi_s(at, j) = Complex(rng.gaussian(), rng.gaussian());
    }
  Matrix modes = b * phi_s;
  Vector lam = spread_eigenvalues(r, 352);
  SnapshotPair pair = low_rank_pair(modes, lam, 40, 353);

  CompressionOperators ops = gaussian_compression(p, d, 354);
  ops.B = b;
  CsDmdResult rec = csdmd(Matrix(ops.C * pair.X), Matrix(ops.C * pair.Y), ops, r, s);
  REQUIRE(max_eigenvalue_match_error(rec.dmd.eigenvalues, lam) < 1e-8);
  REQUIRE(subspace_angle(rec.dmd.modes, modes) <= 1e-3);

  // p = d with identity operators reduces to exact DMD modes
  CompressionOperators ident;
  ident.C = Matrix::Identity(d, d);
  ident.B = Matrix::Identity(d, d);
  CsDmdResult full = csdmd(pair.X, pair.Y, ident, r, d);
  DmdResult ex = exact_dmd(pair, r);
  REQUIRE(subspace_angle(full.dmd.modes, ex.modes) <= 1e-8);

  // zero data: zero modes
  CsDmdResult zero = csdmd(Matrix(Matrix::Zero(p, 10)), Matrix(Matrix::Zero(p, 10)), ops, r, s);
  REQUIRE(zero.dmd.mode_count() == 0);
}
