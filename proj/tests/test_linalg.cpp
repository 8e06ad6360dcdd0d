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
#include "kmv/linalg.hpp"

using namespace kmv;
using kmv::test::random_complex;
using kmv::test::random_unitary;
using kmv::test::spectral_norm_oracle;

TEST_CASE("truncated_svd identity and rank-1 cases", "[linalg]") {
  SvdResult id = truncated_svd(Matrix::Identity(4, 4), 4);
  for (Index i = 0; i < 4; ++i) REQUIRE(id.S(i) == Catch::Approx(1.0).margin(1e-14));

  Vector u = random_complex(5, 1, 11).col(0);
  Vector v = random_complex(3, 1, 12).col(0);
  u *= 2.0 / u.norm();
  v *= 3.0 / v.norm();
  Matrix a = u * v.adjoint();
  SvdResult rank1 = truncated_svd(a, 1);
  REQUIRE(rank1.S(0) == Catch::Approx(6.0).margin(1e-12));
}

TEST_CASE("truncated_svd matches the A*A symmetric eigensolver oracle", "[linalg]") {
  Matrix a = random_complex(6, 4, 21);
  SvdResult svd = truncated_svd(a, 4);
  Eigen::SelfAdjointEigenSolver<Matrix> es(Matrix(a.adjoint() * a));
  RealVector expected = es.eigenvalues().cwiseMax(0.0).cwiseSqrt().reverse();
  for (Index i = 0; i < 4; ++i) REQUIRE(std::abs(svd.S(i) - expected(i)) < 1e-10);
  // orthonormality contract
  REQUIRE(spectral_norm_oracle(svd.U.adjoint() * svd.U - Matrix::Identity(4, 4)) < 1e-10);
  REQUIRE(spectral_norm_oracle(svd.V.adjoint() * svd.V - Matrix::Identity(4, 4)) < 1e-10);
}

TEST_CASE("truncated_svd satisfies Eckart-Young", "[linalg]") {
  Matrix a = random_complex(8, 6, 31);
  for (Index r : {1, 3, 5}) {
    SvdResult svd = truncated_svd(a, r);
    SvdResult full = truncated_svd(a, 6);
    Matrix diff = a - svd.U * svd.S.asDiagonal().toDenseMatrix().cast<Complex>() * svd.V.adjoint();
    REQUIRE(spectral_norm_oracle(diff) ==
            Catch::Approx(full.S(r)).epsilon(1e-10).margin(1e-12));
  }
}

TEST_CASE("truncated_svd input contracts", "[linalg]") {
  REQUIRE_THROWS_AS(truncated_svd(Matrix::Identity(3, 3), 4), DimensionError);
  REQUIRE_THROWS_AS(truncated_svd(Matrix::Identity(3, 3), 0), DimensionError);
  Matrix bad = Matrix::Identity(3, 3);
  bad(1, 1) = Complex(std::nan(""), 0);
  REQUIRE_THROWS_AS(truncated_svd(bad, 2), InputError);
}

TEST_CASE("economy_qr basics", "[linalg]") {
  // orthonormal input reproduces itself under the positive-diagonal rule
  Matrix q0 = random_unitary(5, 41).leftCols(3);
  QrResult qr = economy_qr(q0);
  // positive-diagonal normalization makes R = I and Q = A exactly
  REQUIRE((qr.Q - q0).norm() < 1e-10);
  REQUIRE((qr.R - Matrix::Identity(3, 3)).norm() < 1e-10);

  Matrix a = Matrix::Zero(3, 2);
  a(0, 0) = 2;
  a(1, 1) = 3;
  QrResult qr2 = economy_qr(a);
  REQUIRE((qr2.R - a.topRows(2)).norm() < 1e-14);

  Matrix b = random_complex(8, 3, 42);
  QrResult qr3 = economy_qr(b);
  REQUIRE((b - qr3.Q * qr3.R).norm() <= 1e-12 * b.norm());
  for (Index i = 0; i < 3; ++i) {
    REQUIRE(qr3.R(i, i).imag() == 0.0);
    REQUIRE(qr3.R(i, i).real() > 0.0);
  }
}

TEST_CASE("economy_qr is deterministic and flags rank deficiency", "[linalg]") {
  Matrix a = random_complex(10, 4, 43);
  QrResult first = economy_qr(a);
  QrResult second = economy_qr(a);
  REQUIRE(first.Q == second.Q);
  REQUIRE(first.R == second.R);

  Matrix deficient(4, 2);
  deficient.col(0) = a.col(0).head(4);
  deficient.col(1) = 2.0 * a.col(0).head(4);
  REQUIRE_THROWS_AS(economy_qr(deficient), RankError);
}

TEST_CASE("eig on known spectra", "[linalg]") {
  Matrix d = Matrix::Zero(2, 2);
  d(0, 0) = 0.9;
  d(1, 1) = 0.5;
  EigResult ed = eig(d);
  REQUIRE(kmv::test::max_eigenvalue_match_error(ed.values, Vector{{Complex(0.9), Complex(0.5)}}) <
          1e-12);

  const double alpha = 0.7;
  Matrix rot(2, 2);
  rot << Complex(std::cos(alpha)), Complex(-std::sin(alpha)), Complex(std::sin(alpha)),
      Complex(std::cos(alpha));
  EigResult er = eig(rot);
  Vector expected{{std::polar(1.0, alpha), std::polar(1.0, -alpha)}};
  REQUIRE(kmv::test::max_eigenvalue_match_error(er.values, expected) < 1e-12);

  // companion matrix of z^3 - 1: roots are the cube roots of unity
  Matrix comp = Matrix::Zero(3, 3);
  comp(0, 2) = 1;
  comp(1, 0) = 1;
  comp(2, 1) = 1;
  EigResult ec = eig(comp);
  Vector roots{{Complex(1, 0), std::polar(1.0, 2 * M_PI / 3), std::polar(1.0, -2 * M_PI / 3)}};
  REQUIRE(kmv::test::max_eigenvalue_match_error(ec.values, roots) < 1e-10);
}

TEST_CASE("eig residual contract on random input", "[linalg]") {
  Matrix a = random_complex(7, 7, 51);
  EigResult ed = eig(a);
  const double scale = spectral_norm_oracle(a);
  for (Index j = 0; j < 7; ++j) {
    const double res = (a * ed.vectors.col(j) - ed.values(j) * ed.vectors.col(j)).norm();
    REQUIRE(res <= 1e-8 * scale * ed.vectors.col(j).norm());
  }
}

TEST_CASE("unitary_eig", "[linalg]") {
  EigResult id = unitary_eig(Matrix::Identity(3, 3));
  for (Index i = 0; i < 3; ++i) REQUIRE(std::abs(id.values(i) - Complex(1, 0)) < 1e-14);

  const double alpha = 0.3;
  Matrix rot(2, 2);
  rot << Complex(std::cos(alpha)), Complex(-std::sin(alpha)), Complex(std::sin(alpha)),
      Complex(std::cos(alpha));
  EigResult er = unitary_eig(rot);
  Vector expected{{std::polar(1.0, alpha), std::polar(1.0, -alpha)}};
  REQUIRE(kmv::test::max_eigenvalue_match_error(er.values, expected) < 1e-12);
  REQUIRE(spectral_norm_oracle(er.vectors.adjoint() * er.vectors - Matrix::Identity(2, 2)) <
          1e-10);

  Matrix u = random_unitary(12, 61);
  EigResult eu = unitary_eig(u);
  for (Index i = 0; i < 12; ++i) REQUIRE(std::abs(std::abs(eu.values(i)) - 1.0) <= 1e-12);
  REQUIRE(spectral_norm_oracle(eu.vectors.adjoint() * eu.vectors - Matrix::Identity(12, 12)) <
          1e-10);
  for (Index i = 0; i < 12; ++i) {
    const double res = (u * eu.vectors.col(i) - eu.values(i) * eu.vectors.col(i)).norm();
    REQUIRE(res < 1e-8);
  }

  REQUIRE_THROWS_AS(unitary_eig(Matrix(2.0 * Matrix::Identity(3, 3))), InputError);
}

TEST_CASE("pinv cases and Penrose identities", "[linalg]") {
  Matrix d = Matrix::Zero(2, 2);
  d(0, 0) = 2;
  Matrix dp = pinv(d);
  REQUIRE(std::abs(dp(0, 0) - Complex(0.5)) < 1e-14);
  REQUIRE(std::abs(dp(1, 1)) < 1e-14);

  Matrix q = random_unitary(6, 71).leftCols(3);
  REQUIRE((pinv(q) - q.adjoint()).norm() < 1e-12);

  Matrix a = random_complex(5, 3, 72);
  Matrix ap = pinv(a);
  const double scale = a.norm();
  REQUIRE((a * ap * a - a).norm() <= 1e-10 * scale);
  REQUIRE((ap * a * ap - ap).norm() <= 1e-10 * ap.norm());
  REQUIRE((Matrix(a * ap) - Matrix((a * ap).adjoint())).norm() <= 1e-10);
  REQUIRE((Matrix(ap * a) - Matrix((ap * a).adjoint())).norm() <= 1e-10);
}

TEST_CASE("smallest_singular_pair", "[linalg]") {
  Matrix d = Matrix::Zero(2, 2);
  d(0, 0) = 3;
  d(1, 1) = 1;
  auto [sigma, v] = smallest_singular_pair(d);
  REQUIRE(sigma == Catch::Approx(1.0).margin(1e-14));
  REQUIRE(std::abs(std::abs(v(1)) - 1.0) < 1e-14);

  // constructed kernel: third column is a combination of the first two
  Matrix a = random_complex(6, 2, 81);
  Matrix padded(6, 3);
  padded << a, a.col(0) + a.col(1);
  auto [sk, vk] = smallest_singular_pair(padded);
  REQUIRE(sk <= 1e-14 * padded.norm());

  Matrix b = random_complex(6, 4, 82);
  auto [sb, vb] = smallest_singular_pair(b);
  Eigen::SelfAdjointEigenSolver<Matrix> es(Matrix(b.adjoint() * b), Eigen::EigenvaluesOnly);
  REQUIRE(std::abs(sb - std::sqrt(std::max(0.0, es.eigenvalues().minCoeff()))) < 1e-12);
  REQUIRE(vb.norm() == Catch::Approx(1.0).margin(1e-12));
}

TEST_CASE("principal_sqrtm", "[linalg]") {
  REQUIRE((principal_sqrtm(Matrix::Identity(3, 3)) - Matrix::Identity(3, 3)).norm() < 1e-12);

  Matrix d = Matrix::Zero(2, 2);
  d(0, 0) = 4;
  d(1, 1) = 9;
  Matrix s = principal_sqrtm(d);
  REQUIRE(std::abs(s(0, 0) - Complex(2)) < 1e-12);
  REQUIRE(std::abs(s(1, 1) - Complex(3)) < 1e-12);

  // random diagonalizable matrix with spectrum in the right half-plane
  Rng rng(91);
  Matrix w = random_complex(6, 6, 92);
  Vector lam(6);
  for (Index i = 0; i < 6; ++i) lam(i) = Complex(0.2 + rng.uniform(), 2.0 * rng.uniform() - 1.0);
  Matrix a = w * lam.asDiagonal() * w.inverse();
  Matrix sq = principal_sqrtm(a);
  REQUIRE((sq * sq - a).norm() <= 1e-8 * a.norm());
  EigResult es = eig(sq);
  for (Index i = 0; i < 6; ++i) REQUIRE(es.values(i).real() > 0);

  Matrix neg = Matrix::Identity(2, 2);
  neg(0, 0) = -1;
  REQUIRE_THROWS_AS(principal_sqrtm(neg), BranchError);
}

TEST_CASE("kmeans trivial and blob cases", "[linalg]") {
  RealMatrix pts = kmv::test::random_real(6, 2, 101);
  RealMatrix centers = kmeans(pts, 6, 7);
  // k = M: centers are the points in some order
  for (Index i = 0; i < 6; ++i) {
    double best = 1e300;
    for (Index c = 0; c < 6; ++c) best = std::min(best, (centers.row(c) - pts.row(i)).norm());
    REQUIRE(best < 1e-12);
  }

  RealMatrix single = kmeans(pts, 1, 7);
  REQUIRE((single.row(0) - pts.colwise().mean()).norm() < 1e-12);

  // two well-separated blobs
  Rng rng(103);
  RealMatrix blob(400, 2);
  for (Index i = 0; i < 200; ++i)
    blob.row(i) << 5.0 + 0.3 * rng.gaussian(), 5.0 + 0.3 * rng.gaussian();
  for (Index i = 200; i < 400; ++i)
    blob.row(i) << -5.0 + 0.3 * rng.gaussian(), -5.0 + 0.3 * rng.gaussian();
  RealMatrix two = kmeans(blob, 2, 11);
  RealVector mean_a = blob.topRows(200).colwise().mean();
  RealVector mean_b = blob.bottomRows(200).colwise().mean();
  const double d0a = (two.row(0).transpose() - mean_a).norm();
  const double d0b = (two.row(0).transpose() - mean_b).norm();
  const RealVector first = d0a < d0b ? mean_a : mean_b;
  const RealVector second = d0a < d0b ? mean_b : mean_a;
  REQUIRE((two.row(0).transpose() - first).norm() < 0.1);
  REQUIRE((two.row(1).transpose() - second).norm() < 0.1);

  REQUIRE(kmeans(pts, 3, 5) == kmeans(pts, 3, 5));  // determinism
}

TEST_CASE("cosamp recovers planted sparse signals", "[linalg]") {
  // 1-sparse: compare against exhaustive single-support least squares
  Rng rng(111);
  Matrix phi = gaussian_matrix(20, 50, rng).cast<Complex>();
  Vector x0 = Vector::Zero(50);
  x0(17) = Complex(2.5, -1.0);
  Vector y = phi * x0;
  CosampResult rec = cosamp(phi, y, 1);
  REQUIRE(rec.converged);

  Index oracle_support = -1;
  double oracle_best = 1e300;
  Complex oracle_coeff = 0;
  for (Index j = 0; j < 50; ++j) {
    const Complex c = phi.col(j).dot(y) / phi.col(j).squaredNorm();
    const double res = (y - phi.col(j) * c).norm();
    if (res < oracle_best) {
      oracle_best = res;
      oracle_support = j;
      oracle_coeff = c;
    }
  }
  REQUIRE(oracle_support == 17);
  REQUIRE(std::abs(rec.x(17) - oracle_coeff) < 1e-10);
  for (Index j = 0; j < 50; ++j)
    if (j != 17) REQUIRE(std::abs(rec.x(j)) < 1e-12);

  // y = 0
  CosampResult zero = cosamp(phi, Vector::Zero(20), 2);
  REQUIRE(zero.x.norm() == 0.0);
  REQUIRE(zero.converged);

  // 3-sparse, noiseless: match least squares on the true support
  Rng rng2(112);
  Matrix phi2 = gaussian_matrix(40, 100, rng2).cast<Complex>();
  Vector x1 = Vector::Zero(100);
  x1(3) = 1.0;
  x1(42) = Complex(-0.7, 0.2);
  x1(99) = 0.4;
  Vector y2 = phi2 * x1;
  CosampResult rec2 = cosamp(phi2, y2, 3);
  Matrix sub(40, 3);
  sub << phi2.col(3), phi2.col(42), phi2.col(99);
  Vector oracle = sub.colPivHouseholderQr().solve(y2);
  REQUIRE(std::abs(rec2.x(3) - oracle(0)) <= 1e-8);
  REQUIRE(std::abs(rec2.x(42) - oracle(1)) <= 1e-8);
  REQUIRE(std::abs(rec2.x(99) - oracle(2)) <= 1e-8);
  REQUIRE((rec2.x - x1).norm() <= 1e-8 * x1.norm());
}

TEST_CASE("dft matrix is unitary and symmetric", "[linalg]") {
  for (Index n : {4, 7, 16}) {
    Matrix f = dft_matrix(n);
    REQUIRE((f.adjoint() * f - Matrix::Identity(n, n)).norm() < 1e-12);
    REQUIRE((f - f.transpose()).norm() < 1e-12);
  }
}

TEST_CASE("householder_basis tolerates rank deficiency", "[linalg]") {
  Matrix a = random_complex(8, 2, 121);
  Matrix padded(8, 4);
  padded << a, a;  // rank 2
  Matrix q = householder_basis(padded);
  REQUIRE(q.cols() == 4);
  REQUIRE(spectral_norm_oracle(q.adjoint() * q - Matrix::Identity(4, 4)) < 1e-12);
  REQUIRE((padded - q * (q.adjoint() * padded)).norm() < 1e-12 * padded.norm());
}
