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
#include "kmv/dictionary.hpp"
#include "kmv/systems.hpp"

using namespace kmv;

namespace {

SnapshotPair circle_rotation_pair(double alpha, Index m, bool equispaced = true,
                                  double theta0 = 0.2) {
  RealMatrix traj(1, m + 1);
  for (Index i = 0; i <= m; ++i) {
    const double theta =
        equispaced ? 2.0 * M_PI * static_cast<double>(i % m) / static_cast<double>(m)
                   : theta0 + alpha * static_cast<double>(i);
    traj(0, i) = theta;
  }
  SnapshotPair pair = pairs_from_trajectory(traj);
  if (equispaced) {
    // X holds M equispaced nodes; Y is the rotated set
    for (Index i = 0; i < m; ++i) pair.Y(0, i) = pair.X(0, i) + Complex(alpha, 0);
  }
  return pair;
}

}  // namespace

TEST_CASE("linear dictionary", "[dictionary]") {
  Dictionary dict = linear_dictionary(2);
  REQUIRE(dict.N == 2);
  RealVector x(2);
  x << 2, 3;
  Vector row = dict.eval(x);
  REQUIRE(row(0).real() == 2.0);
  REQUIRE(row(1).real() == 3.0);
}

TEST_CASE("rbf dictionary follows the printed formula", "[dictionary]") {
  // samples = +-e1, +-e2: mean zero, unit norms, so gamma = 1
  RealMatrix samples(2, 4);
  samples << 1, -1, 0, 0, 0, 0, 1, -1;
  Dictionary dict = rbf_dictionary(samples, 4, 3);
  REQUIRE(dict.N == 4);

  // centers are the sample points (k = M); the feature at its own center is
  // exp(0) = 1, and at distance 1 it is exp(-gamma * 1) with gamma = 1
  RealVector probe(2);
  probe << 1, 0;
  RealVector row = dict.eval_real(probe);
  REQUIRE(row.maxCoeff() == Catch::Approx(1.0).margin(1e-14));
  RealVector far(2);
  far << 2, 0;  // distance 1 from center (1,0)
  RealVector row2 = dict.eval_real(far);
  REQUIRE(row2.maxCoeff() == Catch::Approx(std::exp(-1.0)).margin(1e-12));

  RealMatrix equal = RealMatrix::Ones(2, 5);
  REQUIRE_THROWS_AS(rbf_dictionary(equal, 2, 3), InputError);
}

TEST_CASE("rbf features on Duffing data are bounded", "[dictionary]") {
  // 10^3 initial points, 50 steps each
  Rng rng(177);
  std::vector<SnapshotPair> parts;
  OdeSystem sys = duffing(false);
  for (int i = 0; i < 100; ++i) {  // trimmed-down version of the data protocol
    TrajectoryConfig cfg;
    cfg.dt = 0.25;
    cfg.steps = 50;
    cfg.initial = RealVector(2);
    cfg.initial << rng.uniform(-2, 2), rng.uniform(-2, 2);
    parts.push_back(pairs_from_trajectory(sample_trajectory(sys, cfg, 25)));
  }
  SnapshotPair pair = merge_pairs(parts);
  Dictionary dict = rbf_dictionary(pair.X.real(), 100, 5);
  EdmdMatrices mats = assemble(pair, dict);
  REQUIRE(mats.real_features);
  REQUIRE(mats.PsiXr.allFinite());
  REQUIRE(mats.PsiYr.allFinite());
  REQUIRE(mats.PsiXr.cwiseAbs().maxCoeff() <= 1.0 + 1e-12);
}

TEST_CASE("fourier dictionary", "[dictionary]") {
  Dictionary constant = fourier_dictionary(0);
  REQUIRE(constant.N == 1);
  RealVector theta(1);
  theta << 0.7;
  REQUIRE(std::abs(constant.eval(theta)(0) - Complex(1, 0)) < 1e-15);

  Dictionary dict = fourier_dictionary(3);
  REQUIRE(dict.N == 7);
  RealVector zero(1);
  zero << 0.0;
  Vector row = dict.eval(zero);
  for (Index j = 0; j < 7; ++j) REQUIRE(std::abs(row(j) - Complex(1, 0)) < 1e-15);
}

TEST_CASE("fourier Gram matrix is exactly orthonormal at equispaced nodes", "[dictionary]") {
  SnapshotPair pair = circle_rotation_pair(0.3, 512);
  Dictionary dict = fourier_dictionary(5);
  EdmdMatrices mats = assemble(pair, dict);
  REQUIRE((mats.G - Matrix::Identity(11, 11)).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("assemble definitions and properties", "[dictionary]") {
  RealMatrix traj = kmv::test::random_real(3, 21, 181);
  SnapshotPair pair = pairs_from_trajectory(traj);
  Dictionary dict = linear_dictionary(3);
  EdmdMatrices mats = assemble(pair, dict);
  REQUIRE((mats.psi_x() - pair.X.transpose()).norm() == 0.0);
  REQUIRE((mats.psi_y() - pair.Y.transpose()).norm() == 0.0);

  // single sample with weight 1: G = Psi(x)* Psi(x)
  SnapshotPair one;
  one.X = pair.X.col(0);
  one.Y = pair.Y.col(0);
  one.weights = RealVector::Ones(1);
  EdmdMatrices m1 = assemble(one, dict);
  REQUIRE((m1.G - m1.psi_x().adjoint() * m1.psi_x()).norm() < 1e-14);

  // Hermitian PSD structure
  REQUIRE((mats.G - mats.G.adjoint()).norm() <= 1e-12);
  REQUIRE((mats.L - mats.L.adjoint()).norm() <= 1e-12);
  Eigen::SelfAdjointEigenSolver<Matrix> eg(mats.G, Eigen::EigenvaluesOnly);
  REQUIRE(eg.eigenvalues().minCoeff() >= -1e-12 * mats.G.norm());

  // linearity in the weights
  SnapshotPair doubled = pair;
  doubled.weights *= 2.0;
  EdmdMatrices m2 = assemble(doubled, dict);
  REQUIRE((m2.G - 2.0 * mats.G).norm() < 1e-12 * mats.G.norm());
  REQUIRE((m2.A - 2.0 * mats.A).norm() < 1e-12 * mats.A.norm());
  REQUIRE((m2.L - 2.0 * mats.L).norm() < 1e-12 * mats.L.norm());
}

TEST_CASE("assemble reports the offending observable and sample", "[dictionary]") {
  SnapshotPair pair = pairs_from_trajectory(kmv::test::random_real(1, 6, 191));
  Dictionary bad;
  bad.N = 2;
  bad.eval = [](const RealVector& x) {
    Vector row(2);
    row(0) = x(0);
    row(1) = Complex(std::nan(""), 0);
    return row;
  };
  try {
    assemble(pair, bad);
    FAIL("expected InputError");
  } catch (const InputError& e) {
    const std::string msg = e.what();
    REQUIRE(msg.find("observable 1") != std::string::npos);
    REQUIRE(msg.find("sample 0") != std::string::npos);
  }
}

TEST_CASE("traces of G and L agree for ergodic measure-preserving sampling", "[dictionary]") {
  TrajectoryConfig cfg;
  cfg.dt = 0.05;
  cfg.steps = 5010;
  cfg.burn_in = 2000;
  cfg.initial = RealVector(3);
  cfg.initial << 1, 1, 1;
  RealMatrix traj = sample_trajectory(lorenz(), cfg, 5);
  RealVector series = traj.row(0).transpose();
  auto [px, py] = hankel_embed(series, 10);
  RealVector w = RealVector::Constant(px.rows(), 1.0 / static_cast<double>(px.rows()));
  EdmdMatrices mats = assemble_from_features(px, py, w, Matrix(px.transpose().cast<Complex>()));
  const double tg = mats.G.real().trace();
  const double tl = mats.L.real().trace();
  REQUIRE(std::abs(tg - tl) <= 0.01 * std::abs(tg));
}
