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
#include <filesystem>
#include <fstream>

#include "helpers.hpp"
#include "kmv/data.hpp"
#include "kmv/systems.hpp"

using namespace kmv;

TEST_CASE("pairs_from_trajectory", "[data]") {
  RealMatrix traj(2, 3);
  traj << 1, 2, 3, 4, 5, 6;
  SnapshotPair pair = pairs_from_trajectory(traj);
  REQUIRE(pair.samples() == 2);
  REQUIRE(pair.X(0, 0).real() == 1.0);
  REQUIRE(pair.X(0, 1).real() == 2.0);
  REQUIRE(pair.Y(0, 0).real() == 2.0);
  REQUIRE(pair.Y(0, 1).real() == 3.0);
  REQUIRE(pair.weights.sum() == Catch::Approx(1.0));

  RealMatrix constant = RealMatrix::Ones(3, 5);
  SnapshotPair cpair = pairs_from_trajectory(constant);
  REQUIRE((cpair.X - cpair.Y).norm() == 0.0);

  const RealMatrix single = RealMatrix::Ones(3, 1);
  REQUIRE_THROWS_AS(pairs_from_trajectory(single), DimensionError);
}

TEST_CASE("shift identity on a Lorenz trajectory", "[data]") {
  TrajectoryConfig cfg;
  cfg.dt = 0.01;
  cfg.steps = 1000;
  cfg.burn_in = 100;
  cfg.initial = RealVector(3);
  cfg.initial << 1, 1, 1;
  RealMatrix traj = sample_trajectory(lorenz(), cfg, 5);
  SnapshotPair pair = pairs_from_trajectory(traj);
  for (Index m = 0; m + 1 < pair.samples(); ++m)
    REQUIRE((pair.Y.col(m) - pair.X.col(m + 1)).norm() == 0.0);
}

TEST_CASE("hankel_embed layout", "[data]") {
  RealVector series(4);
  series << 1, 2, 3, 4;
  auto [px, py] = hankel_embed(series, 2);
  REQUIRE(px.rows() == 2);
  REQUIRE(px(0, 0) == 1.0);
  REQUIRE(px(0, 1) == 2.0);
  REQUIRE(px(1, 0) == 2.0);
  REQUIRE(px(1, 1) == 3.0);
  REQUIRE(py(0, 0) == 2.0);
  REQUIRE(py(0, 1) == 3.0);
  REQUIRE(py(1, 0) == 3.0);
  REQUIRE(py(1, 1) == 4.0);

  RealVector constant = RealVector::Ones(10);
  auto [cx, cy] = hankel_embed(constant, 3);
  REQUIRE((cx - cy).norm() == 0.0);
  REQUIRE((cx.array() - 1.0).abs().maxCoeff() == 0.0);

  // structural identity: Psi_Y equals Psi_X shifted one column left with the
  // last column refreshed
  RealVector sine(30);
  for (Index i = 0; i < 30; ++i) sine(i) = std::sin(0.3 * static_cast<double>(i));
  auto [sx, sy] = hankel_embed(sine, 5);
  REQUIRE((sy.leftCols(4) - sx.rightCols(4)).norm() == 0.0);

  REQUIRE_THROWS_AS(hankel_embed(RealVector::Ones(3), 3), DimensionError);
}

TEST_CASE("delay_embed_state", "[data]") {
  RealMatrix traj = kmv::test::random_real(3, 20, 151);

  DelaySpec none;
  none.delays = 1;
  SnapshotPair plain = delay_embed_state(traj, none);
  SnapshotPair direct = pairs_from_trajectory(traj);
  REQUIRE((plain.X - direct.X).norm() == 0.0);
  REQUIRE((plain.Y - direct.Y).norm() == 0.0);

  RealMatrix scalar(1, 4);
  scalar << 1, 2, 3, 4;
  DelaySpec two;
  two.delays = 2;
  two.stride = 1;
  SnapshotPair embedded = delay_embed_state(scalar, two);
  REQUIRE(embedded.X.rows() == 2);
  REQUIRE(embedded.X.cols() == 2);
  REQUIRE(embedded.X(0, 0).real() == 1.0);
  REQUIRE(embedded.X(1, 0).real() == 2.0);
  REQUIRE(embedded.X(0, 1).real() == 2.0);
  REQUIRE(embedded.X(1, 1).real() == 3.0);
  REQUIRE(embedded.Y(0, 0).real() == 2.0);
  REQUIRE(embedded.Y(1, 0).real() == 3.0);

  // strided delays agree with an independently sliced trajectory
  RealMatrix big = kmv::test::random_real(3, 500, 152);
  DelaySpec strided;
  strided.delays = 4;
  strided.stride = 50;
  SnapshotPair spair = delay_embed_state(big, strided);
  const Index m = spair.samples();
  REQUIRE(m == 500 - 3 * 50 - 1);
  for (Index k = 0; k < 4; ++k) {
    REQUIRE((spair.X.middleRows(3 * k, 3) - big.middleCols(k * 50, m).cast<Complex>()).norm() ==
            0.0);
    REQUIRE((spair.Y.middleRows(3 * k, 3) - big.middleCols(k * 50 + 1, m).cast<Complex>())
                .norm() == 0.0);
  }

  DelaySpec hungry;
  hungry.delays = 10;
  hungry.stride = 100;
  REQUIRE_THROWS_AS(delay_embed_state(traj, hungry), DimensionError);
}

TEST_CASE("hankel_embed agrees with scalar delay embedding at stride 1", "[data]") {
  RealVector series(40);
  for (Index i = 0; i < 40; ++i) series(i) = std::cos(0.17 * static_cast<double>(i));
  const Index window = 6;
  auto [px, py] = hankel_embed(series, window);
  RealMatrix traj(1, 40);
  traj.row(0) = series.transpose();
  DelaySpec spec;
  spec.delays = window;
  spec.stride = 1;
  spec.mode = DelayMode::Scalar;
  SnapshotPair pair = delay_embed_state(traj, spec);
  // rows of the Hankel matrix are the delay-embedded columns
  REQUIRE((pair.X.real().transpose() - px.topRows(pair.samples())).norm() == 0.0);
  REQUIRE((pair.Y.real().transpose() - py.topRows(pair.samples())).norm() == 0.0);
}

TEST_CASE("snapshot CSV round trip is bitwise exact", "[data]") {
  const auto dir = std::filesystem::temp_directory_path() / "kmv_test_io";
  std::filesystem::create_directories(dir);
  const auto path = dir / "pair.csv";

  SnapshotPair pair;
  pair.X = kmv::test::random_real(4, 7, 161).cast<Complex>();
  pair.Y = kmv::test::random_real(4, 7, 162).cast<Complex>();
  pair.weights = RealVector::Constant(7, 1.0 / 7.0);
  save_snapshots(path, pair);
  SnapshotPair loaded = load_snapshots(path);
  REQUIRE(loaded.X == pair.X);
  REQUIRE(loaded.Y == pair.Y);

  std::ofstream(dir / "empty.csv").close();
  REQUIRE_THROWS_AS(load_snapshots(dir / "empty.csv"), ParseError);

  // header promises 2 columns -> 4 data rows; provide 5
  {
    std::ofstream os(dir / "extra.csv");
    os << "3,2\n";
    for (int i = 0; i < 5; ++i) os << "1,2,3\n";
  }
  REQUIRE_THROWS(load_snapshots(dir / "extra.csv"));

  {
    std::ofstream os(dir / "short.csv");
    os << "3,2\n1,2,3\n";
  }
  try {
    load_snapshots(dir / "short.csv");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    REQUIRE(std::string(e.what()).find("2*M") != std::string::npos);
  }
}

TEST_CASE("weight files", "[data]") {
  const auto dir = std::filesystem::temp_directory_path() / "kmv_test_io";
  std::filesystem::create_directories(dir);
  {
    std::ofstream os(dir / "weights.txt");
    os << "0.5\n0.25\n0.25\n";
  }
  RealVector w = load_weights(dir / "weights.txt", 3);
  REQUIRE(w.sum() == Catch::Approx(1.0));
  REQUIRE_THROWS_AS(load_weights(dir / "weights.txt", 5), ParseError);
}

TEST_CASE("merge_pairs renormalizes weights", "[data]") {
  SnapshotPair a = pairs_from_trajectory(kmv::test::random_real(2, 5, 171));
  SnapshotPair b = pairs_from_trajectory(kmv::test::random_real(2, 9, 172));
  SnapshotPair merged = merge_pairs({a, b});
  REQUIRE(merged.samples() == a.samples() + b.samples());
  REQUIRE(merged.weights.sum() == Catch::Approx(1.0));
}
