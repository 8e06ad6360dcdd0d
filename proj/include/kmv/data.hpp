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

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <utility>

#include "kmv/core.hpp"

namespace kmv {

// Snapshot-pair construction, delay embeddings and file IO.

/// Paired snapshot matrices X, Y (d x M) with per-sample quadrature weights.
struct SnapshotPair {
  Matrix X;
  Matrix Y;
  RealVector weights;

  Index dim() const { return X.rows(); }
  Index samples() const { return X.cols(); }
};

inline void validate(const SnapshotPair& pair) {
  if (pair.X.rows() != pair.Y.rows() || pair.X.cols() != pair.Y.cols())
    throw DimensionError("SnapshotPair: X and Y must have the same shape");
  if (pair.weights.size() != pair.X.cols())
    throw DimensionError("SnapshotPair: need one weight per snapshot column");
  if (pair.weights.minCoeff() < 0 || pair.weights.sum() <= 0)
    throw InputError("SnapshotPair: weights must be nonnegative with positive sum");
}

/// X = columns 0..M-1, Y = columns 1..M of a single trajectory, with
/// uniform weights 1/M.
inline SnapshotPair pairs_from_trajectory(const Matrix& traj) {
  if (traj.cols() < 2)
    throw DimensionError("pairs_from_trajectory: need at least two trajectory columns");
  const Index m = traj.cols() - 1;
  SnapshotPair pair;
  pair.X = traj.leftCols(m);
  pair.Y = traj.rightCols(m);
  pair.weights = RealVector::Constant(m, 1.0 / static_cast<double>(m));
  return pair;
}

inline SnapshotPair pairs_from_trajectory(const RealMatrix& traj) {
  return pairs_from_trajectory(Matrix(traj.cast<Complex>()));
}

/// Concatenates snapshot pairs from several trajectories; weights are
/// renormalized to sum to one.
inline SnapshotPair merge_pairs(const std::vector<SnapshotPair>& parts) {
  if (parts.empty()) throw DimensionError("merge_pairs: no parts");
  Index total = 0;
  for (const auto& p : parts) total += p.samples();
  SnapshotPair out;
  out.X.resize(parts[0].dim(), total);
  out.Y.resize(parts[0].dim(), total);
  out.weights.resize(total);
  Index at = 0;
  for (const auto& p : parts) {
    if (p.dim() != out.X.rows()) throw DimensionError("merge_pairs: inconsistent state dimension");
    out.X.middleCols(at, p.samples()) = p.X;
    out.Y.middleCols(at, p.samples()) = p.Y;
    out.weights.segment(at, p.samples()) = p.weights;
    at += p.samples();
  }
  out.weights /= out.weights.sum();
  return out;
}

/// Hankel matrices of a scalar series of length M+N: row m of Psi_X is
/// (g_m, ..., g_{m+N-1}) and row m of Psi_Y is shifted by one sample.
inline std::pair<RealMatrix, RealMatrix> hankel_embed(const RealVector& series, Index n) {
  if (n < 1) throw DimensionError("hankel_embed: window must be >= 1");
  const Index m = series.size() - n;
  if (m < 1)
    throw DimensionError("hankel_embed: series of length " + std::to_string(series.size()) +
                         " too short for window " + std::to_string(n));
  RealMatrix px(m, n), py(m, n);
  for (Index i = 0; i < m; ++i)
    for (Index j = 0; j < n; ++j) {
      px(i, j) = series(i + j);
      py(i, j) = series(i + j + 1);
    }
  return {std::move(px), std::move(py)};
}

enum class DelayMode { FullState, Scalar };

/// delays copies of the state at lags 0, stride, 2*stride, ...; supports a
/// delay spacing coarser than the sampling step.
struct DelaySpec {
  Index delays = 1;
  Index stride = 1;
  DelayMode mode = DelayMode::FullState;
};

/// Stacks delayed copies of the trajectory into an augmented snapshot pair:
/// column m of X is (x_m, x_{m+s}, ..., x_{m+(Nd-1)s}) and Y is offset by
/// one base sample.
inline SnapshotPair delay_embed_state(const RealMatrix& traj, const DelaySpec& spec) {
  if (spec.delays < 1 || spec.stride < 1)
    throw DimensionError("delay_embed_state: delays and stride must be >= 1");
  const Index d = spec.mode == DelayMode::Scalar ? 1 : traj.rows();
  const Index span = (spec.delays - 1) * spec.stride;
  const Index m = traj.cols() - span - 1;
  if (m < 1)
    throw DimensionError("delay_embed_state: trajectory needs at least " +
                         std::to_string(span + 2) + " columns, got " + std::to_string(traj.cols()));
  SnapshotPair pair;
  pair.X.resize(d * spec.delays, m);
  pair.Y.resize(d * spec.delays, m);
  for (Index k = 0; k < spec.delays; ++k) {
    const Index lag = k * spec.stride;
    pair.X.middleRows(k * d, d) = traj.block(0, lag, d, m).cast<Complex>();
    pair.Y.middleRows(k * d, d) = traj.block(0, lag + 1, d, m).cast<Complex>();
  }
  pair.weights = RealVector::Constant(m, 1.0 / static_cast<double>(m));
  return pair;
}

namespace detail {

inline std::string format_full(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline void write_block(std::ostream& os, const Matrix& block) {
  for (Index m = 0; m < block.cols(); ++m) {
    for (Index i = 0; i < block.rows(); ++i) {
      if (i) os << ',';
      os << format_full(block(i, m).real());
    }
    os << '\n';
  }
}

}  // namespace detail

/// Writes the snapshot CSV format: a "d,M" header, then X as M lines of d
/// comma-separated values, then Y likewise. Only real snapshot data is
/// representable in this format.
inline void save_snapshots(const std::filesystem::path& path, const SnapshotPair& pair) {
  validate(pair);
  if (pair.X.imag().cwiseAbs().maxCoeff() != 0 || pair.Y.imag().cwiseAbs().maxCoeff() != 0)
    throw InputError("save_snapshots: CSV format stores real snapshots only");
  std::ofstream os(path);
  if (!os) throw ParseError("save_snapshots: cannot open " + path.string());
  os << pair.X.rows() << ',' << pair.X.cols() << '\n';
  detail::write_block(os, pair.X);
  detail::write_block(os, pair.Y);
}

inline SnapshotPair load_snapshots(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw ParseError("load_snapshots: cannot open " + path.string());
  std::string line;
  if (!std::getline(is, line) || line.empty())
    throw ParseError("load_snapshots: empty file " + path.string());
  Index d = 0, m = 0;
  {
    std::istringstream hdr(line);
    char comma = 0;
    if (!(hdr >> d >> comma >> m) || comma != ',' || d < 1 || m < 1)
      throw ParseError("load_snapshots: malformed header line 1: '" + line + "'");
  }
  SnapshotPair pair;
  pair.X.resize(d, m);
  pair.Y.resize(d, m);
  for (Index row = 0; row < 2 * m; ++row) {
    if (!std::getline(is, line))
      throw ParseError("load_snapshots: expected " + std::to_string(2 * m) +
                       " data rows (2*M), file ends at row " + std::to_string(row));
    std::istringstream ls(line);
    Matrix& target = row < m ? pair.X : pair.Y;
    const Index col = row % m;
    std::string cell;
    for (Index i = 0; i < d; ++i) {
      if (!std::getline(ls, cell, ','))
        throw ParseError("load_snapshots: line " + std::to_string(row + 2) + ": expected " +
                         std::to_string(d) + " values");
      size_t used = 0;
      double v = 0;
      try {
        v = std::stod(cell, &used);
      } catch (const std::exception&) {
        throw ParseError("load_snapshots: line " + std::to_string(row + 2) + ": bad number '" +
                         cell + "'");
      }
      if (!std::isfinite(v))
        throw ParseError("load_snapshots: line " + std::to_string(row + 2) + ": non-finite entry");
      target(i, col) = v;
    }
    if (std::getline(ls, cell, ','))
      throw ParseError("load_snapshots: line " + std::to_string(row + 2) + ": expected exactly " +
                       std::to_string(d) + " values");
  }
  if (std::getline(is, line) && !line.empty())
    throw ParseError("load_snapshots: trailing data after " + std::to_string(2 * m) +
                     " rows (2*M expected)");
  pair.weights = RealVector::Constant(m, 1.0 / static_cast<double>(m));
  return pair;
}

/// Weight files hold one decimal per line, M lines.
inline RealVector load_weights(const std::filesystem::path& path, Index m) {
  std::ifstream is(path);
  if (!is) throw ParseError("load_weights: cannot open " + path.string());
  RealVector w(m);
  std::string line;
  for (Index i = 0; i < m; ++i) {
    if (!std::getline(is, line))
      throw ParseError("load_weights: expected " + std::to_string(m) + " lines, got " +
                       std::to_string(i));
    try {
      w(i) = std::stod(line);
    } catch (const std::exception&) {
      throw ParseError("load_weights: line " + std::to_string(i + 1) + ": bad number '" + line +
                       "'");
    }
  }
  if (w.minCoeff() < 0 || w.sum() <= 0)
    throw InputError("load_weights: weights must be nonnegative with positive sum");
  return w;
}

}  // namespace kmv
