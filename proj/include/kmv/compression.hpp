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

#include <utility>
#include <vector>

#include "kmv/core.hpp"
#include "kmv/data.hpp"
#include "kmv/linalg.hpp"
#include "kmv/regression.hpp"

namespace kmv {

// Measurement-compressed and randomized DMD: the range finder with power
// iterations, rDMD, cDMD and csDMD.

/// Measurement matrix C (p x d) and sparsifying basis B (d x d, unitary).
struct CompressionOperators {
  Matrix C;
  Matrix B;
  std::string kind = "custom";
};

inline CompressionOperators gaussian_compression(Index p, Index d, std::uint64_t seed) {
  Rng rng(seed);
  CompressionOperators ops;
  // i.i.d. N(0, 1/p) entries give a near-isometry on low-dimensional subspaces
  ops.C = (gaussian_matrix(p, d, rng) / std::sqrt(static_cast<double>(p))).cast<Complex>();
  ops.B = Matrix::Identity(d, d);
  ops.kind = "gaussian";
  return ops;
}

/// Randomized range finder with q QR-stabilized power iterations: returns a
/// d x (r + oversample) orthonormal basis approximately spanning range(X).
inline Matrix randomized_range_finder(const Matrix& x, Index r, Index oversample, Index q,
                                      std::uint64_t seed) {
  require_finite(x, "randomized_range_finder");
  const Index k = r + oversample;
  if (r < 1 || k > std::min(x.rows(), x.cols()))
    throw DimensionError("randomized_range_finder: r + oversample must be within min(d, M)");
  if (q < 0) throw DimensionError("randomized_range_finder: power iterations must be >= 0");
  Rng rng(seed);
  const Matrix omega = gaussian_matrix(x.cols(), k, rng).cast<Complex>();
  Matrix z = x * omega;
  for (Index j = 0; j < q; ++j) {
    Matrix qb = householder_basis(z);
    Matrix cb = householder_basis(x.adjoint() * qb);
    z = x * cb;
  }
  return householder_basis(z);
}

struct RdmdOptions {
  Index oversample = 10;  // "typically, ten suffices"
  Index power_iters = 2;
};

/// Randomized DMD: sketch the range of X, run exact DMD entirely in the
/// sketch space and lift the modes back with Q.
inline DmdResult rdmd(const SnapshotPair& pair, Index r, std::uint64_t seed,
                      const RdmdOptions& opt = {}) {
  validate(pair);
  const Matrix q = randomized_range_finder(pair.X, r, opt.oversample, opt.power_iters, seed);
  SnapshotPair sketch;
  sketch.X = q.adjoint() * pair.X;
  sketch.Y = q.adjoint() * pair.Y;
  sketch.weights = pair.weights;
  DmdResult res = exact_dmd(sketch, r);
  res.modes = q * res.modes;
  res.amplitudes = pinv(res.modes) * pair.X.col(0);
  res.kind = "rdmd";
  return res;
}

/// Compressed DMD: run exact DMD on (CX, CY) and rebuild full-state modes
/// from the uncompressed Y: Phi = Y Vc Sigma_c^{-1} Wc.
inline DmdResult cdmd(const SnapshotPair& pair, const Matrix& c, Index r) {
  validate(pair);
  if (c.cols() != pair.dim()) throw DimensionError("cdmd: measurement matrix must be p x d");
  if (c.rows() < r) throw RankError("cdmd: need at least r compressed measurements");
  SnapshotPair comp;
  comp.X = c * pair.X;
  comp.Y = c * pair.Y;
  comp.weights = pair.weights;
  SvdResult svd = truncated_svd(comp.X, r);
  detail::check_truncation_rank(svd.S, r, comp.X.rows(), comp.X.cols(), "cdmd");
  const Matrix ktilde = svd.U.adjoint() * comp.Y * svd.V * svd.S.cwiseInverse().asDiagonal();
  EigResult ed = eig(ktilde);
  DmdResult res;
  res.eigenvalues = ed.values;
  res.modes = pair.Y * svd.V * svd.S.cwiseInverse().asDiagonal() * ed.vectors;
  res.amplitudes = pinv(res.modes) * pair.X.col(0);
  res.rank = r;
  res.kind = "cdmd";
  detail::sort_dmd(res);
  return res;
}

/// Compressed-sensing DMD: exact DMD on compressed data, then per-mode
/// sparse recovery against C B with CoSaMP and lifting Phi = B Phi_s.
/// Modes whose recovery hit the iteration cap are flagged.
struct CsDmdResult {
  DmdResult dmd;
  std::vector<bool> mode_recovered;  // per mode: CoSaMP converged
};

inline CsDmdResult csdmd(const Matrix& xc, const Matrix& yc, const CompressionOperators& ops,
                         Index r, Index sparsity, int cosamp_iters = 50) {
  require_finite(xc, "csdmd");
  require_finite(yc, "csdmd");
  if (xc.rows() != yc.rows() || xc.cols() != yc.cols())
    throw DimensionError("csdmd: compressed pairs must match in shape");
  const Index p = xc.rows();
  if (ops.C.rows() != p) throw DimensionError("csdmd: measurement matrix row count mismatch");
  if (ops.B.rows() != ops.B.cols() || ops.B.cols() != ops.C.cols())
    throw DimensionError("csdmd: basis must be d x d matching the measurement matrix");
  {
    Matrix gram = ops.B.adjoint() * ops.B - Matrix::Identity(ops.B.cols(), ops.B.cols());
    if (gram.norm() > 1e-10 * std::sqrt(static_cast<double>(ops.B.cols())))
      throw InputError("csdmd: sparsifying basis must be unitary");
  }
  // 2s <= p is CoSaMP's identification requirement; a sparsity request at or
  // above that bound is not a sparse problem, so recovery degrades to plain
  // least squares against C B (exact when p = d and C B is square).
  const bool sparse_path = 2 * sparsity <= p;

  CsDmdResult out;
  if (xc.norm() == 0) {
    out.dmd.kind = "csdmd";
    out.dmd.rank = 0;
    out.dmd.modes.resize(ops.B.rows(), 0);
    out.dmd.eigenvalues.resize(0);
    out.dmd.amplitudes.resize(0);
    return out;
  }

  SnapshotPair comp;
  comp.X = xc;
  comp.Y = yc;
  comp.weights = RealVector::Constant(xc.cols(), 1.0 / static_cast<double>(xc.cols()));
  DmdResult compressed = exact_dmd(comp, r);

  const Matrix cb = ops.C * ops.B;
  Matrix phi_s(ops.B.cols(), r);
  out.mode_recovered.assign(static_cast<size_t>(r), true);
  for (Index j = 0; j < r; ++j) {
    if (sparse_path) {
      CosampResult rec = cosamp(cb, compressed.modes.col(j), sparsity, cosamp_iters);
      phi_s.col(j) = rec.x;
      out.mode_recovered[static_cast<size_t>(j)] = rec.converged;
    } else {
      phi_s.col(j) = cb.colPivHouseholderQr().solve(compressed.modes.col(j));
    }
  }
  out.dmd = compressed;
  out.dmd.modes = ops.B * phi_s;
  out.dmd.kind = "csdmd";
  return out;
}

}  // namespace kmv
