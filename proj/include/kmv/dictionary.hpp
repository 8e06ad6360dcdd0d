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
#include <string>
#include <utility>

#include "kmv/core.hpp"
#include "kmv/data.hpp"
#include "kmv/linalg.hpp"

namespace kmv {

// Observable dictionaries for the EDMD family and assembly of the weighted
// feature and correlation matrices.

/// An ordered list of N scalar observables with a vectorized evaluator.
/// eval maps a state vector to the feature row (psi_1(x), ..., psi_N(x)).
/// Dictionaries must be reentrant: assemble may evaluate rows in parallel.
struct Dictionary {
  Index N = 0;
  std::function<Vector(const RealVector&)> eval;
  std::string description;
  // real_valued enables a real-arithmetic assembly fast path.
  bool real_valued = false;
  std::function<RealVector(const RealVector&)> eval_real;
};

/// psi_j(x) = x_j.
inline Dictionary linear_dictionary(Index d) {
  if (d < 1) throw DimensionError("linear_dictionary: dimension must be >= 1");
  Dictionary dict;
  dict.N = d;
  dict.description = "linear(d=" + std::to_string(d) + ")";
  dict.real_valued = true;
  dict.eval_real = [d](const RealVector& x) {
    if (x.size() != d) throw DimensionError("linear dictionary: state dimension mismatch");
    return x;
  };
  dict.eval = [d](const RealVector& x) {
    if (x.size() != d) throw DimensionError("linear dictionary: state dimension mismatch");
    return Vector(x.cast<Complex>());
  };
  return dict;
}

/// Radial basis functions psi_j(x) = exp(-gamma * ||x - c_j||) with centers
/// from k-means over the samples (d x M, columns are states). gamma is the
/// squared reciprocal of the average l2-norm of the mean-centered samples.
/// Note the exponent uses the unsquared distance.
inline Dictionary rbf_dictionary(const RealMatrix& samples, Index n, std::uint64_t seed) {
  if (samples.cols() < n)
    throw DimensionError("rbf_dictionary: need at least N samples for N centers");
  RealMatrix centered = samples.colwise() - samples.rowwise().mean();
  const double avg_norm = centered.colwise().norm().mean();
  if (avg_norm <= 0)
    throw InputError("rbf_dictionary: degenerate samples (all equal), gamma undefined");
  const double gamma = 1.0 / (avg_norm * avg_norm);
  RealMatrix centers = kmeans(RealMatrix(samples.transpose()), n, seed);  // n x d

  Dictionary dict;
  dict.N = n;
  dict.description = "rbf(N=" + std::to_string(n) + ", gamma=" + std::to_string(gamma) + ")";
  dict.real_valued = true;
  const Index d = samples.rows();
  dict.eval_real = [centers, gamma, d](const RealVector& x) {
    if (x.size() != d) throw DimensionError("rbf dictionary: state dimension mismatch");
    RealVector row =
        (-gamma * (centers.rowwise() - x.transpose()).rowwise().norm()).array().exp().matrix();
    return row;
  };
  auto eval_real = dict.eval_real;
  dict.eval = [eval_real](const RealVector& x) { return Vector(eval_real(x).cast<Complex>()); };
  return dict;
}

/// Complex Fourier modes psi_k(theta) = exp(i k theta), k = -K..K, on a
/// one-dimensional angle state.
inline Dictionary fourier_dictionary(Index k_max) {
  if (k_max < 0) throw DimensionError("fourier_dictionary: harmonic count must be >= 0");
  Dictionary dict;
  dict.N = 2 * k_max + 1;
  dict.description = "fourier(K=" + std::to_string(k_max) + ")";
  dict.eval = [k_max](const RealVector& x) {
    if (x.size() != 1) throw DimensionError("fourier dictionary: state must be a scalar angle");
    Vector row(2 * k_max + 1);
    for (Index k = -k_max; k <= k_max; ++k)
      row(k + k_max) = std::polar(1.0, static_cast<double>(k) * x(0));
    return row;
  };
  return dict;
}

/// Feature matrices and correlation matrices of the weighted Galerkin
/// problem: G = PsiX* D PsiX, A = PsiX* D PsiY, L = PsiY* D PsiY.
/// G and L are symmetrized after assembly. `states` keeps the raw state
/// snapshots so Koopman modes can be formed downstream.
///
/// Real-valued dictionaries keep their features in real storage
/// (PsiXr/PsiYr with real_features set); complex dictionaries use
/// PsiX/PsiY. Exactly one representation is populated. The big M x N
/// factorizations downstream run in real arithmetic when they can.
struct EdmdMatrices {
  Matrix PsiX;      // M x N (complex dictionaries)
  Matrix PsiY;      // M x N
  RealMatrix PsiXr;  // M x N (real dictionaries)
  RealMatrix PsiYr;  // M x N
  bool real_features = false;
  Matrix G;  // N x N, Hermitian PSD
  Matrix A;  // N x N
  Matrix L;  // N x N, Hermitian PSD
  RealVector weights;
  Matrix states;  // d x M

  Index samples() const { return real_features ? PsiXr.rows() : PsiX.rows(); }
  Index observables() const { return real_features ? PsiXr.cols() : PsiX.cols(); }

  /// Complex view of the features; materializes a cast for real storage, so
  /// use only at small scale.
  Matrix psi_x() const { return real_features ? Matrix(PsiXr.cast<Complex>()) : PsiX; }
  Matrix psi_y() const { return real_features ? Matrix(PsiYr.cast<Complex>()) : PsiY; }
};

namespace detail {

/// Economy QR of D^{1/2} PsiX with positive real diagonal, in real
/// arithmetic when the features are real. Throws RankError on deficiency.
struct WeightedFeatureQr {
  Matrix Q;       // M x N, complex dictionaries
  RealMatrix Qr;  // M x N, real dictionaries
  bool real_q = false;
  Matrix R;  // N x N upper triangular, positive diagonal

  Matrix q_adjoint_times(const Matrix& b) const {
    if (!real_q) return Q.adjoint() * b;
    Matrix out(Qr.cols(), b.cols());
    out.real() = Qr.transpose() * b.real();
    out.imag() = Qr.transpose() * b.imag();
    return out;
  }
};

inline void check_qr_rank(const RealVector& diag_abs, Index rows, Index cols) {
  const double tol = default_rank_cutoff(rows, cols, diag_abs.maxCoeff());
  Index rank = 0;
  for (Index i = 0; i < diag_abs.size(); ++i)
    if (diag_abs(i) > tol) ++rank;
  if (rank < cols)
    throw RankError("weighted feature matrix is rank-deficient: numerical rank " +
                    std::to_string(rank) + " < " + std::to_string(cols) +
                    "; reduce the dictionary");
}

inline RealVector real_state(const Matrix& snapshots, Index col) {
  // Dynamical states are real; the snapshot container is complex by
  // convention.
  for (Index i = 0; i < snapshots.rows(); ++i)
    if (snapshots(i, col).imag() != 0.0)
      throw InputError("assemble: dictionary evaluation requires real-valued states");
  return snapshots.col(col).real();
}

}  // namespace detail

inline EdmdMatrices assemble(const SnapshotPair& pair, const Dictionary& dict) {
  validate(pair);
  const Index m = pair.samples();
  EdmdMatrices out;
  out.weights = pair.weights;
  out.states = pair.X;

  auto check_row = [&](const auto& row, Index sample) {
    if (row.size() != dict.N)
      throw DimensionError("assemble: dictionary returned " + std::to_string(row.size()) +
                           " features, expected " + std::to_string(dict.N));
    for (Index j = 0; j < row.size(); ++j)
      if (!std::isfinite(std::abs(row(j))))
        throw InputError("assemble: non-finite feature, observable " + std::to_string(j) +
                         " at sample " + std::to_string(sample));
  };

  if (dict.real_valued && dict.eval_real) {
    out.real_features = true;
    out.PsiXr.resize(m, dict.N);
    out.PsiYr.resize(m, dict.N);
    for (Index i = 0; i < m; ++i) {
      RealVector rx = dict.eval_real(detail::real_state(pair.X, i));
      RealVector ry = dict.eval_real(detail::real_state(pair.Y, i));
      check_row(rx, i);
      check_row(ry, i);
      out.PsiXr.row(i) = rx.transpose();
      out.PsiYr.row(i) = ry.transpose();
    }
    const RealMatrix wx = pair.weights.asDiagonal() * out.PsiXr;
    RealMatrix g = out.PsiXr.transpose() * wx;
    RealMatrix a = wx.transpose() * out.PsiYr;
    RealMatrix l = out.PsiYr.transpose() * (pair.weights.asDiagonal() * out.PsiYr);
    g = 0.5 * (g + g.transpose()).eval();
    l = 0.5 * (l + l.transpose()).eval();
    out.G = g.cast<Complex>();
    out.A = a.cast<Complex>();
    out.L = l.cast<Complex>();
    return out;
  }

  out.PsiX.resize(m, dict.N);
  out.PsiY.resize(m, dict.N);
  for (Index i = 0; i < m; ++i) {
    Vector rx = dict.eval(detail::real_state(pair.X, i));
    Vector ry = dict.eval(detail::real_state(pair.Y, i));
    check_row(rx, i);
    check_row(ry, i);
    out.PsiX.row(i) = rx.transpose();
    out.PsiY.row(i) = ry.transpose();
  }
  const Matrix wx = pair.weights.asDiagonal() * out.PsiX;
  const Matrix wy = pair.weights.asDiagonal() * out.PsiY;
  out.G = out.PsiX.adjoint() * wx;
  out.A = wx.adjoint() * out.PsiY;
  out.L = out.PsiY.adjoint() * wy;
  out.G = 0.5 * (out.G + out.G.adjoint()).eval();
  out.L = 0.5 * (out.L + out.L.adjoint()).eval();
  return out;
}

/// Builds EdmdMatrices directly from precomputed feature matrices (used by
/// Hankel/delay dictionaries where features are data slices, not function
/// evaluations).
inline EdmdMatrices assemble_from_features(const Matrix& psi_x, const Matrix& psi_y,
                                           const RealVector& weights, const Matrix& states) {
  if (psi_x.rows() != psi_y.rows() || psi_x.cols() != psi_y.cols())
    throw DimensionError("assemble_from_features: feature matrices must match in shape");
  if (weights.size() != psi_x.rows())
    throw DimensionError("assemble_from_features: need one weight per sample row");
  EdmdMatrices out;
  out.PsiX = psi_x;
  out.PsiY = psi_y;
  out.weights = weights;
  out.states = states;
  const Matrix wx = weights.asDiagonal() * psi_x;
  const Matrix wy = weights.asDiagonal() * psi_y;
  out.G = psi_x.adjoint() * wx;
  out.A = wx.adjoint() * psi_y;
  out.L = psi_y.adjoint() * wy;
  out.G = 0.5 * (out.G + out.G.adjoint()).eval();
  out.L = 0.5 * (out.L + out.L.adjoint()).eval();
  return out;
}

namespace detail {

inline WeightedFeatureQr weighted_feature_qr(const EdmdMatrices& mats) {
  const RealVector wsqrt = mats.weights.cwiseSqrt();
  WeightedFeatureQr out;
  if (mats.real_features) {
    const Index m = mats.PsiXr.rows(), n = mats.PsiXr.cols();
    if (m < n) throw DimensionError("weighted_feature_qr: need samples >= observables");
    RealMatrix wx = wsqrt.asDiagonal() * mats.PsiXr;
    Eigen::HouseholderQR<RealMatrix> qr(wx);
    RealMatrix r = qr.matrixQR().topRows(n).triangularView<Eigen::Upper>();
    RealMatrix q = qr.householderQ() * RealMatrix::Identity(m, n);
    check_qr_rank(r.diagonal().cwiseAbs(), m, n);
    for (Index i = 0; i < n; ++i) {
      if (r(i, i) < 0) {
        r.row(i) = -r.row(i);
        q.col(i) = -q.col(i);
      }
    }
    out.Qr = std::move(q);
    out.real_q = true;
    out.R = r.cast<Complex>();
  } else {
    QrResult qr = economy_qr(wsqrt.asDiagonal() * mats.PsiX);
    out.Q = std::move(qr.Q);
    out.R = std::move(qr.R);
  }
  return out;
}

}  // namespace detail

inline EdmdMatrices assemble_from_features(const RealMatrix& psi_x, const RealMatrix& psi_y,
                                           const RealVector& weights, const Matrix& states) {
  if (psi_x.rows() != psi_y.rows() || psi_x.cols() != psi_y.cols())
    throw DimensionError("assemble_from_features: feature matrices must match in shape");
  if (weights.size() != psi_x.rows())
    throw DimensionError("assemble_from_features: need one weight per sample row");
  EdmdMatrices out;
  out.real_features = true;
  out.PsiXr = psi_x;
  out.PsiYr = psi_y;
  out.weights = weights;
  out.states = states;
  const RealMatrix wx = weights.asDiagonal() * psi_x;
  RealMatrix g = psi_x.transpose() * wx;
  RealMatrix a = wx.transpose() * psi_y;
  RealMatrix l = psi_y.transpose() * (weights.asDiagonal() * psi_y);
  g = 0.5 * (g + g.transpose()).eval();
  l = 0.5 * (l + l.transpose()).eval();
  out.G = g.cast<Complex>();
  out.A = a.cast<Complex>();
  out.L = l.cast<Complex>();
  return out;
}

}  // namespace kmv
