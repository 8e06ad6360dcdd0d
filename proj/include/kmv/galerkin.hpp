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

#include "kmv/core.hpp"
#include "kmv/data.hpp"
#include "kmv/dictionary.hpp"
#include "kmv/linalg.hpp"
#include "kmv/regression.hpp"

namespace kmv {

// Koopman-operator view: EDMD, Koopman modes, Hankel-DMD, HAVOK and
// generator-scaled eigenvalue utilities.

struct EdmdResult {
  Matrix K;              // N x N
  Vector eigenvalues;    // N (or the numerical rank if truncated)
  Matrix right_vectors;  // N x k eigenfunction coefficients
  Matrix koopman_modes;  // k x d, row j pairs with eigenvalue j
  std::string dictionary;
};

enum class RankPolicy {
  TruncateToNumericalRank,  // project features onto their numerical rank and proceed
  ErrorOut
};

namespace detail {

/// Thin SVD plus numerical rank of the weighted feature matrix; runs in real
/// arithmetic for real dictionaries. The tall U factor stays in whichever
/// scalar type it was computed in; V (N x k) is always complex for the small
/// downstream algebra.
struct WeightedFeatureSvd {
  Matrix U;      // M x k, complex dictionaries
  RealMatrix Ur;  // M x k, real dictionaries
  bool real_u = false;
  RealVector S;
  Matrix V;  // N x k
  Index rank = 0;

  /// U(:, 0:cols)^* b without materializing a complex copy of U.
  Matrix u_head_adjoint_times(Index cols, const Matrix& b) const {
    if (!real_u) return U.leftCols(cols).adjoint() * b;
    Matrix out(cols, b.cols());
    out.real() = Ur.leftCols(cols).transpose() * b.real();
    out.imag() = Ur.leftCols(cols).transpose() * b.imag();
    return out;
  }
};

inline WeightedFeatureSvd weighted_feature_svd(const EdmdMatrices& mats) {
  const RealVector wsqrt = mats.weights.cwiseSqrt();
  WeightedFeatureSvd out;
  if (mats.real_features) {
    RealMatrix wx = wsqrt.asDiagonal() * mats.PsiXr;
    Eigen::BDCSVD<RealMatrix> svd(wx, Eigen::ComputeThinU | Eigen::ComputeThinV);
    out.Ur = svd.matrixU();
    out.real_u = true;
    out.S = svd.singularValues();
    out.V = svd.matrixV().cast<Complex>();
  } else {
    Matrix wx = wsqrt.asDiagonal() * mats.PsiX;
    SvdResult svd = thin_svd(wx);
    out.U = std::move(svd.U);
    out.S = std::move(svd.S);
    out.V = std::move(svd.V);
  }
  const double cutoff =
      default_rank_cutoff(mats.samples(), mats.observables(), out.S.size() ? out.S(0) : 0.0);
  for (Index i = 0; i < out.S.size(); ++i)
    if (out.S(i) > cutoff) ++out.rank;
  return out;
}

/// (D^{1/2} PsiY) * b for either feature representation.
inline Matrix weighted_psi_y_times(const EdmdMatrices& mats, const Matrix& b) {
  const RealVector wsqrt = mats.weights.cwiseSqrt();
  if (mats.real_features) {
    RealMatrix re = mats.PsiYr * b.real();
    RealMatrix im = mats.PsiYr * b.imag();
    Matrix out(re.rows(), re.cols());
    out.real() = re;
    out.imag() = im;
    return wsqrt.asDiagonal() * out;
  }
  return wsqrt.asDiagonal() * (mats.PsiY * b);
}

inline Matrix weighted_psi_x_times(const EdmdMatrices& mats, const Matrix& b) {
  const RealVector wsqrt = mats.weights.cwiseSqrt();
  if (mats.real_features) {
    RealMatrix re = mats.PsiXr * b.real();
    RealMatrix im = mats.PsiXr * b.imag();
    Matrix out(re.rows(), re.cols());
    out.real() = re;
    out.imag() = im;
    return wsqrt.asDiagonal() * out;
  }
  return wsqrt.asDiagonal() * (mats.PsiX * b);
}

}  // namespace detail

/// EDMD: K = (D^{1/2} PsiX)^+ D^{1/2} PsiY, its eigendecomposition, and the
/// Koopman modes of the state observable. With a rank-deficient feature
/// matrix the default policy works in the feature matrix's numerical range;
/// the lifted K still satisfies K V = V Lambda exactly on the retained pairs.
inline EdmdResult edmd(const EdmdMatrices& mats,
                       RankPolicy policy = RankPolicy::TruncateToNumericalRank) {
  const Index n = mats.observables();
  const RealVector wsqrt = mats.weights.cwiseSqrt();
  detail::WeightedFeatureSvd svd = detail::weighted_feature_svd(mats);
  const Index rank = svd.rank;
  if (rank < n && policy == RankPolicy::ErrorOut)
    throw RankError("edmd: D^{1/2} PsiX has numerical rank " + std::to_string(rank) + " < N = " +
                    std::to_string(n) + "; reduce the dictionary or truncate");

  // U^* (D^{1/2} PsiY): M x N against M x k
  Matrix uty;
  if (mats.real_features) {
    RealMatrix wy = wsqrt.asDiagonal() * mats.PsiYr;
    uty = (svd.Ur.transpose() * wy).cast<Complex>();
  } else {
    Matrix wy = wsqrt.asDiagonal() * mats.PsiY;
    uty = svd.U.adjoint() * wy;
  }

  EdmdResult out;
  if (rank == n) {
    const Matrix k = svd.V * (svd.S.cwiseInverse().asDiagonal() * uty);
    EigResult ed = eig(k);
    out.K = k;
    out.eigenvalues = ed.values;
    out.right_vectors = ed.vectors;
  } else {
    const Matrix vr = svd.V.leftCols(rank);
    const Matrix kr =
        svd.S.head(rank).cwiseInverse().asDiagonal() * (uty.topRows(rank) * vr);
    EigResult ed = eig(kr);
    out.K = vr * kr * vr.adjoint();
    out.eigenvalues = ed.values;
    out.right_vectors = vr * ed.vectors;
  }

  // Koopman modes of the state: rows of V^{-1} (D^{1/2} PsiX)^+ D^{1/2} X^T
  const Matrix rhs = wsqrt.asDiagonal() * Matrix(mats.states.transpose());  // M x d
  const Matrix coeff = svd.V.leftCols(rank) *
                       (svd.S.head(rank).cwiseInverse().asDiagonal() *
                        svd.u_head_adjoint_times(rank, rhs));  // N x d
  if (out.right_vectors.cols() == n)
    out.koopman_modes = out.right_vectors.partialPivLu().solve(coeff);
  else
    out.koopman_modes = pinv(out.right_vectors) * coeff;
  return out;
}

/// Expansion coefficients of an observable sampled at the snapshots in the
/// eigenvector basis: V^{-1} (D^{1/2} PsiX)^+ D^{1/2} g.
inline Vector kmd_expand(const EdmdResult& res, const EdmdMatrices& mats, const Vector& g_samples) {
  if (g_samples.size() != mats.samples())
    throw DimensionError("kmd_expand: need one observable sample per snapshot");
  const RealVector wsqrt = mats.weights.cwiseSqrt();
  detail::WeightedFeatureSvd svd = detail::weighted_feature_svd(mats);
  const Vector rhs = wsqrt.asDiagonal() * g_samples;
  const Vector coeff = svd.V.leftCols(svd.rank) *
                       (svd.S.head(svd.rank).cwiseInverse().asDiagonal() *
                        svd.u_head_adjoint_times(svd.rank, rhs));
  if (res.right_vectors.cols() == res.right_vectors.rows())
    return res.right_vectors.partialPivLu().solve(coeff);
  return pinv(res.right_vectors) * coeff;
}

/// Hankel-DMD: exact DMD with the transposed Hankel matrices of a scalar
/// series as snapshot matrices.
inline DmdResult hankel_dmd(const RealVector& series, Index n, Index r) {
  auto [px, py] = hankel_embed(series, n);
  if (r > n) throw DimensionError("hankel_dmd: rank exceeds the embedding window");
  SnapshotPair pair;
  pair.X = px.transpose().cast<Complex>();
  pair.Y = py.transpose().cast<Complex>();
  pair.weights = RealVector::Constant(px.rows(), 1.0 / static_cast<double>(px.rows()));
  DmdResult res = exact_dmd(pair, r);
  res.kind = "hankel";
  return res;
}

/// Derivatives along rows (time) with 4th-order central differences in the
/// interior and one-sided 4th-order stencils at the ends.
inline RealMatrix time_derivative(const RealMatrix& series, double dt) {
  const Index m = series.rows();
  if (m < 5) throw DimensionError("time_derivative: need at least five samples");
  RealMatrix d(m, series.cols());
  const double h12 = 12.0 * dt;
  for (Index i = 2; i + 2 < m; ++i)
    d.row(i) = (-series.row(i + 2) + 8.0 * series.row(i + 1) - 8.0 * series.row(i - 1) +
                series.row(i - 2)) /
               h12;
  d.row(0) = (-25.0 * series.row(0) + 48.0 * series.row(1) - 36.0 * series.row(2) +
              16.0 * series.row(3) - 3.0 * series.row(4)) /
             h12;
  d.row(1) = (-3.0 * series.row(0) - 10.0 * series.row(1) + 18.0 * series.row(2) -
              6.0 * series.row(3) + series.row(4)) /
             h12;
  d.row(m - 1) = (25.0 * series.row(m - 1) - 48.0 * series.row(m - 2) + 36.0 * series.row(m - 3) -
                  16.0 * series.row(m - 4) + 3.0 * series.row(m - 5)) /
                 h12;
  d.row(m - 2) = (3.0 * series.row(m - 1) + 10.0 * series.row(m - 2) - 18.0 * series.row(m - 3) +
                  6.0 * series.row(m - 4) - series.row(m - 5)) /
                 h12;
  return d;
}

/// Linear model on the leading r-1 delay coordinates with the last
/// coordinate imposed as forcing: d/dt vtilde = K vtilde + B v_r.
struct HavokModel {
  RealMatrix K_lin;       // (r-1) x (r-1)
  RealMatrix B_force;     // (r-1) x 1
  RealVector v_r_series;  // M
  RealMatrix v;           // M x r delay coordinates
  RealVector singular_values;
  RealMatrix basis_u;         // N x r
  double fit_residual = 0.0;  // relative residual of the forced linear fit
};

inline HavokModel havok(const RealVector& series, Index n, Index r, double dt) {
  if (r < 2) throw DimensionError("havok: rank must be >= 2");
  auto [px, py] = hankel_embed(series, n);
  (void)py;
  // SVD of the transposed Hankel matrix; columns of V are the delay coordinates
  Eigen::BDCSVD<RealMatrix> svd(px.transpose(), Eigen::ComputeThinU | Eigen::ComputeThinV);
  if (r > svd.singularValues().size()) throw DimensionError("havok: rank exceeds window size");
  HavokModel model;
  model.v = svd.matrixV().leftCols(r);  // M x r
  model.singular_values = svd.singularValues().head(r);
  model.basis_u = svd.matrixU().leftCols(r);
  model.v_r_series = model.v.col(r - 1);
  if (svd.singularValues()(0) <= 0) {
    // zero signal: zero model
    model.K_lin = RealMatrix::Zero(r - 1, r - 1);
    model.B_force = RealMatrix::Zero(r - 1, 1);
    model.v.setZero();
    model.v_r_series.setZero();
    return model;
  }

  const RealMatrix dv = time_derivative(model.v.leftCols(r - 1), dt);  // M x (r-1)
  // regressors: [vtilde, v_r], solve dv = regress * [K^T; B^T]
  const RealMatrix theta = model.v.colPivHouseholderQr().solve(dv);  // r x (r-1)
  model.K_lin = theta.topRows(r - 1).transpose();
  model.B_force = theta.row(r - 1).transpose();
  model.fit_residual = (dv - model.v * theta).norm() / dv.norm();
  return model;
}

/// Time-scaled logarithms eta = log(lambda)/dt; zero eigenvalues are
/// excluded (the count of excluded entries is the size difference).
inline Vector log_scale_eigs(const Vector& lambdas, double dt) {
  if (dt <= 0) throw InputError("log_scale_eigs: dt must be positive");
  std::vector<Complex> out;
  out.reserve(static_cast<size_t>(lambdas.size()));
  for (Index i = 0; i < lambdas.size(); ++i)
    if (lambdas(i) != Complex(0, 0)) out.push_back(std::log(lambdas(i)) / dt);
  return Eigen::Map<Vector>(out.data(), static_cast<Index>(out.size()));
}

}  // namespace kmv
