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
#include "kmv/dictionary.hpp"
#include "kmv/galerkin.hpp"
#include "kmv/linalg.hpp"

namespace kmv {

// Residual DMD: infinite-dimensional residuals for candidate eigenpairs,
// residual-filtered spectra and pseudospectrum estimation on a grid.

struct ResidualReport {
  Vector eigenvalues;
  RealVector residuals;
  Matrix vectors;  // N x k candidate coefficients
  double threshold = 0.0;
};

namespace detail {

/// Explicit-norm residual ||(D^{1/2}PsiY - lambda D^{1/2}PsiX)v|| /
/// ||D^{1/2}PsiX v||; used when the quadratic form cancels to round-off.
inline double residual_direct(const EdmdMatrices& mats, Complex lambda, const Vector& v) {
  const Vector xv = weighted_psi_x_times(mats, Matrix(v)).col(0);
  const Vector yv = weighted_psi_y_times(mats, Matrix(v)).col(0);
  const double denom = xv.norm();
  if (!(denom > 0))
    throw NumericalError("residual: candidate vector has nonpositive G-seminorm");
  return (yv - lambda * xv).norm() / denom;
}

}  // namespace detail

/// Data-driven residual of a candidate pair (lambda, Psi v):
/// res^2 = v*(L - lambda A* - conj(lambda) A + |lambda|^2 G)v / (v* G v),
/// clamped at zero against round-off. Equals
/// ||(D^{1/2}PsiY - lambda D^{1/2}PsiX)v|| / ||D^{1/2}PsiX v||, which is
/// evaluated directly when the quadratic form loses all significant digits.
inline double residual(const EdmdMatrices& mats, Complex lambda, const Vector& v) {
  const Complex denom_c = (v.adjoint() * mats.G * v)(0);
  const double denom = denom_c.real();
  if (!(denom > 0))
    throw NumericalError("residual: candidate vector has nonpositive G-seminorm");
  const Vector av = mats.A * v;
  const Vector asv = mats.A.adjoint() * v;
  const Vector lv = mats.L * v;
  const Complex t_l = (v.adjoint() * lv)(0);
  const Complex t_as = (v.adjoint() * asv)(0);
  const Complex t_a = (v.adjoint() * av)(0);
  const Complex num = t_l - lambda * t_as - std::conj(lambda) * t_a + std::norm(lambda) * denom_c;
  const double mag = std::abs(t_l) + std::abs(lambda) * (std::abs(t_as) + std::abs(t_a)) +
                     std::norm(lambda) * std::abs(denom_c);
  if (num.real() <= 1e-6 * mag) return detail::residual_direct(mats, lambda, v);
  return std::sqrt(num.real() / denom);
}

/// Residuals of a list of candidate eigenpairs, computed with shared
/// matrix products.
inline ResidualReport residuals(const EdmdMatrices& mats, const Vector& lambdas,
                                const Matrix& vectors) {
  if (lambdas.size() != vectors.cols())
    throw DimensionError("residuals: one eigenvalue per candidate column required");
  const Matrix gv = mats.G * vectors;
  const Matrix av = mats.A * vectors;
  const Matrix asv = mats.A.adjoint() * vectors;
  const Matrix lv = mats.L * vectors;
  ResidualReport rep;
  rep.eigenvalues = lambdas;
  rep.vectors = vectors;
  rep.residuals.resize(lambdas.size());
  for (Index j = 0; j < lambdas.size(); ++j) {
    const Complex lam = lambdas(j);
    const Complex denom_c = vectors.col(j).dot(gv.col(j));  // v* G v
    if (!(denom_c.real() > 0))
      throw NumericalError("residuals: candidate " + std::to_string(j) +
                           " has nonpositive G-seminorm");
    const Complex t_l = vectors.col(j).dot(lv.col(j));
    const Complex t_as = vectors.col(j).dot(asv.col(j));
    const Complex t_a = vectors.col(j).dot(av.col(j));
    const Complex num = t_l - lam * t_as - std::conj(lam) * t_a + std::norm(lam) * denom_c;
    const double mag = std::abs(t_l) + std::abs(lam) * (std::abs(t_as) + std::abs(t_a)) +
                       std::norm(lam) * std::abs(denom_c);
    if (num.real() <= 1e-6 * mag)
      rep.residuals(j) = detail::residual_direct(mats, lam, Vector(vectors.col(j)));
    else
      rep.residuals(j) = std::sqrt(num.real() / denom_c.real());
  }
  return rep;
}

/// Runs EDMD, attaches residuals to every eigenpair and keeps those at or
/// below the tolerance.
inline ResidualReport filtered_spectrum(const EdmdMatrices& mats, double eps) {
  if (eps <= 0) throw InputError("filtered_spectrum: tolerance must be positive");
  EdmdResult ed = edmd(mats);
  ResidualReport all = residuals(mats, ed.eigenvalues, ed.right_vectors);
  std::vector<Index> keep;
  for (Index j = 0; j < all.eigenvalues.size(); ++j)
    if (all.residuals(j) <= eps) keep.push_back(j);
  ResidualReport rep;
  rep.threshold = eps;
  rep.eigenvalues.resize(static_cast<Index>(keep.size()));
  rep.residuals.resize(static_cast<Index>(keep.size()));
  rep.vectors.resize(all.vectors.rows(), static_cast<Index>(keep.size()));
  for (size_t i = 0; i < keep.size(); ++i) {
    rep.eigenvalues(static_cast<Index>(i)) = all.eigenvalues(keep[i]);
    rep.residuals(static_cast<Index>(i)) = all.residuals(keep[i]);
    rep.vectors.col(static_cast<Index>(i)) = all.vectors.col(keep[i]);
  }
  return rep;
}

struct PseudospectrumGrid {
  Vector points;
  RealVector tau;
  double epsilon = 0.0;
  Matrix vectors;  // N x k pseudoeigenvector coefficients (when requested)
};

struct PseudospectrumOptions {
  bool want_vectors = false;
  // direct M x N sigma_min evaluation when |z|^2 cond(R) exceeds this
  double precision_switch = 1e6;
};

/// ResDMD pseudospectrum estimate: tau(z) = smallest singular value of
/// (D^{1/2} PsiY R^{-1} - z Q), evaluated through the N x N squared form
/// C2 - z C1* - conj(z) C1 + |z|^2 I with a direct fallback when the
/// squared form would lose precision.
inline PseudospectrumGrid pseudospectrum(const EdmdMatrices& mats, const Vector& grid, double eps,
                                         const PseudospectrumOptions& opt = {}) {
  detail::WeightedFeatureQr qr = detail::weighted_feature_qr(mats);  // RankError when deficient
  const Index n = mats.observables();
  const Matrix rinv =
      qr.R.template triangularView<Eigen::Upper>().solve(Matrix::Identity(n, n));
  // D^{1/2} PsiY R^{-1}, kept in real storage when the features are real
  const bool realdata = mats.real_features;
  RealMatrix wyr_r;
  Matrix wyr;
  Matrix c1;
  if (realdata) {
    wyr_r = (mats.weights.cwiseSqrt().asDiagonal() * mats.PsiYr) * rinv.real();
    c1 = (qr.Qr.transpose() * wyr_r).cast<Complex>();
  } else {
    wyr = (mats.weights.cwiseSqrt().asDiagonal() * mats.PsiY) * rinv;
    c1 = qr.Q.adjoint() * wyr;
  }
  const Matrix c2 = rinv.adjoint() * (mats.L * rinv);
  const double cond_r =
      qr.R.diagonal().cwiseAbs().maxCoeff() / qr.R.diagonal().cwiseAbs().minCoeff();

  PseudospectrumGrid out;
  out.points = grid;
  out.epsilon = eps;
  out.tau.resize(grid.size());
  if (opt.want_vectors) out.vectors.resize(n, grid.size());

  for (Index l = 0; l < grid.size(); ++l) {
    const Complex z = grid(l);
    const bool direct = std::norm(z) * cond_r > opt.precision_switch || opt.want_vectors;
    if (direct) {
      Matrix shifted;
      if (realdata) {
        shifted = wyr_r.cast<Complex>();
        shifted.noalias() -= z * qr.Qr.cast<Complex>();
      } else {
        shifted = wyr - z * qr.Q;
      }
      auto [sigma, v] = smallest_singular_pair(shifted);
      out.tau(l) = sigma;
      if (opt.want_vectors) out.vectors.col(l) = rinv * v;
    } else {
      Matrix mz = c2 - z * c1.adjoint() - std::conj(z) * c1;
      mz.diagonal().array() += std::norm(z);
      mz = 0.5 * (mz + mz.adjoint()).eval();
      Eigen::SelfAdjointEigenSolver<Matrix> es(mz, Eigen::EigenvaluesOnly);
      if (es.info() != Eigen::Success)
        throw NumericalError("pseudospectrum: Hermitian eigensolve failed");
      out.tau(l) = std::sqrt(std::max(0.0, es.eigenvalues().minCoeff()));
    }
  }
  return out;
}

/// Uniform complex lattice over a box, row-major over the imaginary axis.
inline Vector box_grid(double re_min, double re_max, double im_min, double im_max, Index nx = 100,
                       Index ny = 100) {
  Vector grid(nx * ny);
  for (Index iy = 0; iy < ny; ++iy)
    for (Index ix = 0; ix < nx; ++ix) {
      const double re = nx == 1 ? re_min : re_min + (re_max - re_min) * ix / double(nx - 1);
      const double im = ny == 1 ? im_min : im_min + (im_max - im_min) * iy / double(ny - 1);
      grid(iy * nx + ix) = Complex(re, im);
    }
  return grid;
}

}  // namespace kmv
