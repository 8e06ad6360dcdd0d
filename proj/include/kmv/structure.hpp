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
#include <utility>
#include <vector>

#include "kmv/core.hpp"
#include "kmv/data.hpp"
#include "kmv/dictionary.hpp"
#include "kmv/linalg.hpp"
#include "kmv/regression.hpp"

namespace kmv {

// Structure-preserving estimators: piDMD over four matrix manifolds,
// mpEDMD with its unitary-part Procrustes construction, spectral-measure
// atoms, CDFs and the Wasserstein-1 distance on the cut circle.

enum class ManifoldKind { Orthogonal, Symmetric, Causal, Circulant };

inline const char* manifold_name(ManifoldKind kind) {
  switch (kind) {
    case ManifoldKind::Orthogonal: return "orthogonal";
    case ManifoldKind::Symmetric: return "symmetric";
    case ManifoldKind::Causal: return "causal";
    case ManifoldKind::Circulant: return "circulant";
  }
  return "?";
}

/// Membership test for the returned model matrix.
inline bool manifold_member(const Matrix& k, ManifoldKind kind, double tol = 1e-10) {
  const double scale = std::max(1.0, k.norm());
  switch (kind) {
    case ManifoldKind::Orthogonal:
      return (k.adjoint() * k - Matrix::Identity(k.rows(), k.cols())).norm() <= tol * scale;
    case ManifoldKind::Symmetric:
      return (k - k.adjoint()).norm() <= tol * scale;
    case ManifoldKind::Causal: {
      double off = 0;
      for (Index i = 0; i < k.rows(); ++i)
        for (Index j = i + 1; j < k.cols(); ++j) off += std::norm(k(i, j));
      return std::sqrt(off) <= tol * scale;
    }
    case ManifoldKind::Circulant: {
      const Matrix f = dft_matrix(k.rows());
      Matrix diag = f * k * f.adjoint();
      double off = 0;
      for (Index i = 0; i < k.rows(); ++i)
        for (Index j = 0; j < k.cols(); ++j)
          if (i != j) off += std::norm(diag(i, j));
      return std::sqrt(off) <= tol * scale;
    }
  }
  return false;
}

namespace detail {

// Schoenemann: minimize ||Y - QX||_F over unitary Q via the SVD of Y X*.
inline Matrix procrustes_orthogonal(const Matrix& x, const Matrix& y) {
  SvdResult svd = thin_svd(y * x.adjoint());
  return svd.U * svd.V.adjoint();
}

// Higham's SVD-based solution of the self-adjoint Procrustes problem
// min ||SX - Y|| over S = S*. With X = P Sigma W* and C = P* Y W, in the
// rotated coordinates S'_{ij} = (s_j C_ij + s_i conj(C_ji)) / (s_i^2+s_j^2)
// on indices inside the numerical rank, C_ji/s_i outside, zero on the
// fully-unconstrained block.
inline Matrix procrustes_symmetric(const Matrix& x, const Matrix& y) {
  const Index d = x.rows();
  Eigen::JacobiSVD<Matrix> svd(x, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const RealVector s = svd.singularValues();
  const Matrix c = svd.matrixU().adjoint() * y * svd.matrixV();
  const double cutoff = default_rank_cutoff(x.rows(), x.cols(), s.size() ? s(0) : 0.0);
  Index rank = 0;
  for (Index i = 0; i < s.size(); ++i)
    if (s(i) > cutoff) ++rank;
  Matrix sp = Matrix::Zero(d, d);
  for (Index i = 0; i < d; ++i) {
    for (Index j = 0; j < d; ++j) {
      const bool i_in = i < rank, j_in = j < std::min<Index>(rank, c.cols());
      if (i_in && j_in) {
        if (i == j)
          sp(i, j) = Complex(c(i, i).real() / s(i), 0.0);
        else
          sp(i, j) = (s(j) * c(i, j) + s(i) * std::conj(c(j, i))) / (s(i) * s(i) + s(j) * s(j));
      } else if (j_in && !i_in) {
        sp(i, j) = std::conj(c(j, i)) / s(j);
        sp(j, i) = c(j, i) / s(j);
      }
      // both outside the rank: free, keep zero (minimum norm)
    }
  }
  sp = 0.5 * (sp + sp.adjoint()).eval();
  return svd.matrixU() * sp * svd.matrixU().adjoint();
}

// Row-wise least squares where row i of Y is fit using only rows <= i of X.
inline std::pair<Matrix, bool> procrustes_causal(const Matrix& x, const Matrix& y) {
  const Index d = x.rows();
  Matrix k = Matrix::Zero(d, d);
  bool degenerate = false;
  for (Index i = 0; i < d; ++i) {
    const Matrix block = x.topRows(i + 1);  // (i+1) x M
    if (block.norm() == 0) {
      degenerate = true;  // zero rows mid-solve: leave the row zero-filled
      continue;
    }
    k.row(i).head(i + 1) =
        (pinv(Matrix(block.transpose())) * Vector(y.row(i).transpose())).transpose();
  }
  return {std::move(k), degenerate};
}

// Independent scalar least squares per spatial frequency after DFT
// diagonalization: khat_f = <Yhat_f, Xhat_f> / ||Xhat_f||^2.
inline std::pair<Matrix, bool> procrustes_circulant(const Matrix& x, const Matrix& y) {
  const Index d = x.rows();
  const Matrix f = dft_matrix(d);
  const Matrix xh = f * x;
  const Matrix yh = f * y;
  Vector khat(d);
  bool degenerate = false;
  for (Index freq = 0; freq < d; ++freq) {
    const double denom = xh.row(freq).squaredNorm();
    if (denom <= 0) {
      khat(freq) = 0;  // zero frequency row: zero fill
      degenerate = true;
      continue;
    }
    khat(freq) = (xh.row(freq).conjugate().cwiseProduct(yh.row(freq))).sum() / denom;
  }
  return {f.adjoint() * khat.asDiagonal() * f, degenerate};
}

}  // namespace detail

struct PiDmdResult {
  Matrix K;
  DmdResult dmd;
  bool degenerate_rows = false;  // zero rows/frequencies were zero-filled
};

/// Exact minimizer of ||Y - K X||_F with K constrained to the chosen matrix
/// manifold.
inline PiDmdResult pidmd(const SnapshotPair& pair, ManifoldKind kind) {
  validate(pair);
  const Index d = pair.dim();
  PiDmdResult out;
  switch (kind) {
    case ManifoldKind::Orthogonal:
      out.K = detail::procrustes_orthogonal(pair.X, pair.Y);
      break;
    case ManifoldKind::Symmetric:
      out.K = detail::procrustes_symmetric(pair.X, pair.Y);
      break;
    case ManifoldKind::Causal: {
      auto [k, degenerate] = detail::procrustes_causal(pair.X, pair.Y);
      out.K = std::move(k);
      out.degenerate_rows = degenerate;
      break;
    }
    case ManifoldKind::Circulant: {
      auto [k, degenerate] = detail::procrustes_circulant(pair.X, pair.Y);
      out.K = std::move(k);
      out.degenerate_rows = degenerate;
      break;
    }
  }
  EigResult ed =
      kind == ManifoldKind::Orthogonal ? unitary_eig(out.K) : eig(out.K);
  out.dmd.eigenvalues = ed.values;
  out.dmd.modes = ed.vectors;
  out.dmd.amplitudes = pinv(ed.vectors) * pair.X.col(0);
  out.dmd.rank = d;
  out.dmd.kind = std::string("pidmd:") + manifold_name(kind);
  detail::sort_dmd(out.dmd);
  return out;
}

/// Measure-preserving EDMD output. K is a G-isometry (K* G K = G) with
/// unit-modulus eigenvalues.
struct MpEdmdResult {
  Matrix K;              // N x N
  Matrix V;              // N x N eigenvector coefficients, R V unitary
  Vector eigenvalues;    // unit modulus
  Matrix G;              // Gram matrix used
  Matrix R;              // Cholesky-like factor from the economy QR, G = R* R
  Matrix koopman_modes;  // N x d
};

/// mpEDMD: economy QR of the weighted feature matrix, SVD of
/// (R^{-1})* PsiY* D^{1/2} Q, unitary eigendecomposition of U2 U1* via a
/// Schur decomposition, then K = R^{-1} U2 U1* R and V = R^{-1} Vhat.
inline MpEdmdResult mpedmd(const EdmdMatrices& mats) {
  const RealVector wsqrt = mats.weights.cwiseSqrt();
  detail::WeightedFeatureQr qr = detail::weighted_feature_qr(mats);  // RankError when deficient
  const Index n = mats.observables();
  const Matrix rinv =
      qr.R.template triangularView<Eigen::Upper>().solve(Matrix::Identity(n, n));
  // (R^{-1})* PsiY* D^{1/2} Q, in real arithmetic when possible
  Matrix target;
  if (mats.real_features) {
    RealMatrix wy = wsqrt.asDiagonal() * mats.PsiYr;
    target = (rinv.real().transpose() * (wy.transpose() * qr.Qr)).cast<Complex>();
  } else {
    Matrix wy = wsqrt.asDiagonal() * mats.PsiY;
    target = rinv.adjoint() * (wy.adjoint() * qr.Q);
  }
  // Procrustes solution: B = U2 U1* for the SVD U1 S U2* of the target
  SvdResult svd = detail::thin_svd(target);
  const Matrix u2u1 = svd.V * svd.U.adjoint();
  EigResult ed = unitary_eig(u2u1);
  MpEdmdResult out;
  out.K = rinv * u2u1 * qr.R;
  out.V = rinv * ed.vectors;
  out.eigenvalues = ed.values;
  out.G = mats.G;
  out.R = qr.R;
  // Koopman modes: Phi^T = V^{-1} (D^{1/2}PsiX)^+ D^{1/2} X^T; with the QR
  // factorization the pseudoinverse solve is R^{-1} Q*.
  const Matrix rhs =
      qr.q_adjoint_times(Matrix(wsqrt.asDiagonal() * Matrix(mats.states.transpose())));
  const Matrix coeff = qr.R.template triangularView<Eigen::Upper>().solve(rhs);  // N x d
  out.koopman_modes = out.V.partialPivLu().solve(coeff);
  return out;
}

/// Atomic spectral measure on the unit circle: angles in [-pi, pi) with
/// nonnegative weights. Atoms are kept sorted; angles within 1e-12 are
/// merged.
struct SpectralMeasure {
  struct Atom {
    double theta;
    double weight;
  };
  std::vector<Atom> atoms;
  bool normalized = false;

  double total() const {
    double t = 0;
    for (const Atom& a : atoms) t += a.weight;
    return t;
  }
};

namespace detail {

inline double wrap_angle(double theta) {
  // map into [-pi, pi)
  double t = std::remainder(theta, 2.0 * M_PI);
  if (t >= M_PI) t -= 2.0 * M_PI;
  if (t < -M_PI) t += 2.0 * M_PI;
  return t;
}

inline void sort_and_merge(SpectralMeasure& mu) {
  std::sort(mu.atoms.begin(), mu.atoms.end(),
            [](const auto& a, const auto& b) { return a.theta < b.theta; });
  std::vector<SpectralMeasure::Atom> merged;
  for (const auto& a : mu.atoms) {
    if (!merged.empty() && a.theta - merged.back().theta <= 1e-12)
      merged.back().weight += a.weight;
    else
      merged.push_back(a);
  }
  mu.atoms = std::move(merged);
}

}  // namespace detail

/// Spectral-measure approximation from an mpEDMD result: atoms at the
/// eigenvalue angles with weights |v_j* G g|^2. With `normalize` set, g is
/// rescaled so that g* G g = 1 and the weights sum to one.
inline SpectralMeasure spectral_measure(const MpEdmdResult& res, const Vector& g_coeffs,
                                        bool normalize = true) {
  if (g_coeffs.size() != res.K.rows())
    throw DimensionError("spectral_measure: observable coefficients must have length N");
  Vector g = g_coeffs;
  const Complex gg = (g.adjoint() * res.G * g)(0);
  if (!(gg.real() > 0)) throw InputError("spectral_measure: observable has zero G-norm");
  if (normalize) g /= std::sqrt(gg.real());
  const Vector vg = res.V.adjoint() * (res.G * g);
  SpectralMeasure mu;
  mu.normalized = normalize;
  mu.atoms.reserve(static_cast<size_t>(res.eigenvalues.size()));
  for (Index j = 0; j < res.eigenvalues.size(); ++j)
    mu.atoms.push_back({detail::wrap_angle(std::arg(res.eigenvalues(j))), std::norm(vg(j))});
  detail::sort_and_merge(mu);
  return mu;
}

/// F(theta) = total weight of atoms with angle <= theta, measured from -pi.
inline double measure_cdf(const SpectralMeasure& mu, double theta) {
  if (theta < -M_PI || theta >= M_PI)
    throw InputError("measure_cdf: angle must lie in [-pi, pi)");
  double acc = 0;
  for (const auto& a : mu.atoms) {
    if (a.theta <= theta)
      acc += a.weight;
    else
      break;
  }
  return acc;
}

/// Wasserstein-1 distance between two normalized atomic measures on the cut
/// circle [-pi, pi): the integral of |F_mu - F_nu|, evaluated exactly from
/// the sorted breakpoints.
inline double wasserstein1(const SpectralMeasure& mu, const SpectralMeasure& nu) {
  if (!mu.normalized || !nu.normalized)
    throw InputError("wasserstein1: both measures must be normalized");
  std::vector<double> cuts{-M_PI};
  for (const auto& a : mu.atoms) cuts.push_back(a.theta);
  for (const auto& a : nu.atoms) cuts.push_back(a.theta);
  cuts.push_back(M_PI);
  std::sort(cuts.begin(), cuts.end());
  double acc = 0;
  double fmu = 0, fnu = 0;
  size_t im = 0, in = 0;
  for (size_t i = 0; i + 1 < cuts.size(); ++i) {
    while (im < mu.atoms.size() && mu.atoms[im].theta <= cuts[i]) fmu += mu.atoms[im++].weight;
    while (in < nu.atoms.size() && nu.atoms[in].theta <= cuts[i]) fnu += nu.atoms[in++].weight;
    acc += std::abs(fmu - fnu) * (cuts[i + 1] - cuts[i]);
  }
  return acc;
}

}  // namespace kmv
