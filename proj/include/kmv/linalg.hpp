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

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <Eigen/SVD>

#include <algorithm>
#include <numeric>
#include <utility>
#include <vector>

#include "kmv/core.hpp"

namespace kmv {

// Dense kernels shared by every estimator. Factorizations are backed by
// Eigen; the contracts below (ordering, sign conventions, rank cutoffs)
// are fixed here so the rest of the library can rely on them.

struct SvdResult {
  Matrix U;      // m x k, orthonormal columns
  RealVector S;  // k, nonnegative, descending
  Matrix V;      // n x k, orthonormal columns
};

struct EigResult {
  Vector values;
  Matrix vectors;
};

struct QrResult {
  Matrix Q;  // m x n, orthonormal columns
  Matrix R;  // n x n, upper triangular, positive real diagonal
};

namespace detail {

inline SvdResult thin_svd(const Matrix& a) {
  // BDC is much faster for tall matrices; Jacobi is more accurate for tiny ones.
  SvdResult out;
  if (std::min(a.rows(), a.cols()) <= 16) {
    Eigen::JacobiSVD<Matrix> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
    out.U = svd.matrixU();
    out.S = svd.singularValues();
    out.V = svd.matrixV();
  } else {
    Eigen::BDCSVD<Matrix> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
    out.U = svd.matrixU();
    out.S = svd.singularValues();
    out.V = svd.matrixV();
  }
  return out;
}

inline double default_rank_cutoff(Index rows, Index cols, double sigma_max) {
  return static_cast<double>(std::max(rows, cols)) * kEps * sigma_max;
}

}  // namespace detail

/// Top-r singular triplet of A. Singular values are sorted descending.
inline SvdResult truncated_svd(const Matrix& a, Index r) {
  require_finite(a, "truncated_svd");
  if (r < 1 || r > std::min(a.rows(), a.cols()))
    throw DimensionError("truncated_svd: rank " + std::to_string(r) + " outside [1, min(" +
                         std::to_string(a.rows()) + "," + std::to_string(a.cols()) + ")]");
  SvdResult full = detail::thin_svd(a);
  SvdResult out;
  out.U = full.U.leftCols(r);
  out.S = full.S.head(r);
  out.V = full.V.leftCols(r);
  return out;
}

/// Economy QR with the sign convention fixed so that diag(R) > 0.
/// Requires full column rank; throws RankError with the estimated rank otherwise.
inline QrResult economy_qr(const Matrix& a) {
  require_finite(a, "economy_qr");
  if (a.rows() < a.cols()) throw DimensionError("economy_qr: need rows >= cols");
  Eigen::HouseholderQR<Matrix> qr(a);
  Matrix r = qr.matrixQR().topRows(a.cols()).template triangularView<Eigen::Upper>();
  Matrix q = qr.householderQ() * Matrix::Identity(a.rows(), a.cols());
  const double dmax = r.diagonal().cwiseAbs().maxCoeff();
  const double tol = detail::default_rank_cutoff(a.rows(), a.cols(), dmax);
  Index rank = 0;
  for (Index i = 0; i < a.cols(); ++i)
    if (std::abs(r(i, i)) > tol) ++rank;
  if (rank < a.cols())
    throw RankError("economy_qr: rank-deficient input, numerical rank " + std::to_string(rank) +
                    " < " + std::to_string(a.cols()));
  for (Index i = 0; i < a.cols(); ++i) {
    Complex d = r(i, i);
    Complex phase = d / std::abs(d);
    r.row(i) *= std::conj(phase);
    q.col(i) *= phase;
  }
  return {std::move(q), std::move(r)};
}

/// Orthonormal basis of the columns of A via Householder QR. Unlike
/// economy_qr this never fails on rank-deficient input; trailing columns
/// then span an arbitrary complement (MATLAB qr(...,'econ') semantics).
inline Matrix householder_basis(const Matrix& a) {
  require_finite(a, "householder_basis");
  Eigen::HouseholderQR<Matrix> qr(a);
  return qr.householderQ() * Matrix::Identity(a.rows(), std::min(a.rows(), a.cols()));
}

/// Eigendecomposition of a square matrix. Residual contract:
/// ||A v - lambda v|| <= ~1e-8 * ||A|| * ||v|| for each returned pair.
/// Exactly-real input goes through the real Schur solver, which is several
/// times faster at large n.
inline EigResult eig(const Matrix& a) {
  require_finite(a, "eig");
  if (a.rows() != a.cols()) throw DimensionError("eig: matrix must be square");
  if (a.imag().isZero(0.0)) {
    Eigen::EigenSolver<RealMatrix> es(a.real());
    if (es.info() != Eigen::Success)
      throw NumericalError("eig: QR iteration failed to converge (n=" + std::to_string(a.rows()) +
                           ")");
    return {es.eigenvalues(), es.eigenvectors()};
  }
  Eigen::ComplexEigenSolver<Matrix> es(a);
  if (es.info() != Eigen::Success)
    throw NumericalError("eig: QR iteration failed to converge (n=" + std::to_string(a.rows()) + ")");
  return {es.eigenvalues(), es.eigenvectors()};
}

/// Eigendecomposition of a numerically unitary matrix via a Schur
/// decomposition. The returned vectors are orthonormal and eigenvalues are
/// projected onto the unit circle.
inline EigResult unitary_eig(const Matrix& u) {
  require_finite(u, "unitary_eig");
  if (u.rows() != u.cols()) throw DimensionError("unitary_eig: matrix must be square");
  Matrix gram = u.adjoint() * u - Matrix::Identity(u.cols(), u.cols());
  Eigen::SelfAdjointEigenSolver<Matrix> check(gram, Eigen::EigenvaluesOnly);
  const double dev = check.eigenvalues().cwiseAbs().maxCoeff();
  if (dev > 1e-6)
    throw InputError("unitary_eig: input is not numerically unitary, ||U*U - I|| = " +
                     std::to_string(dev));
  Eigen::ComplexSchur<Matrix> schur(u);
  if (schur.info() != Eigen::Success) throw NumericalError("unitary_eig: Schur iteration failed");
  // U is normal, so T is diagonal up to roundoff and the Schur vectors are
  // an orthonormal eigenbasis.
  Vector values = schur.matrixT().diagonal();
  for (Index i = 0; i < values.size(); ++i) {
    const double m = std::abs(values(i));
    values(i) = (m == 0.0) ? Complex(1, 0) : values(i) / m;
  }
  return {std::move(values), schur.matrixU()};
}

/// Moore-Penrose pseudoinverse. Singular values below rtol * sigma_max are
/// treated as zero; rtol < 0 selects max(m,n) * eps.
inline Matrix pinv(const Matrix& a, double rtol = -1.0) {
  require_finite(a, "pinv");
  if (a.size() == 0) return Matrix(a.cols(), a.rows());
  SvdResult svd = detail::thin_svd(a);
  if (rtol < 0) rtol = static_cast<double>(std::max(a.rows(), a.cols())) * kEps;
  const double cutoff = rtol * (svd.S.size() > 0 ? svd.S(0) : 0.0);
  RealVector sinv = RealVector::Zero(svd.S.size());
  for (Index i = 0; i < svd.S.size(); ++i)
    if (svd.S(i) > cutoff && svd.S(i) > 0) sinv(i) = 1.0 / svd.S(i);
  return svd.V * sinv.asDiagonal() * svd.U.adjoint();
}

/// Smallest singular value and the corresponding right singular vector.
inline std::pair<double, Vector> smallest_singular_pair(const Matrix& a) {
  require_finite(a, "smallest_singular_pair");
  if (a.rows() < a.cols()) throw DimensionError("smallest_singular_pair: need rows >= cols");
  SvdResult svd = detail::thin_svd(a);
  const Index last = svd.S.size() - 1;
  return {svd.S(last), svd.V.col(last)};
}

/// Principal matrix square root via the complex Schur recurrence.
/// Fails with BranchError if any eigenvalue sits on the closed negative
/// real axis.
inline Matrix principal_sqrtm(const Matrix& a) {
  require_finite(a, "principal_sqrtm");
  if (a.rows() != a.cols()) throw DimensionError("principal_sqrtm: matrix must be square");
  const Index n = a.rows();
  Eigen::ComplexSchur<Matrix> schur(a);
  if (schur.info() != Eigen::Success) throw NumericalError("principal_sqrtm: Schur iteration failed");
  const Matrix& t = schur.matrixT();
  const double scale = t.diagonal().cwiseAbs().maxCoeff();
  for (Index i = 0; i < n; ++i) {
    const Complex lam = t(i, i);
    if (std::abs(lam) <= 1e-14 * scale || (lam.real() < 0.0 && std::abs(lam.imag()) <= 1e-14 * std::abs(lam.real())))
      throw BranchError("principal_sqrtm: eigenvalue on the closed negative real axis");
  }
  Matrix s = Matrix::Zero(n, n);
  for (Index i = 0; i < n; ++i) s(i, i) = std::sqrt(t(i, i));
  for (Index off = 1; off < n; ++off) {
    for (Index i = 0; i + off < n; ++i) {
      const Index j = i + off;
      Complex acc = t(i, j);
      for (Index k = i + 1; k < j; ++k) acc -= s(i, k) * s(k, j);
      s(i, j) = acc / (s(i, i) + s(j, j));
    }
  }
  const Matrix& q = schur.matrixU();
  return q * s * q.adjoint();
}

struct KmeansOptions {
  int max_iters = 100;
  int restarts = 10;
};

/// Lloyd's algorithm with k-means++ seeding. points is M x d (rows are
/// points); returns k x d centers. Deterministic for a fixed seed. Empty
/// clusters are re-seeded at the farthest point.
inline RealMatrix kmeans(const RealMatrix& points, Index k, std::uint64_t seed,
                         const KmeansOptions& opt = {}) {
  require_finite(points, "kmeans");
  const Index m = points.rows(), d = points.cols();
  if (k < 1 || k > m) throw DimensionError("kmeans: need 1 <= k <= number of points");

  const RealVector pnorm2 = points.rowwise().squaredNorm();
  constexpr Index kBlock = 4096;

  auto assign = [&](const RealMatrix& centers, Eigen::VectorXi& labels, RealVector& mind2) {
    const RealVector cnorm2 = centers.rowwise().squaredNorm();
    for (Index start = 0; start < m; start += kBlock) {
      const Index len = std::min(kBlock, m - start);
      RealMatrix d2 = (-2.0 * points.middleRows(start, len) * centers.transpose());
      d2.colwise() += pnorm2.segment(start, len);
      d2.rowwise() += cnorm2.transpose();
      for (Index i = 0; i < len; ++i) {
        Index best;
        mind2(start + i) = d2.row(i).minCoeff(&best);
        labels(start + i) = static_cast<int>(best);
      }
    }
  };

  RealMatrix best_centers;
  double best_inertia = std::numeric_limits<double>::infinity();

  for (int restart = 0; restart < opt.restarts; ++restart) {
    Rng rng(seed + 0x1000ull * static_cast<std::uint64_t>(restart));
    RealMatrix centers(k, d);

    // k-means++ seeding
    centers.row(0) = points.row(static_cast<Index>(rng.uniform_index(static_cast<std::uint64_t>(m))));
    RealVector mind2 =
        (points.rowwise() - centers.row(0)).rowwise().squaredNorm();
    for (Index c = 1; c < k; ++c) {
      const double total = mind2.sum();
      Index pick = 0;
      if (total <= 0) {
        pick = static_cast<Index>(rng.uniform_index(static_cast<std::uint64_t>(m)));
      } else {
        double target = rng.uniform() * total, acc = 0;
        for (Index i = 0; i < m; ++i) {
          acc += mind2(i);
          if (acc >= target) {
            pick = i;
            break;
          }
        }
      }
      centers.row(c) = points.row(pick);
      mind2 = mind2.cwiseMin((points.rowwise() - centers.row(c)).rowwise().squaredNorm());
    }

    Eigen::VectorXi labels = Eigen::VectorXi::Constant(m, -1);
    Eigen::VectorXi prev = labels;
    RealVector dist2(m);
    for (int iter = 0; iter < opt.max_iters; ++iter) {
      assign(centers, labels, dist2);
      if ((labels.array() == prev.array()).all()) break;
      prev = labels;
      RealMatrix sums = RealMatrix::Zero(k, d);
      Eigen::VectorXi counts = Eigen::VectorXi::Zero(k);
      for (Index i = 0; i < m; ++i) {
        sums.row(labels(i)) += points.row(i);
        counts(labels(i)) += 1;
      }
      for (Index c = 0; c < k; ++c) {
        if (counts(c) > 0) {
          centers.row(c) = sums.row(c) / counts(c);
        } else {
          Index far;
          dist2.maxCoeff(&far);
          centers.row(c) = points.row(far);
          dist2(far) = 0;
        }
      }
    }
    assign(centers, labels, dist2);
    const double inertia = dist2.sum();
    if (inertia < best_inertia) {
      best_inertia = inertia;
      best_centers = centers;
    }
  }
  return best_centers;
}

struct CosampResult {
  Vector x;
  double residual_norm = 0.0;
  bool converged = false;
  int iterations = 0;
};

/// CoSaMP greedy sparse recovery: s-sparse x minimizing ||y - Phi x|| over
/// the identified support. Columns of Phi are normalized internally.
inline CosampResult cosamp(const Matrix& phi, const Vector& y, Index s, int max_iters = 50) {
  require_finite(phi, "cosamp");
  require_finite(y, "cosamp");
  const Index p = phi.rows(), n = phi.cols();
  if (y.size() != p) throw DimensionError("cosamp: measurement length mismatch");
  if (s < 1 || p < 2 * s) throw DimensionError("cosamp: need sparsity >= 1 and rows >= 2*sparsity");

  CosampResult out;
  out.x = Vector::Zero(n);
  const double ynorm = y.norm();
  if (ynorm == 0.0) {
    out.converged = true;
    return out;
  }

  RealVector colnorm(n);
  Matrix a(p, n);
  for (Index j = 0; j < n; ++j) {
    colnorm(j) = phi.col(j).norm();
    if (colnorm(j) > 0)
      a.col(j) = phi.col(j) / colnorm(j);
    else
      a.col(j) = phi.col(j);
  }

  const double tol = 1e-10 * ynorm;
  Vector xs = Vector::Zero(n);  // solution w.r.t. normalized columns
  Vector r = y;
  std::vector<Index> support;  // current s-sparse support
  double best_res = ynorm;
  Vector best_x = xs;

  auto top_indices = [&](const RealVector& mags, Index count) {
    std::vector<Index> idx(static_cast<size_t>(mags.size()));
    std::iota(idx.begin(), idx.end(), Index{0});
    std::partial_sort(idx.begin(), idx.begin() + count, idx.end(),
                      [&](Index i, Index j) { return mags(i) > mags(j); });
    idx.resize(static_cast<size_t>(count));
    return idx;
  };

  int it = 0;
  for (; it < max_iters; ++it) {
    RealVector proxy = (a.adjoint() * r).cwiseAbs();
    std::vector<Index> merged = top_indices(proxy, std::min<Index>(2 * s, n));
    merged.insert(merged.end(), support.begin(), support.end());
    std::sort(merged.begin(), merged.end());
    merged.erase(std::unique(merged.begin(), merged.end()), merged.end());

    Matrix sub(p, static_cast<Index>(merged.size()));
    for (size_t j = 0; j < merged.size(); ++j) sub.col(static_cast<Index>(j)) = a.col(merged[j]);
    Vector b = sub.colPivHouseholderQr().solve(y);

    RealVector mags = b.cwiseAbs();
    std::vector<Index> local = top_indices(mags, std::min<Index>(s, static_cast<Index>(merged.size())));
    support.clear();
    xs.setZero();
    for (Index li : local) {
      support.push_back(merged[static_cast<size_t>(li)]);
      xs(merged[static_cast<size_t>(li)]) = b(li);
    }
    // re-solve restricted to the pruned support
    Matrix subs(p, static_cast<Index>(support.size()));
    for (size_t j = 0; j < support.size(); ++j) subs.col(static_cast<Index>(j)) = a.col(support[j]);
    Vector bs = subs.colPivHouseholderQr().solve(y);
    xs.setZero();
    for (size_t j = 0; j < support.size(); ++j) xs(support[j]) = bs(static_cast<Index>(j));

    r = y - a * xs;
    const double res = r.norm();
    if (res < best_res) {
      best_res = res;
      best_x = xs;
    }
    if (res <= tol) {
      ++it;
      break;
    }
  }

  for (Index j = 0; j < n; ++j)
    out.x(j) = colnorm(j) > 0 ? best_x(j) / colnorm(j) : best_x(j);
  out.residual_norm = best_res;
  out.converged = best_res <= tol;
  out.iterations = it;
  return out;
}

/// Unitary DFT matrix, F(j,k) = exp(-2*pi*i*j*k/n) / sqrt(n). Symmetric.
inline Matrix dft_matrix(Index n) {
  Matrix f(n, n);
  const double w = -2.0 * M_PI / static_cast<double>(n);
  for (Index j = 0; j < n; ++j)
    for (Index k = 0; k < n; ++k) f(j, k) = std::polar(1.0 / std::sqrt(static_cast<double>(n)),
                                                       w * static_cast<double>(j * k));
  return f;
}

/// Largest principal angle (radians) between the column spans of A and B,
/// computed through the sine so small angles do not lose precision.
inline double subspace_angle(const Matrix& a, const Matrix& b) {
  Matrix qa = householder_basis(a);
  Matrix qb = householder_basis(b);
  Matrix residual_b = qb - qa * (qa.adjoint() * qb);
  Matrix residual_a = qa - qb * (qb.adjoint() * qa);
  Eigen::JacobiSVD<Matrix> sb(residual_b);
  Eigen::JacobiSVD<Matrix> sa(residual_a);
  const double s = std::clamp(std::max(sb.singularValues().maxCoeff(),
                                       sa.singularValues().maxCoeff()),
                              0.0, 1.0);
  return std::asin(s);
}

}  // namespace kmv
