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

#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "kmv/core.hpp"
#include "kmv/data.hpp"
#include "kmv/linalg.hpp"

namespace kmv {

// Regression-view estimators: exact DMD and the KMD forecast, the
// noise-robust variants (fbDMD, tlsDMD, optDMD), the sensor-noise bias
// factor, DMD with control and multiresolution DMD.

/// Output of every regression variant. For optDMD and mrDMD the eigenvalues
/// are continuous-time exponents; `continuous_time` distinguishes the two
/// conventions.
struct DmdResult {
  Vector eigenvalues;
  Matrix modes;       // d x r
  Vector amplitudes;  // r
  Index rank = 0;
  std::string kind;
  bool continuous_time = false;
  bool converged = true;
  double residual = 0.0;

  Index mode_count() const { return eigenvalues.size(); }
};

namespace detail {

/// Fixed output order: descending |lambda|, ties by descending Re, then Im.
inline void sort_dmd(DmdResult& res) {
  const Index r = res.eigenvalues.size();
  std::vector<Index> idx(static_cast<size_t>(r));
  std::iota(idx.begin(), idx.end(), Index{0});
  std::sort(idx.begin(), idx.end(), [&](Index a, Index b) {
    const Complex la = res.eigenvalues(a), lb = res.eigenvalues(b);
    if (std::abs(la) != std::abs(lb)) return std::abs(la) > std::abs(lb);
    if (la.real() != lb.real()) return la.real() > lb.real();
    return la.imag() > lb.imag();
  });
  Vector ev(r);
  Matrix modes(res.modes.rows(), r);
  Vector amp(r);
  for (Index i = 0; i < r; ++i) {
    ev(i) = res.eigenvalues(idx[static_cast<size_t>(i)]);
    modes.col(i) = res.modes.col(idx[static_cast<size_t>(i)]);
    amp(i) = res.amplitudes.size() == r ? res.amplitudes(idx[static_cast<size_t>(i)]) : Complex(0, 0);
  }
  res.eigenvalues = std::move(ev);
  res.modes = std::move(modes);
  res.amplitudes = std::move(amp);
}

inline void check_truncation_rank(const RealVector& s, Index r, Index rows, Index cols,
                                  const char* who) {
  const double cutoff = detail::default_rank_cutoff(rows, cols, s(0));
  if (s(r - 1) <= cutoff)
    throw RankError(std::string(who) + ": singular value " + std::to_string(r) +
                    " is below the rank cutoff; use a smaller rank");
}

}  // namespace detail

struct ExactDmdOptions {
  // Modes are "often further scaled by Lambda^{-1}"; unscaled exact modes
  // are the default here.
  bool scale_modes_by_inverse_eigenvalue = false;
};

/// The workhorse estimator: truncated SVD of X, compression
/// Ktilde = U* Y V Sigma^{-1}, eigendecomposition, exact modes
/// Phi = Y V Sigma^{-1} W and amplitudes b = Phi^+ x0.
inline DmdResult exact_dmd(const SnapshotPair& pair, Index r, const ExactDmdOptions& opt = {}) {
  validate(pair);
  if (r < 1 || r > std::min(pair.dim(), pair.samples()))
    throw DimensionError("exact_dmd: rank outside [1, min(d, M)]");
  SvdResult svd = truncated_svd(pair.X, r);
  detail::check_truncation_rank(svd.S, r, pair.dim(), pair.samples(), "exact_dmd");
  const Matrix yv_sinv = pair.Y * svd.V * svd.S.cwiseInverse().asDiagonal();
  const Matrix ktilde = svd.U.adjoint() * yv_sinv;
  EigResult ed = eig(ktilde);
  DmdResult res;
  res.eigenvalues = ed.values;
  res.modes = yv_sinv * ed.vectors;
  if (opt.scale_modes_by_inverse_eigenvalue) {
    for (Index j = 0; j < res.eigenvalues.size(); ++j)
      if (std::abs(res.eigenvalues(j)) > 0) res.modes.col(j) /= res.eigenvalues(j);
  }
  res.amplitudes = pinv(res.modes) * pair.X.col(0);
  res.rank = r;
  res.kind = "exact";
  detail::sort_dmd(res);
  return res;
}

/// Linear KMD forecast: columns Phi Lambda^k b for k = 0..n with
/// b = Phi^+ x0. Requires discrete-time eigenvalues.
inline Matrix kmd_forecast(const DmdResult& res, const Vector& x0, Index n) {
  if (res.continuous_time)
    throw InputError("kmd_forecast: result carries continuous-time exponents");
  const Vector b = pinv(res.modes) * x0;
  Matrix out(res.modes.rows(), n + 1);
  Vector lk = Vector::Ones(res.eigenvalues.size());
  for (Index k = 0; k <= n; ++k) {
    out.col(k) = res.modes * (lk.asDiagonal() * b);
    lk = lk.cwiseProduct(res.eigenvalues);
  }
  return out;
}

enum class FbBranch {
  Auto,             // positive-real when the bandwidth condition holds, else nearest-to-forward
  PositiveReal,     // principal square root
  NearestToForward  // per-eigenvalue sign choice closest to the forward propagator
};

namespace detail {

/// Square root of P with each eigenvalue's sign chosen, in P's
/// eigencoordinates, to be closest to the matching diagonal entry of the
/// forward propagator.
inline Matrix nearest_root(const Matrix& p, const Matrix& k_forward) {
  EigResult ed = eig(p);
  const Matrix w = ed.vectors;
  const Matrix f = w.partialPivLu().solve(k_forward * w);
  Vector roots(ed.values.size());
  for (Index j = 0; j < ed.values.size(); ++j) {
    const Complex s = std::sqrt(ed.values(j));
    roots(j) = std::abs(s - f(j, j)) <= std::abs(-s - f(j, j)) ? s : -s;
  }
  Matrix sqrt_p = w * roots.asDiagonal() * w.inverse();
  return sqrt_p;
}

}  // namespace detail

/// Forward-backward DMD: geometric mean of the forward and backward
/// propagators, debiasing additive sensor noise.
inline DmdResult fbdmd(const SnapshotPair& pair, Index r, FbBranch branch = FbBranch::Auto) {
  validate(pair);
  if (r < 1 || r > std::min(pair.dim(), pair.samples()))
    throw DimensionError("fbdmd: rank outside [1, min(d, M)]");
  SvdResult svd = truncated_svd(pair.X, r);
  detail::check_truncation_rank(svd.S, r, pair.dim(), pair.samples(), "fbdmd");
  const Matrix xt = svd.U.adjoint() * pair.X;  // r x M
  const Matrix yt = svd.U.adjoint() * pair.Y;
  SvdResult sx = truncated_svd(xt, r);
  SvdResult sy = truncated_svd(yt, r);
  const double sy_cutoff = detail::default_rank_cutoff(yt.rows(), yt.cols(), sy.S(0));
  if (sy.S(r - 1) <= sy_cutoff)
    throw RankError("fbdmd: backward propagator is singular at this rank");
  const Matrix kf_t = sx.U.adjoint() * yt * sx.V * sx.S.cwiseInverse().asDiagonal();
  const Matrix kb_t = sy.U.adjoint() * xt * sy.V * sy.S.cwiseInverse().asDiagonal();
  const Matrix sf = yt * sx.V * sx.S.cwiseInverse().asDiagonal();
  const Matrix sb = xt * sy.V * sy.S.cwiseInverse().asDiagonal();
  const Matrix kf = sf * kf_t * pinv(sf);
  const Matrix kb = sb * kb_t * pinv(sb);
  Eigen::FullPivLU<Matrix> lu(kb);
  if (!lu.isInvertible()) throw RankError("fbdmd: backward propagator not invertible");
  const Matrix prod = kf * lu.inverse();

  Matrix ktilde;
  bool bandwidth_ok = true;
  {
    EigResult ef = eig(kf);
    for (Index j = 0; j < ef.values.size(); ++j)
      // |Im log(lambda)| < pi/2 per step <=> Re(lambda) > 0
      bandwidth_ok = bandwidth_ok && ef.values(j).real() > 0;
  }
  const FbBranch effective = branch == FbBranch::Auto
                                 ? (bandwidth_ok ? FbBranch::PositiveReal : FbBranch::NearestToForward)
                                 : branch;
  if (effective == FbBranch::PositiveReal) {
    try {
      ktilde = principal_sqrtm(prod);
    } catch (const BranchError&) {
      // branch cut hit: fall back to the eigencoordinate root
      ktilde = detail::nearest_root(prod, kf);
    }
  } else {
    ktilde = detail::nearest_root(prod, kf);
  }

  EigResult ed = eig(ktilde);
  DmdResult res;
  res.eigenvalues = ed.values;
  res.modes = pair.Y * svd.V * svd.S.cwiseInverse().asDiagonal() * ed.vectors;
  res.amplitudes = pinv(res.modes) * pair.X.col(0);
  res.rank = r;
  res.kind = "fb";
  detail::sort_dmd(res);
  return res;
}

/// Total least-squares DMD: stack the projected pair, split the right
/// nullspace-side basis, Ktilde = U2 U1^{-1}.
inline DmdResult tlsdmd(const SnapshotPair& pair, Index r) {
  validate(pair);
  if (r < 1) throw DimensionError("tlsdmd: rank must be >= 1");
  if (2 * r >= pair.samples())
    throw DimensionError("tlsdmd: requires r < M/2 (projection onto r POD modes)");
  if (r > pair.dim()) throw DimensionError("tlsdmd: rank exceeds state dimension");
  SvdResult svd = truncated_svd(pair.X, r);
  detail::check_truncation_rank(svd.S, r, pair.dim(), pair.samples(), "tlsdmd");
  Matrix z(2 * r, pair.samples());
  z.topRows(r) = svd.U.adjoint() * pair.X;
  z.bottomRows(r) = svd.U.adjoint() * pair.Y;
  SvdResult sz = truncated_svd(z, r);
  const Matrix u1 = sz.U.topRows(r);
  const Matrix u2 = sz.U.bottomRows(r);
  Eigen::FullPivLU<Matrix> lu(u1);
  if (!lu.isInvertible())
    throw RankError("tlsdmd: degenerate geometry, U1 block is singular");
  const Matrix ktilde = u2 * lu.inverse();
  EigResult ed = eig(ktilde);
  DmdResult res;
  res.eigenvalues = ed.values;
  res.modes = pair.Y * svd.V * svd.S.cwiseInverse().asDiagonal() * ed.vectors;
  res.amplitudes = pinv(res.modes) * pair.X.col(0);
  res.rank = r;
  res.kind = "tls";
  detail::sort_dmd(res);
  return res;
}

struct OptDmdOptions {
  int max_iters = 100;
  double tol = 1e-12;         // relative decrease of the residual
  double lm_lambda0 = 1e-3;   // initial Levenberg-Marquardt damping
  Vector initial_alpha;       // empty: initialize from exact DMD log-eigenvalues
};

namespace detail {

inline Matrix vandermonde_exp(const Vector& alpha, const RealVector& times) {
  Matrix phi(times.size(), alpha.size());
  for (Index i = 0; i < times.size(); ++i)
    for (Index j = 0; j < alpha.size(); ++j) phi(i, j) = std::exp(alpha(j) * times(i));
  return phi;
}

struct VarproState {
  Matrix residual;  // (M+1) x r projected residual
  Matrix b;         // coefficient matrix
  double norm = 0.0;
};

inline VarproState varpro_eval(const Vector& alpha, const RealVector& times, const Matrix& data_t) {
  VarproState st;
  const Matrix phi = vandermonde_exp(alpha, times);
  st.b = pinv(phi) * data_t;
  st.residual = data_t - phi * st.b;
  st.norm = st.residual.norm();
  return st;
}

}  // namespace detail

/// Optimized DMD via variable projection: minimize
/// || Xproj^T - Phi(alpha) B ||_F over continuous exponents alpha, with B
/// eliminated as Phi(alpha)^+ Xproj^T at every iterate. Levenberg-Marquardt
/// on alpha with finite-difference Jacobian.
inline DmdResult optdmd(const Matrix& data, const RealVector& times, Index r,
                        const OptDmdOptions& opt = {}) {
  require_finite(data, "optdmd");
  if (times.size() != data.cols())
    throw DimensionError("optdmd: need one sample time per snapshot column");
  for (Index i = 1; i < times.size(); ++i)
    if (times(i) <= times(i - 1)) throw InputError("optdmd: times must be strictly increasing");
  if (r < 1 || r > std::min(data.rows(), data.cols()))
    throw DimensionError("optdmd: rank outside [1, min(d, M+1)]");

  SvdResult svd = truncated_svd(data, r);
  const Matrix proj_t = (svd.U.adjoint() * data).transpose();  // (M+1) x r

  Vector alpha;
  if (opt.initial_alpha.size() > 0) {
    if (opt.initial_alpha.size() != r) throw DimensionError("optdmd: initial alpha length != rank");
    alpha = opt.initial_alpha;
  } else {
    // initial guess from exact DMD log-eigenvalues at the mean sampling step
    SnapshotPair pair;
    pair.X = data.leftCols(data.cols() - 1);
    pair.Y = data.rightCols(data.cols() - 1);
    pair.weights = RealVector::Constant(data.cols() - 1, 1.0 / static_cast<double>(data.cols() - 1));
    DmdResult init = exact_dmd(pair, r);
    const double dt_mean = (times(times.size() - 1) - times(0)) / static_cast<double>(times.size() - 1);
    alpha.resize(r);
    for (Index j = 0; j < r; ++j) {
      const Complex lam = init.eigenvalues(j);
      alpha(j) = std::abs(lam) > 0 ? std::log(lam) / dt_mean : Complex(-1.0 / dt_mean, 0);
    }
  }

  detail::VarproState st = detail::varpro_eval(alpha, times, proj_t);
  double lm = opt.lm_lambda0;
  const Index n_par = 2 * r;
  bool converged = false;
  int it = 0;
  for (; it < opt.max_iters; ++it) {
    // finite-difference Jacobian of the flattened real residual w.r.t.
    // (Re alpha_j, Im alpha_j); step 1e-7 * (1 + |alpha_j|)
    const Index n_res = 2 * st.residual.size();
    RealMatrix jac(n_res, n_par);
    RealVector r0(n_res);
    for (Index k = 0; k < st.residual.size(); ++k) {
      r0(2 * k) = st.residual.data()[k].real();
      r0(2 * k + 1) = st.residual.data()[k].imag();
    }
    for (Index j = 0; j < r; ++j) {
      const double h = 1e-7 * (1.0 + std::abs(alpha(j)));
      for (int part = 0; part < 2; ++part) {
        Vector a2 = alpha;
        a2(j) += part == 0 ? Complex(h, 0) : Complex(0, h);
        detail::VarproState st2 = detail::varpro_eval(a2, times, proj_t);
        for (Index k = 0; k < st2.residual.size(); ++k) {
          jac(2 * k, 2 * j + part) = (st2.residual.data()[k].real() - r0(2 * k)) / h;
          jac(2 * k + 1, 2 * j + part) = (st2.residual.data()[k].imag() - r0(2 * k + 1)) / h;
        }
      }
    }
    const RealMatrix jtj = jac.transpose() * jac;
    const RealVector jtr = jac.transpose() * r0;
    bool stepped = false;
    for (int attempt = 0; attempt < 25; ++attempt) {
      RealMatrix damped = jtj;
      damped.diagonal() += lm * jtj.diagonal().cwiseMax(1e-14);
      RealVector delta = damped.ldlt().solve(-jtr);
      Vector a2 = alpha;
      for (Index j = 0; j < r; ++j) a2(j) += Complex(delta(2 * j), delta(2 * j + 1));
      detail::VarproState st2 = detail::varpro_eval(a2, times, proj_t);
      if (st2.norm < st.norm) {
        alpha = a2;
        const double gain = (st.norm - st2.norm) / std::max(st.norm, 1e-300);
        st = st2;
        lm = std::max(lm * 0.5, 1e-12);
        stepped = true;
        if (gain < opt.tol) converged = true;  // stalled improvement: treat as optimum
        break;
      }
      lm *= 4.0;
    }
    if (!stepped) {
      // no descent direction even under heavy damping: stationary point
      converged = true;
      break;
    }
    if (st.norm <= 1e-14 * proj_t.norm()) converged = true;
    if (converged) break;
  }

  DmdResult res;
  res.eigenvalues = alpha;
  res.continuous_time = true;
  res.rank = r;
  res.kind = "opt";
  res.converged = converged && it < opt.max_iters;
  res.residual = st.norm;
  // modes: normalized columns of U B^T; amplitudes carry the norms
  const Matrix ub = svd.U * st.b.transpose();  // d x r
  res.modes.resize(data.rows(), r);
  res.amplitudes.resize(r);
  for (Index j = 0; j < r; ++j) {
    const double nrm = ub.col(j).norm();
    res.amplitudes(j) = nrm;
    res.modes.col(j) = ub.col(j);
    if (nrm > 0) res.modes.col(j) /= nrm;
  }
  detail::sort_dmd(res);
  return res;
}

/// Multiplicative sensor-noise bias factor of the projected DMD matrix:
/// I - E[N N*] (X X*)^{-1}. The expected noisy propagator is the clean one
/// times this factor.
inline Matrix noise_bias_factor(const Matrix& x_clean, const Matrix& noise_cov) {
  if (noise_cov.rows() != noise_cov.cols() || noise_cov.rows() != x_clean.rows())
    throw DimensionError("noise_bias_factor: covariance must be d x d for d-row data");
  const Matrix xxs = x_clean * x_clean.adjoint();
  Eigen::FullPivLU<Matrix> lu(xxs);
  if (!lu.isInvertible()) throw RankError("noise_bias_factor: X X* is singular");
  return Matrix::Identity(x_clean.rows(), x_clean.rows()) - noise_cov * lu.inverse();
}

/// Snapshot triplets for DMD with control.
struct ControlSnapshots {
  Matrix X;  // d x M
  Matrix Y;  // d x M
  Matrix U;  // q x M
};

/// DMD with control: truncated SVD of the stacked input [X; U] at rank p,
/// truncated SVD of Y at rank r, reduced operators Atilde (r x r) and
/// Btilde (r x q), eigenvalues/modes of the unforced part.
inline std::pair<DmdResult, Matrix> dmdc(const ControlSnapshots& snap, Index p, Index r) {
  if (snap.X.cols() != snap.Y.cols() || snap.X.cols() != snap.U.cols())
    throw DimensionError("dmdc: X, Y, U must share the snapshot count");
  const Index d = snap.X.rows(), q = snap.U.rows();
  if (p < 1 || p > d + q) throw DimensionError("dmdc: input-side rank outside [1, d+q]");
  if (r < 1 || r > d) throw DimensionError("dmdc: output-side rank outside [1, d]");
  Matrix omega(d + q, snap.X.cols());
  omega.topRows(d) = snap.X;
  omega.bottomRows(q) = snap.U;
  SvdResult si = truncated_svd(omega, p);
  detail::check_truncation_rank(si.S, p, d + q, snap.X.cols(), "dmdc (input SVD)");
  SvdResult so = truncated_svd(snap.Y, r);
  detail::check_truncation_rank(so.S, r, d, snap.Y.cols(), "dmdc (output SVD)");
  const Matrix u1 = si.U.topRows(d);     // d x p
  const Matrix u2 = si.U.bottomRows(q);  // q x p
  const Matrix yvs = snap.Y * si.V * si.S.cwiseInverse().asDiagonal();  // d x p
  const Matrix atilde = so.U.adjoint() * yvs * u1.adjoint() * so.U;
  const Matrix btilde = so.U.adjoint() * yvs * u2.adjoint();
  EigResult ed = eig(atilde);
  DmdResult res;
  res.eigenvalues = ed.values;
  res.modes = yvs * u1.adjoint() * so.U * ed.vectors;
  res.amplitudes = pinv(res.modes) * snap.X.col(0);
  res.rank = r;
  res.kind = "dmdc";
  detail::sort_dmd(res);
  return {std::move(res), btilde};
}

/// One node of the multiresolution decomposition. Slow modes carry
/// continuous exponents eta; amplitudes are fitted against local bin time
/// (t - t_start).
struct MrDmdNode {
  int level = 1;
  Index bin = 0;
  double t_start = 0.0;
  double t_end = 0.0;
  DmdResult slow;  // continuous_time = true; may hold zero modes
  std::unique_ptr<MrDmdNode> left;
  std::unique_ptr<MrDmdNode> right;
};

struct MrDmdOptions {
  double rho = 1.0;     // base cycle threshold: |Im eta| * span / (2 pi) <= rho
  Index max_modes = 8;  // per-level mode cap
};

namespace detail {

inline Matrix mrdmd_reconstruct_bin(const DmdResult& slow, const RealVector& local_times) {
  Matrix out = Matrix::Zero(slow.modes.rows(), local_times.size());
  for (Index k = 0; k < slow.mode_count(); ++k)
    for (Index t = 0; t < local_times.size(); ++t)
      out.col(t) += slow.modes.col(k) * (std::exp(slow.eigenvalues(k) * local_times(t)) *
                                         slow.amplitudes(k));
  return out;
}

inline void mrdmd_recurse(MrDmdNode& node, Matrix data, double dt, int level, int max_level,
                          const MrDmdOptions& opt) {
  const Index cols = data.cols();
  node.t_end = node.t_start + static_cast<double>(cols - 1) * dt;
  node.slow.continuous_time = true;
  node.slow.kind = "mrdmd";
  node.slow.modes.resize(data.rows(), 0);
  node.slow.eigenvalues.resize(0);
  node.slow.amplitudes.resize(0);

  if (cols < 4) return;  // too short to refine; leave an empty node

  const double span = node.t_end - node.t_start;
  const double scale = data.norm();
  if (scale > 0) {
    SnapshotPair pair;
    pair.X = data.leftCols(cols - 1);
    pair.Y = data.rightCols(cols - 1);
    pair.weights = RealVector::Constant(cols - 1, 1.0 / static_cast<double>(cols - 1));
    // rank: numerical rank of the bin, capped by the per-level budget
    SvdResult probe = truncated_svd(pair.X, std::min<Index>({data.rows(), cols - 1, opt.max_modes}));
    Index rank = 0;
    const double cutoff = 1e-10 * probe.S(0);
    for (Index i = 0; i < probe.S.size(); ++i)
      if (probe.S(i) > cutoff) ++rank;
    if (rank >= 1) {
      DmdResult all = exact_dmd(pair, rank);
      std::vector<Index> keep;
      for (Index k = 0; k < all.mode_count(); ++k) {
        if (std::abs(all.eigenvalues(k)) <= 0) continue;
        const Complex eta = std::log(all.eigenvalues(k)) / dt;
        const bool slow = std::abs(eta.imag()) * span / (2.0 * M_PI) <= opt.rho;
        // the deepest level keeps everything so the decomposition is complete
        if (slow || level == max_level) keep.push_back(k);
      }
      if (!keep.empty()) {
        node.slow.modes.resize(data.rows(), static_cast<Index>(keep.size()));
        node.slow.eigenvalues.resize(static_cast<Index>(keep.size()));
        for (size_t i = 0; i < keep.size(); ++i) {
          node.slow.modes.col(static_cast<Index>(i)) = all.modes.col(keep[i]);
          node.slow.eigenvalues(static_cast<Index>(i)) = std::log(all.eigenvalues(keep[i])) / dt;
        }
        // amplitudes: least squares of the kept modes against the whole bin
        RealVector local = RealVector::LinSpaced(cols, 0.0, span);
        Matrix design(data.rows() * cols, static_cast<Index>(keep.size()));
        for (size_t k = 0; k < keep.size(); ++k)
          for (Index t = 0; t < cols; ++t)
            design.block(t * data.rows(), static_cast<Index>(k), data.rows(), 1) =
                node.slow.modes.col(static_cast<Index>(k)) *
                std::exp(node.slow.eigenvalues(static_cast<Index>(k)) * local(t));
        Vector rhs(data.rows() * cols);
        for (Index t = 0; t < cols; ++t) rhs.segment(t * data.rows(), data.rows()) = data.col(t);
        node.slow.amplitudes = design.colPivHouseholderQr().solve(rhs);
        data -= detail::mrdmd_reconstruct_bin(node.slow, local);
      }
    }
    node.slow.rank = node.slow.mode_count();
  }

  if (level >= max_level) return;
  const Index half = cols / 2;
  node.left = std::make_unique<MrDmdNode>();
  node.left->level = level + 1;
  node.left->bin = node.bin * 2;
  node.left->t_start = node.t_start;
  mrdmd_recurse(*node.left, data.leftCols(half), dt, level + 1, max_level, opt);
  node.right = std::make_unique<MrDmdNode>();
  node.right->level = level + 1;
  node.right->bin = node.bin * 2 + 1;
  node.right->t_start = node.t_start + static_cast<double>(half) * dt;
  mrdmd_recurse(*node.right, data.rightCols(cols - half), dt, level + 1, max_level, opt);
}

}  // namespace detail

/// Multiresolution DMD: at each node the bin is decomposed with exact DMD,
/// modes with at most rho wavelengths across the bin are kept as slow,
/// their reconstruction is subtracted and the remainder is split in half.
inline MrDmdNode mrdmd(const Matrix& traj, double dt, int levels, const MrDmdOptions& opt = {}) {
  require_finite(traj, "mrdmd");
  if (levels < 1) throw DimensionError("mrdmd: need at least one level");
  if (traj.cols() < (Index{1} << levels) * 4)
    throw DimensionError("mrdmd: need at least 2^levels * 4 snapshots");
  MrDmdNode root;
  root.level = 1;
  root.bin = 0;
  root.t_start = 0.0;
  detail::mrdmd_recurse(root, traj, dt, 1, levels, opt);
  return root;
}

/// Sum over levels of the bin containing t of Phi exp(eta (t - t_bin)) b.
inline Vector mrdmd_reconstruct(const MrDmdNode& tree, double t) {
  if (t < tree.t_start - 1e-12 || t > tree.t_end + 1e-12)
    throw InputError("mrdmd_reconstruct: time outside the root span");
  Vector out = Vector::Zero(tree.slow.modes.rows());
  const MrDmdNode* node = &tree;
  while (node) {
    const double local = t - node->t_start;
    for (Index k = 0; k < node->slow.mode_count(); ++k)
      out += node->slow.modes.col(k) *
             (std::exp(node->slow.eigenvalues(k) * local) * node->slow.amplitudes(k));
    if (node->left && t <= node->left->t_end)
      node = node->left.get();
    else if (node->right)
      node = node->right.get();
    else
      node = nullptr;
  }
  return out;
}

/// Collects every node of a given level (1-based; root is level 1).
inline void mrdmd_level_nodes(const MrDmdNode& tree, int level, std::vector<const MrDmdNode*>& out) {
  if (tree.level == level) {
    out.push_back(&tree);
    return;
  }
  if (tree.left) mrdmd_level_nodes(*tree.left, level, out);
  if (tree.right) mrdmd_level_nodes(*tree.right, level, out);
}

}  // namespace kmv
