// Copyright 2026 The hqp Authors
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

#ifndef HQP_LINSYS_HPP_
#define HQP_LINSYS_HPP_

/**
 * @file
 * @brief Dense linear-algebra kernel.
 *
 * Null-space bases, equality-constrained KKT solves, minimum-norm particular
 * solutions, reduced-Hessian eigenvalues and the condensed Newton solve used
 * by the interior-point iteration. Everything is dense; target sizes are in
 * the tens to low thousands of variables.
 */

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>

#include "hqp/common.hpp"

namespace hqp::linsys {

/// Residual threshold (relative to the right-hand side) above which one step
/// of iterative refinement is taken.
inline constexpr double kRefineThreshold = 1e-10;
/// Upper limit on refinement passes for the Newton system.
inline constexpr int kMaxRefinements = 3;
/// Normwise backward error beyond which a Newton solve counts as a breakdown.
inline constexpr double kMaxBackwardError = 1e-8;

/// FNV-1a over the shape and raw bytes of a matrix.
inline std::uint64_t fingerprint(const Eigen::Ref<const Matrix>& a) {
  std::uint64_t h = 1469598103934665603ULL;
  auto mix = [&h](const void* data, std::size_t len) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < len; ++i) {
      h ^= p[i];
      h *= 1099511628211ULL;
    }
  };
  const Index rows = a.rows(), cols = a.cols();
  mix(&rows, sizeof(rows));
  mix(&cols, sizeof(cols));
  for (Index j = 0; j < cols; ++j) {
    for (Index i = 0; i < rows; ++i) {
      const double v = a(i, j);
      mix(&v, sizeof(v));
    }
  }
  return h;
}

struct NullspaceBasis {
  /// n x (n - m), orthonormal columns spanning {v : E v = 0}.
  Matrix Z;
  std::uint64_t source_fingerprint = 0;

  Index dim() const { return Z.cols(); }
  bool empty() const { return Z.cols() == 0; }
};

/// Orthonormal null-space basis from a column-pivoted Householder QR of E^T.
/// The trailing n - m columns of the orthogonal factor span null(E).
inline NullspaceBasis nullspace_basis(const Eigen::Ref<const Matrix>& E, Index n) {
  HQP_CHECK(E.cols() == n, ErrorCode::kDimensionMismatch, "E must have n columns");
  const Index m = E.rows();
  HQP_CHECK(m <= n, ErrorCode::kRankDeficient, "more equality rows than variables");
  NullspaceBasis out;
  out.source_fingerprint = fingerprint(E);
  if (m == 0) {
    out.Z = Matrix::Identity(n, n);
    return out;
  }
  Eigen::ColPivHouseholderQR<Matrix> qr(E.transpose());
  qr.setThreshold(static_cast<double>(std::max(m, n)) * 1e-12);
  HQP_CHECK(qr.rank() == m, ErrorCode::kRankDeficient,
            "numerical rank of E is " + std::to_string(qr.rank()) + " < m = " + std::to_string(m));
  const Matrix q = qr.householderQ() * Matrix::Identity(n, n);
  out.Z = q.rightCols(n - m);
  return out;
}

namespace detail {

/// Solves K z = b with partial-pivoting LU, taking one refinement step when the
/// relative residual exceeds kRefineThreshold. Returns the final relative
/// residual through `rel_residual`.
inline Vector lu_solve_refined(const Matrix& K, const Vector& b, double* rel_residual) {
  Eigen::PartialPivLU<Matrix> lu(K);
  Vector z = lu.solve(b);
  const double bnorm = b.norm();
  const double scale = bnorm > 0.0 ? bnorm : 1.0;
  Vector r = b - K * z;
  double rel = r.norm() / scale;
  if (rel > kRefineThreshold && z.allFinite()) {
    z += lu.solve(r);
    r = b - K * z;
    rel = r.norm() / scale;
  }
  if (rel_residual != nullptr) *rel_residual = rel;
  return z;
}

}  // namespace detail

struct EqualityKktSolution {
  Vector y;
  Vector nu;
  double rel_residual = 0.0;
};

/// Solves [[C, E^T], [E, 0]] (y; nu) = (rhs_top; rhs_bot).
inline EqualityKktSolution solve_equality_kkt(const Eigen::Ref<const Matrix>& C,
                                              const Eigen::Ref<const Matrix>& E,
                                              const Eigen::Ref<const Vector>& rhs_top,
                                              const Eigen::Ref<const Vector>& rhs_bot) {
  const Index n = C.rows();
  const Index m = E.rows();
  HQP_CHECK(C.cols() == n && E.cols() == n && rhs_top.size() == n && rhs_bot.size() == m,
            ErrorCode::kDimensionMismatch, "equality KKT dimensions");
  Matrix K = Matrix::Zero(n + m, n + m);
  K.topLeftCorner(n, n) = C;
  K.topRightCorner(n, m) = E.transpose();
  K.bottomLeftCorner(m, n) = E;
  Vector b(n + m);
  b << rhs_top, rhs_bot;

  Eigen::FullPivLU<Matrix> probe(K);
  HQP_CHECK(probe.isInvertible(), ErrorCode::kSingularKkt, "augmented KKT matrix is singular");

  EqualityKktSolution out;
  const Vector z = detail::lu_solve_refined(K, b, &out.rel_residual);
  HQP_CHECK(z.allFinite() && out.rel_residual <= 1e-8, ErrorCode::kSingularKkt,
            "augmented KKT backsolve failed");
  out.y = z.head(n);
  out.nu = z.tail(m);
  return out;
}

/// d = E^T (E E^T)^{-1} f, the minimum-norm solution of E d = f.
inline Vector min_norm_particular(const Eigen::Ref<const Matrix>& E,
                                  const Eigen::Ref<const Vector>& f) {
  const Index m = E.rows();
  const Index n = E.cols();
  HQP_CHECK(f.size() == m, ErrorCode::kDimensionMismatch, "f must have m entries");
  if (m == 0) return Vector::Zero(n);
  const Matrix gram = E * E.transpose();
  Eigen::LLT<Matrix> llt(gram);
  HQP_CHECK(llt.info() == Eigen::Success, ErrorCode::kSingularGram,
            "E E^T is not positive definite");
  Vector w = llt.solve(f);
  // One refinement step keeps E d = f tight when E E^T is poorly conditioned.
  w += llt.solve(Vector(f - gram * w));
  HQP_CHECK(w.allFinite(), ErrorCode::kSingularGram, "E E^T solve produced non-finite values");
  return E.transpose() * w;
}

/// Smallest eigenvalue of Z^T C Z.
inline double reduced_min_eig(const Eigen::Ref<const Matrix>& C, const Eigen::Ref<const Matrix>& Z) {
  HQP_CHECK(Z.cols() > 0, ErrorCode::kEmptyNullspace, "null space is empty (m == n)");
  HQP_CHECK(C.rows() == Z.rows() && C.cols() == Z.rows(), ErrorCode::kDimensionMismatch,
            "C and Z dimensions");
  Matrix h = Z.transpose() * C * Z;
  h = 0.5 * (h + h.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<Matrix> es(h, Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

/// Smallest eigenvalue of a symmetric matrix (symmetrized first).
inline double symmetric_min_eig(const Eigen::Ref<const Matrix>& h) {
  if (h.rows() == 0) return std::numeric_limits<double>::infinity();
  const Matrix sym = 0.5 * (h + h.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> es(sym, Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

/// Symmetric Ruiz equilibration: returns r such that diag(r) K diag(r) has
/// rows and columns of unit infinity norm (approximately).
inline Vector ruiz_scaling(const Eigen::Ref<const Matrix>& K, int sweeps = 10) {
  const Index n = K.rows();
  Vector r = Vector::Ones(n);
  for (int it = 0; it < sweeps; ++it) {
    Vector row_max(n);
    for (Index i = 0; i < n; ++i) {
      double mx = 0.0;
      for (Index j = 0; j < n; ++j) mx = std::max(mx, std::abs(r(i) * K(i, j) * r(j)));
      row_max(i) = mx;
    }
    for (Index i = 0; i < n; ++i)
      if (row_max(i) > 0.0) r(i) /= std::sqrt(row_max(i));
  }
  return r;
}

struct NewtonStep {
  Vector dx;
  Vector dlambda;
  Vector ds;
  /// ||M (dx, dlambda, ds) - rhs|| / ||rhs|| for the full three-block matrix.
  double rel_residual = 0.0;
  /// ||M z - rhs||_inf / (||M||_inf ||z||_inf + ||rhs||_inf).
  double backward_error = 0.0;
};

/// Residual of the full block system
///   [ Q   A^T  -I ] [dx]   [r1]
///   [ A   0    0  ] [dl] = [r2]
///   [ S   0    X  ] [ds]   [r3]
inline Vector newton_full_residual(const Eigen::Ref<const Matrix>& Q,
                                   const Eigen::Ref<const Matrix>& A,
                                   const Eigen::Ref<const Vector>& x,
                                   const Eigen::Ref<const Vector>& s,
                                   const Eigen::Ref<const Vector>& rhs,
                                   const Eigen::Ref<const Vector>& dx,
                                   const Eigen::Ref<const Vector>& dlambda,
                                   const Eigen::Ref<const Vector>& ds) {
  const Index n1 = Q.rows();
  const Index m = A.rows();
  Vector res(2 * n1 + m);
  res.head(n1) = rhs.head(n1) - (Q * dx + A.transpose() * dlambda - ds);
  res.segment(n1, m) = rhs.segment(n1, m) - A * dx;
  res.tail(n1) = rhs.tail(n1) - (s.cwiseProduct(dx) + x.cwiseProduct(ds));
  return res;
}

/// Solves the interior-point Newton system by eliminating ds:
///   [Q + X^{-1} S, A^T; A, 0] (dx; dl) = (r1 + X^{-1} r3; r2),
///   ds = X^{-1} (r3 - S dx).
/// The condensed matrix is Ruiz-equilibrated before factorization. The residual
/// is measured on the full system, and refinement passes reuse the condensed
/// factorization while it exceeds kRefineThreshold.
inline NewtonStep solve_newton_system(const Eigen::Ref<const Matrix>& Q,
                                      const Eigen::Ref<const Matrix>& A,
                                      const Eigen::Ref<const Vector>& x,
                                      const Eigen::Ref<const Vector>& s,
                                      const Eigen::Ref<const Vector>& rhs) {
  const Index n1 = Q.rows();
  const Index m = A.rows();
  HQP_CHECK(Q.cols() == n1 && A.cols() == n1 && x.size() == n1 && s.size() == n1 &&
                rhs.size() == 2 * n1 + m,
            ErrorCode::kDimensionMismatch, "Newton system dimensions");
  HQP_CHECK((x.array() > 0.0).all() && (s.array() > 0.0).all(), ErrorCode::kSingularNewton,
            "iterate is not strictly positive");

  const Vector d = s.cwiseQuotient(x);
  Matrix K = Matrix::Zero(n1 + m, n1 + m);
  K.topLeftCorner(n1, n1) = Q;
  K.topLeftCorner(n1, n1).diagonal() += d;
  K.topRightCorner(n1, m) = A.transpose();
  K.bottomLeftCorner(m, n1) = A;
  const Vector scale_k = ruiz_scaling(K);
  Eigen::PartialPivLU<Matrix> lu(scale_k.asDiagonal() * K * scale_k.asDiagonal());

  auto condensed_solve = [&](const Vector& r) {
    Vector b(n1 + m);
    b.head(n1) = r.head(n1) + r.tail(n1).cwiseQuotient(x);
    b.tail(m) = r.segment(n1, m);
    const Vector z = scale_k.cwiseProduct(lu.solve(Vector(scale_k.cwiseProduct(b))));
    NewtonStep step;
    step.dx = z.head(n1);
    step.dlambda = z.tail(m);
    step.ds = (r.tail(n1) - s.cwiseProduct(step.dx)).cwiseQuotient(x);
    return step;
  };

  NewtonStep step = condensed_solve(rhs);
  const double scale = rhs.norm() > 0.0 ? rhs.norm() : 1.0;
  Vector res = newton_full_residual(Q, A, x, s, rhs, step.dx, step.dlambda, step.ds);
  step.rel_residual = res.norm() / scale;
  for (int pass = 0; pass < kMaxRefinements && step.rel_residual > kRefineThreshold &&
                     res.allFinite();
       ++pass) {
    const NewtonStep corr = condensed_solve(res);
    step.dx += corr.dx;
    step.dlambda += corr.dlambda;
    step.ds += corr.ds;
    res = newton_full_residual(Q, A, x, s, rhs, step.dx, step.dlambda, step.ds);
    step.rel_residual = res.norm() / scale;
  }
  HQP_CHECK(step.dx.allFinite() && step.dlambda.allFinite() && step.ds.allFinite(),
            ErrorCode::kSingularNewton, "Newton solve produced non-finite values");

  // ||M||_inf of the full block matrix, row block by row block.
  double m_norm = 0.0;
  for (Index i = 0; i < n1; ++i) {
    const double row = Q.row(i).cwiseAbs().sum() + A.col(i).cwiseAbs().sum() + 1.0;
    m_norm = std::max({m_norm, row, s(i) + x(i)});
  }
  for (Index i = 0; i < m; ++i) m_norm = std::max(m_norm, A.row(i).cwiseAbs().sum());
  const double z_norm = std::max({norm_inf(step.dx), norm_inf(step.dlambda), norm_inf(step.ds)});
  step.backward_error = norm_inf(res) / (m_norm * z_norm + norm_inf(rhs));
  HQP_CHECK(step.backward_error <= kMaxBackwardError, ErrorCode::kSingularNewton,
            "Newton backward error " + std::to_string(step.backward_error));
  return step;
}

}  // namespace hqp::linsys

#endif  // HQP_LINSYS_HPP_
