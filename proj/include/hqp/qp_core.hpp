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

#ifndef HQP_QP_CORE_HPP_
#define HQP_QP_CORE_HPP_

/**
 * @file
 * @brief Standard-form convex QP: data, validation, KKT and certificate checks.
 *
 *   minimize   1/2 y^T C y + c^T y
 *   subject to E y = f,  y >= 0
 *
 * A problem is accepted when E has full row rank and C is positive definite
 * on null(E). The problem may still be infeasible.
 */

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "hqp/common.hpp"
#include "hqp/linsys.hpp"

namespace hqp {

struct QpProblem {
  Matrix C;
  Vector c;
  Matrix E;
  Vector f;
  /// Optional alpha with 0 < alpha <= lambda_min(Z^T C Z).
  std::optional<double> min_eig_lower_bound;

  Index n() const { return c.size(); }
  Index m() const { return f.size(); }

  double objective(const Eigen::Ref<const Vector>& y) const {
    return 0.5 * y.dot(C * y) + c.dot(y);
  }
};

struct QpKktPoint {
  Vector y;
  Vector nu;
  Vector xi;
};

struct InfeasCertificate {
  Vector nu;
  Vector xi;
};

struct ValidationTolerances {
  /// Singular values of E below max(m, n) * ||E||_2 * rank_rel count as zero.
  double rank_rel = 1e-12;
  /// lambda_min(Z^T C Z) must exceed pd_rel * (1 + ||C||_inf).
  double pd_rel = 1e-10;
};

/// A problem that satisfied the rank and reduced-Hessian checks, together with
/// the null-space basis computed along the way. Copies share the immutable
/// payload.
class ValidatedProblem {
 public:
  const QpProblem& problem() const { return data_->problem; }
  const Matrix& Z() const { return data_->basis.Z; }
  const linsys::NullspaceBasis& basis() const { return data_->basis; }
  /// Empty when m == n.
  std::optional<double> reduced_min_eig() const { return data_->reduced_min_eig; }
  /// User-supplied lower bound on the reduced Hessian eigenvalue, if any.
  std::optional<double> min_eig_lower_bound() const { return data_->problem.min_eig_lower_bound; }
  Index n() const { return data_->problem.n(); }
  Index m() const { return data_->problem.m(); }

 private:
  struct Data {
    QpProblem problem;
    linsys::NullspaceBasis basis;
    std::optional<double> reduced_min_eig;
  };
  explicit ValidatedProblem(std::shared_ptr<const Data> data) : data_(std::move(data)) {}
  std::shared_ptr<const Data> data_;

  friend ValidatedProblem validate(QpProblem problem, const ValidationTolerances& tol);
};

inline void check_dimensions(const QpProblem& p) {
  const Index n = p.c.size();
  const Index m = p.f.size();
  HQP_CHECK(n >= 1, ErrorCode::kDimensionMismatch, "n must be positive");
  HQP_CHECK(p.C.rows() == n && p.C.cols() == n, ErrorCode::kDimensionMismatch,
            "C must be n x n");
  HQP_CHECK(p.E.rows() == m && p.E.cols() == n, ErrorCode::kDimensionMismatch,
            "E must be m x n");
  HQP_CHECK(m <= n, ErrorCode::kDimensionMismatch, "m must not exceed n");
  HQP_CHECK(p.C.allFinite() && p.c.allFinite() && p.E.allFinite() && p.f.allFinite(),
            ErrorCode::kDimensionMismatch, "problem data must be finite");
}

inline ValidatedProblem validate(QpProblem problem, const ValidationTolerances& tol = {}) {
  check_dimensions(problem);
  problem.C = 0.5 * (problem.C + problem.C.transpose()).eval();
  const Index n = problem.n();
  const Index m = problem.m();

  if (m > 0) {
    Eigen::JacobiSVD<Matrix> svd(problem.E);
    const auto& sv = svd.singularValues();
    const double threshold = static_cast<double>(std::max(m, n)) * sv(0) * tol.rank_rel;
    HQP_CHECK(sv(0) > 0.0 && sv(m - 1) > threshold, ErrorCode::kRankDeficient,
              "E is not of full row rank");
  }
  if (problem.min_eig_lower_bound) {
    HQP_CHECK(*problem.min_eig_lower_bound > 0.0, ErrorCode::kNonPositiveAlpha,
              "min_eig_lower_bound must be positive");
  }

  auto data = std::make_shared<ValidatedProblem::Data>();
  data->basis = linsys::nullspace_basis(problem.E, n);
  if (!data->basis.empty()) {
    const double lam = linsys::reduced_min_eig(problem.C, data->basis.Z);
    const double pd_tol = tol.pd_rel * (1.0 + matrix_norm_inf(problem.C));
    HQP_CHECK(lam > pd_tol, ErrorCode::kNotReducedPd,
              "lambda_min(Z^T C Z) = " + std::to_string(lam) + " is not positive");
    data->reduced_min_eig = lam;
  }
  data->problem = std::move(problem);
  return ValidatedProblem(std::move(data));
}

struct KktResiduals {
  Vector r_stat;   ///< C y + c + E^T nu - xi
  Vector r_eq;     ///< E y - f
  double r_comp;   ///< |y^T xi|
  Vector comp_min; ///< componentwise min(y, xi)
  double r_nonneg; ///< max(0, -min(y), -min(xi))

  /// Largest of the four residual measures (componentwise min reported
  /// through its infinity norm).
  double worst() const {
    return std::max({norm_inf(r_stat), norm_inf(r_eq), r_comp, r_nonneg});
  }
  bool accepted(double tol) const { return worst() <= tol; }
};

inline KktResiduals qp_kkt_residuals(const QpProblem& p, const QpKktPoint& pt) {
  HQP_CHECK(pt.y.size() == p.n() && pt.xi.size() == p.n() && pt.nu.size() == p.m(),
            ErrorCode::kDimensionMismatch, "KKT point dimensions");
  KktResiduals r;
  r.r_stat = p.C * pt.y + p.c + p.E.transpose() * pt.nu - pt.xi;
  r.r_eq = p.E * pt.y - p.f;
  r.r_comp = std::abs(pt.y.dot(pt.xi));
  r.comp_min = pt.y.cwiseMin(pt.xi);
  r.r_nonneg = std::max({0.0, -min_coeff(pt.y), -min_coeff(pt.xi)});
  return r;
}

struct CertificateResiduals {
  Vector r1;  ///< E^T nu - xi
  double r2;  ///< f^T nu + 1
  double r3;  ///< max(0, -min(xi))

  double worst() const { return std::max({norm_inf(r1), std::abs(r2), r3}); }
  bool accepted(double tol) const { return worst() <= tol; }
};

inline CertificateResiduals check_certificate(const QpProblem& p, const InfeasCertificate& cert) {
  HQP_CHECK(cert.nu.size() == p.m() && cert.xi.size() == p.n(), ErrorCode::kDimensionMismatch,
            "certificate dimensions");
  CertificateResiduals r;
  r.r1 = p.E.transpose() * cert.nu - cert.xi;
  r.r2 = p.f.dot(cert.nu) + 1.0;
  r.r3 = std::max(0.0, -min_coeff(cert.xi));
  return r;
}

// ---------------------------------------------------------------------------
// Reduction of a bounded QP to standard form.

/// minimize 1/2 y^T H y + g^T y
/// s.t. A_eq y = b_eq, A_ineq y <= b_ineq, lower <= y <= upper.
/// Infinite bounds are given as +/- infinity.
struct GeneralQp {
  Matrix H;
  Vector g;
  Matrix A_eq;
  Vector b_eq;
  Matrix A_ineq;
  Vector b_ineq;
  Vector lower;
  Vector upper;
};

/// y = T v + shift, where v is the standard-form variable.
struct StandardFormMap {
  Matrix T;
  Vector shift;
  /// Added to the standard-form objective to reproduce the original value.
  double objective_offset = 0.0;

  Vector recover(const Eigen::Ref<const Vector>& v) const { return T * v + shift; }
};

struct StandardForm {
  QpProblem problem;
  StandardFormMap map;
};

/// Each variable with a finite lower bound becomes y = l + z; with only an
/// upper bound, y = u - z. Finite two-sided boxes add a row z + w = u - l, and
/// each inequality row gets its own slack. Variables with no finite bound are
/// rejected.
inline StandardForm to_standard_form(const GeneralQp& g) {
  const Index n = g.g.size();
  const auto rows_or_zero = [n](const Matrix& a) { return a.size() == 0 ? Index{0} : a.rows(); };
  const Index m_eq = rows_or_zero(g.A_eq);
  const Index m_in = rows_or_zero(g.A_ineq);
  HQP_CHECK(g.H.rows() == n && g.H.cols() == n && g.lower.size() == n && g.upper.size() == n,
            ErrorCode::kDimensionMismatch, "general QP dimensions");
  HQP_CHECK(g.b_eq.size() == m_eq && g.b_ineq.size() == m_in &&
                (m_eq == 0 || g.A_eq.cols() == n) && (m_in == 0 || g.A_ineq.cols() == n),
            ErrorCode::kDimensionMismatch, "general QP constraint dimensions");

  // Per-variable substitution y_i = shift_i + sign_i * z_i.
  Vector shift(n), sign(n);
  std::vector<Index> boxed;
  for (Index i = 0; i < n; ++i) {
    const bool lo = std::isfinite(g.lower(i));
    const bool hi = std::isfinite(g.upper(i));
    HQP_CHECK(lo || hi, ErrorCode::kFreeVariable,
              "variable " + std::to_string(i) + " has no finite bound");
    if (lo) {
      shift(i) = g.lower(i);
      sign(i) = 1.0;
      if (hi) boxed.push_back(i);
    } else {
      shift(i) = g.upper(i);
      sign(i) = -1.0;
    }
  }
  const Index n_box = static_cast<Index>(boxed.size());
  const Index n_std = n + n_box + m_in;
  const Index m_std = m_eq + n_box + m_in;

  StandardForm out;
  Matrix T = Matrix::Zero(n, n_std);
  T.leftCols(n) = sign.asDiagonal();
  out.map.T = T;
  out.map.shift = shift;
  out.map.objective_offset = 0.5 * shift.dot(g.H * shift) + g.g.dot(shift);

  QpProblem& p = out.problem;
  p.C = T.transpose() * g.H * T;
  p.c = T.transpose() * (g.H * shift + g.g);
  p.E = Matrix::Zero(m_std, n_std);
  p.f = Vector::Zero(m_std);
  if (m_eq > 0) {
    p.E.block(0, 0, m_eq, n_std) = g.A_eq * T;
    p.f.head(m_eq) = g.b_eq - g.A_eq * shift;
  }
  for (Index k = 0; k < n_box; ++k) {
    const Index i = boxed[static_cast<std::size_t>(k)];
    p.E(m_eq + k, i) = 1.0;
    p.E(m_eq + k, n + k) = 1.0;
    p.f(m_eq + k) = g.upper(i) - g.lower(i);
  }
  if (m_in > 0) {
    p.E.block(m_eq + n_box, 0, m_in, n_std) = g.A_ineq * T;
    p.E.block(m_eq + n_box, n + n_box, m_in, m_in).setIdentity();
    p.f.tail(m_in) = g.b_ineq - g.A_ineq * shift;
  }
  return out;
}

}  // namespace hqp

#endif  // HQP_QP_CORE_HPP_
