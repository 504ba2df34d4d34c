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

#ifndef HQP_HOMOGENIZE_HPP_
#define HQP_HOMOGENIZE_HPP_

/**
 * @file
 * @brief Homogeneous embedding of a standard-form QP.
 *
 * The QP is lifted to x = (y, tau) >= 0:
 *
 *   minimize   1/2 y^T C y + tau c^T y + theta/2 (tau^2 - 2 tau)
 *   subject to E y = f tau
 *
 * which is written as 1/2 x^T Q x + q^T x, A x = 0 with
 * Q = [[C, c], [c^T, theta]], q = (0, -theta), A = [E, -f].
 *
 * For theta large enough the lifted program is always feasible and convex.
 * A solution with tau > 0 scales back to the QP optimum; a solution at the
 * origin yields an infeasibility certificate from its multipliers.
 */

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>

#include "hqp/common.hpp"
#include "hqp/linsys.hpp"
#include "hqp/qp_core.hpp"

namespace hqp {

enum class ThetaMode {
  kExactZ,       ///< uses ||Z^T (C d + c)||^2 / lambda_min(Z^T C Z)
  kNormRelaxed,  ///< uses ||C d + c||^2 / lambda_min(Z^T C Z)
  kUserAlpha,    ///< uses ||C d + c||^2 / alpha with a supplied alpha
};

inline std::string_view to_string(ThetaMode mode) {
  switch (mode) {
    case ThetaMode::kExactZ: return "exact_Z";
    case ThetaMode::kNormRelaxed: return "norm_relaxed";
    case ThetaMode::kUserAlpha: return "user_alpha";
  }
  return "unknown";
}

struct ThetaReport {
  double theta_star = 0.0;
  ThetaMode bound_used = ThetaMode::kExactZ;
  double pd_bound_rhs = 0.0;
  double condition1_rhs = 0.0;  ///< 2 |theta_star|
  double theta = 0.0;
  double margin = 0.0;
  /// True when theta was supplied by the caller instead of computed.
  bool overridden = false;
};

struct ThetaOptions {
  double margin = 0.1;
  double floor = 1.0;
  /// Unset selects the default rule (see default_theta_mode).
  std::optional<ThetaMode> mode;
};

/// user_alpha whenever a lower bound was supplied, exact_Z for moderate sizes,
/// otherwise norm_relaxed.
inline ThetaMode default_theta_mode(const ValidatedProblem& vp) {
  if (vp.min_eig_lower_bound()) return ThetaMode::kUserAlpha;
  return vp.n() <= 2000 ? ThetaMode::kExactZ : ThetaMode::kNormRelaxed;
}

/// Optimal value of the QP with the bounds y >= 0 dropped.
inline double compute_theta_star(const ValidatedProblem& vp) {
  const QpProblem& p = vp.problem();
  const auto sol = linsys::solve_equality_kkt(p.C, p.E, -p.c, p.f);
  return p.objective(sol.y);
}

/// Right-hand side of the reduced-Hessian positivity bound for `mode`.
inline double pd_bound_rhs(const ValidatedProblem& vp, ThetaMode mode) {
  const QpProblem& p = vp.problem();
  const Vector d = linsys::min_norm_particular(p.E, p.f);
  const Vector g = p.C * d + p.c;
  const double base = -d.dot(p.C * d) - 2.0 * p.c.dot(d);
  // With m == n the reduced Hessian is the scalar theta + d^T C d + 2 c^T d.
  if (vp.Z().cols() == 0) return base;
  switch (mode) {
    case ThetaMode::kExactZ:
      return (vp.Z().transpose() * g).squaredNorm() / *vp.reduced_min_eig() + base;
    case ThetaMode::kNormRelaxed:
      return g.squaredNorm() / *vp.reduced_min_eig() + base;
    case ThetaMode::kUserAlpha: {
      const auto alpha = vp.min_eig_lower_bound();
      HQP_CHECK(alpha.has_value(), ErrorCode::kMissingAlpha,
                "user_alpha mode requires min_eig_lower_bound");
      HQP_CHECK(*alpha > 0.0, ErrorCode::kNonPositiveAlpha, "alpha must be positive");
      return g.squaredNorm() / *alpha + base;
    }
  }
  return base;
}

/// theta = (1 + margin) * max(2 |theta*|, pd_bound_rhs, floor).
inline ThetaReport compute_theta(const ValidatedProblem& vp, const ThetaOptions& opts = {}) {
  HQP_CHECK(opts.margin > 0.0 && opts.floor > 0.0, ErrorCode::kInvalidConfig,
            "theta margin and floor must be positive");
  ThetaReport r;
  r.bound_used = opts.mode.value_or(default_theta_mode(vp));
  r.theta_star = compute_theta_star(vp);
  r.condition1_rhs = 2.0 * std::abs(r.theta_star);
  r.pd_bound_rhs = pd_bound_rhs(vp, r.bound_used);
  r.margin = opts.margin;
  r.theta = (1.0 + opts.margin) * std::max({r.condition1_rhs, r.pd_bound_rhs, opts.floor});
  return r;
}

/// Report for a caller-supplied theta. The bounds are still evaluated so the
/// report can be compared against them.
inline ThetaReport theta_override(const ValidatedProblem& vp, double theta) {
  ThetaReport r;
  r.bound_used = default_theta_mode(vp);
  r.theta_star = compute_theta_star(vp);
  r.condition1_rhs = 2.0 * std::abs(r.theta_star);
  r.pd_bound_rhs = pd_bound_rhs(vp, r.bound_used);
  r.theta = theta;
  r.overridden = true;
  return r;
}

/// The null-space basis of [E, -f]: [[Z, d], [0, 1]].
inline Matrix lifted_nullspace_basis(const ValidatedProblem& vp) {
  const QpProblem& p = vp.problem();
  const Index n = vp.n();
  const Index k = vp.Z().cols();
  Matrix zh = Matrix::Zero(n + 1, k + 1);
  zh.topLeftCorner(n, k) = vp.Z();
  zh.topRightCorner(n, 1) = linsys::min_norm_particular(p.E, p.f);
  zh(n, k) = 1.0;
  return zh;
}

inline Matrix lifted_hessian(const QpProblem& p, double theta) {
  const Index n = p.n();
  Matrix Q(n + 1, n + 1);
  Q.topLeftCorner(n, n) = p.C;
  Q.topRightCorner(n, 1) = p.c;
  Q.bottomLeftCorner(1, n) = p.c.transpose();
  Q(n, n) = theta;
  return Q;
}

/// Smallest eigenvalue of the lifted reduced Hessian; positive iff the lifted
/// program is strictly convex on its feasible subspace.
inline double check_reduced_hessian_pd(const ValidatedProblem& vp, double theta) {
  const Matrix zh = lifted_nullspace_basis(vp);
  return linsys::symmetric_min_eig(zh.transpose() * lifted_hessian(vp.problem(), theta) * zh);
}

struct HqpProblem {
  Matrix Q;  ///< (n+1) x (n+1)
  Vector q;  ///< (0, -theta)
  Matrix A;  ///< m x (n+1), [E, -f]
  ThetaReport theta_report;
  ValidatedProblem parent;

  Index dim() const { return Q.rows(); }
  Index rows() const { return A.rows(); }
  double theta() const { return theta_report.theta; }
  double objective(const Eigen::Ref<const Vector>& x) const { return 0.5 * x.dot(Q * x) + q.dot(x); }
};

inline HqpProblem embed(const ValidatedProblem& vp, const ThetaReport& report) {
  HQP_CHECK(report.theta > 0.0 && std::isfinite(report.theta), ErrorCode::kInvalidConfig,
            "theta must be positive and finite");
  const QpProblem& p = vp.problem();
  const Index n = vp.n();
  const Index m = vp.m();
  Matrix A(m, n + 1);
  A.leftCols(n) = p.E;
  A.col(n) = -p.f;
  Vector q = Vector::Zero(n + 1);
  q(n) = -report.theta;
  return HqpProblem{lifted_hessian(p, report.theta), std::move(q), std::move(A), report, vp};
}

// ---------------------------------------------------------------------------
// Recovery.

struct HqpKktPoint {
  Vector y_hat;
  double tau_hat = 0.0;
  Vector nu_hat;
  Vector xi_hat;
  double omega_hat = 0.0;
};

/// Split a lifted primal-dual triple into its QP-shaped parts.
inline HqpKktPoint unpack(const HqpProblem& hqp, const Eigen::Ref<const Vector>& x,
                          const Eigen::Ref<const Vector>& lambda,
                          const Eigen::Ref<const Vector>& s) {
  const Index n = hqp.dim() - 1;
  HQP_CHECK(x.size() == n + 1 && s.size() == n + 1 && lambda.size() == hqp.rows(),
            ErrorCode::kDimensionMismatch, "lifted point dimensions");
  return HqpKktPoint{x.head(n), x(n), lambda, s.head(n), s(n)};
}

struct HqpKktResiduals {
  Vector dual1;     ///< C y + tau c + E^T nu - xi
  double dual2;     ///< theta tau - theta + c^T y - f^T nu - omega
  Vector primal;    ///< E y - f tau
  double comp;      ///< |y^T xi| + |tau omega|
  double nonneg;    ///< largest negative part among y, tau, xi, omega

  double worst() const {
    return std::max({norm_inf(dual1), std::abs(dual2), norm_inf(primal), comp, nonneg});
  }
};

inline HqpKktResiduals hqp_kkt_residuals(const QpProblem& p, double theta, const HqpKktPoint& pt) {
  HqpKktResiduals r;
  r.dual1 = p.C * pt.y_hat + pt.tau_hat * p.c + p.E.transpose() * pt.nu_hat - pt.xi_hat;
  r.dual2 = theta * pt.tau_hat - theta + p.c.dot(pt.y_hat) - p.f.dot(pt.nu_hat) - pt.omega_hat;
  r.primal = p.E * pt.y_hat - p.f * pt.tau_hat;
  r.comp = std::abs(pt.y_hat.dot(pt.xi_hat)) + std::abs(pt.tau_hat * pt.omega_hat);
  r.nonneg = std::max({0.0, -min_coeff(pt.y_hat), -pt.tau_hat, -min_coeff(pt.xi_hat),
                       -pt.omega_hat});
  return r;
}

/// Lifted KKT point built from a QP optimum: everything scaled by
/// tau_bar = theta / (theta + c^T y - f^T nu), omega = 0.
inline HqpKktPoint lift_optimal(const QpProblem& p, double theta, const QpKktPoint& kkt) {
  const double tau_bar = theta / (theta + p.c.dot(kkt.y) - p.f.dot(kkt.nu));
  return HqpKktPoint{tau_bar * kkt.y, tau_bar, tau_bar * kkt.nu, tau_bar * kkt.xi, 0.0};
}

/// Lifted KKT point at the origin built from an infeasibility certificate.
inline HqpKktPoint lift_certificate(const QpProblem& p, double theta, const InfeasCertificate& cert) {
  return HqpKktPoint{Vector::Zero(p.n()), 0.0, theta * cert.nu, theta * cert.xi, 0.0};
}

enum class SolveStatus { kOptimal, kInfeasible, kIterationLimit };

inline std::string_view to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::kOptimal: return "optimal";
    case SolveStatus::kInfeasible: return "infeasible";
    case SolveStatus::kIterationLimit: return "iteration_limit";
  }
  return "unknown";
}

struct RecoveryTolerances {
  /// Residuals are accepted below tol, times (1 + largest data norm) when
  /// scale_by_data is set.
  double tol = 1e-6;
  bool scale_by_data = true;
  /// Tie-break hint: tau_hat above this favours the optimal reading.
  double tau_hint = 1e-4;
};

struct SolveOutcome {
  SolveStatus status = SolveStatus::kIterationLimit;
  std::optional<QpKktPoint> optimal;
  std::optional<InfeasCertificate> certificate;
  /// Residuals of both candidate recoveries, when they could be formed.
  std::optional<KktResiduals> kkt_check;
  std::optional<CertificateResiduals> cert_check;
  double tau_hat = 0.0;
  double omega_hat = 0.0;
  double tolerance = 0.0;
};

inline double data_scale(const QpProblem& p) {
  return 1.0 + std::max({matrix_norm_inf(p.C), norm_inf(p.c), matrix_norm_inf(p.E), norm_inf(p.f)});
}

/// Forms both the scaled optimum (y, nu, xi) = (y^, nu^, xi^) / tau^ and the
/// certificate (nu, xi) = (nu^, xi^) / (theta + omega^), and classifies by
/// which one passes its residual test. Throws AmbiguousStatus when neither does.
inline SolveOutcome recover(const HqpProblem& hqp, const Eigen::Ref<const Vector>& x,
                            const Eigen::Ref<const Vector>& lambda,
                            const Eigen::Ref<const Vector>& s,
                            const RecoveryTolerances& tol = {}) {
  const QpProblem& p = hqp.parent.problem();
  const HqpKktPoint h = unpack(hqp, x, lambda, s);
  const double theta = hqp.theta();
  const double scaled_tol = tol.scale_by_data ? tol.tol * data_scale(p) : tol.tol;

  SolveOutcome out;
  out.tau_hat = h.tau_hat;
  out.omega_hat = h.omega_hat;
  out.tolerance = scaled_tol;

  std::optional<double> opt_worst, cert_worst;
  if (h.tau_hat > 0.0) {
    QpKktPoint pt{h.y_hat / h.tau_hat, h.nu_hat / h.tau_hat, h.xi_hat / h.tau_hat};
    if (pt.y.allFinite() && pt.nu.allFinite() && pt.xi.allFinite()) {
      out.kkt_check = qp_kkt_residuals(p, pt);
      if (out.kkt_check->accepted(scaled_tol)) opt_worst = out.kkt_check->worst();
      out.optimal = std::move(pt);
    }
  }
  if (theta + h.omega_hat > 0.0) {
    const double w = theta + h.omega_hat;
    InfeasCertificate cert{h.nu_hat / w, h.xi_hat / w};
    out.cert_check = check_certificate(p, cert);
    if (out.cert_check->accepted(scaled_tol)) cert_worst = out.cert_check->worst();
    out.certificate = std::move(cert);
  }

  if (opt_worst && cert_worst) {
    if (*opt_worst == *cert_worst) {
      out.status = h.tau_hat > tol.tau_hint ? SolveStatus::kOptimal : SolveStatus::kInfeasible;
    } else {
      out.status = *opt_worst < *cert_worst ? SolveStatus::kOptimal : SolveStatus::kInfeasible;
    }
  } else if (opt_worst) {
    out.status = SolveStatus::kOptimal;
  } else if (cert_worst) {
    out.status = SolveStatus::kInfeasible;
  } else {
    std::string msg = "neither recovery meets tolerance " + std::to_string(scaled_tol) +
                      " (tau_hat = " + std::to_string(h.tau_hat);
    if (out.kkt_check) msg += ", kkt worst = " + std::to_string(out.kkt_check->worst());
    if (out.cert_check) msg += ", certificate worst = " + std::to_string(out.cert_check->worst());
    throw Error(ErrorCode::kAmbiguousStatus, msg + ")");
  }
  if (out.status == SolveStatus::kOptimal) {
    out.certificate.reset();
  } else {
    out.optimal.reset();
  }
  return out;
}

}  // namespace hqp

#endif  // HQP_HOMOGENIZE_HPP_
