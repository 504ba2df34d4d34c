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

#ifndef HQP_IIPM_HPP_
#define HQP_IIPM_HPP_

/**
 * @file
 * @brief Long-step infeasible interior-point method for the lifted QP
 *
 *   minimize 1/2 x^T Q x + q^T x  s.t.  A x = 0, x >= 0.
 *
 * Iterates stay in the wide neighborhood
 *
 *   ||(r_d, r_p)|| / mu <= beta ||(r_d^0, r_p^0)|| / mu^0,
 *   (x, s) > 0,  x_i s_i >= gamma mu,
 *
 * and each accepted step also reduces mu by at least a factor (1 - 0.01 alpha).
 * The method starts from (zeta e, 0, zeta e) and never decides feasibility on
 * its own; the final iterate is classified by hqp::recover.
 */

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "hqp/common.hpp"
#include "hqp/homogenize.hpp"
#include "hqp/linsys.hpp"

namespace hqp {

struct IipmConfig {
  double gamma = 1e-3;
  double beta = 2.0;
  double sigma = 0.3;
  double sigma_min = 0.05;
  double sigma_max = 0.5;
  /// Unset: max(10, ||c||_inf, ||f||_inf, theta).
  std::optional<double> zeta;
  double tol_mu = 1e-8;
  double tol_res = 1e-8;
  int max_iter = 200;
  double step_backtrack = 0.8;
  int step_trials = 60;
  RecoveryTolerances recovery;

  void validate() const {
    auto req = [](bool ok, const char* msg) { HQP_CHECK(ok, ErrorCode::kInvalidConfig, msg); };
    req(gamma > 0.0 && gamma < 1.0, "gamma must lie in (0, 1)");
    req(beta >= 1.0, "beta must be >= 1");
    req(sigma_min > 0.0 && sigma_min < sigma_max && sigma_max <= 0.5,
        "need 0 < sigma_min < sigma_max <= 1/2");
    req(!zeta || *zeta > 0.0, "zeta must be positive");
    req(tol_mu > 0.0 && tol_res > 0.0, "tolerances must be positive");
    req(max_iter > 0, "max_iter must be positive");
    req(step_backtrack > 0.0 && step_backtrack < 1.0, "step_backtrack must lie in (0, 1)");
    req(step_trials > 0, "step_trials must be positive");
    req(recovery.tol > 0.0, "recovery tolerance must be positive");
  }

  double clamped_sigma() const { return std::clamp(sigma, sigma_min, sigma_max); }
};

struct Residuals {
  Vector r_d;  ///< Q x + q + A^T lambda - s
  Vector r_p;  ///< A x
  double mu = 0.0;

  /// Euclidean norm of the stacked (r_d, r_p).
  double norm() const { return std::sqrt(r_d.squaredNorm() + r_p.squaredNorm()); }
  double norm_inf() const { return std::max(hqp::norm_inf(r_d), hqp::norm_inf(r_p)); }
};

inline Residuals residuals(const HqpProblem& hqp, const Eigen::Ref<const Vector>& x,
                           const Eigen::Ref<const Vector>& lambda,
                           const Eigen::Ref<const Vector>& s) {
  HQP_CHECK(x.size() == hqp.dim() && s.size() == hqp.dim() && lambda.size() == hqp.rows(),
            ErrorCode::kDimensionMismatch, "iterate dimensions");
  Residuals r;
  r.r_d = hqp.Q * x + hqp.q + hqp.A.transpose() * lambda - s;
  r.r_p = hqp.A * x;
  r.mu = x.dot(s) / static_cast<double>(x.size());
  return r;
}

struct IipmIterate {
  Vector x;
  Vector lambda;
  Vector s;
  Residuals res;

  double mu() const { return res.mu; }
};

inline IipmIterate make_iterate(const HqpProblem& hqp, Vector x, Vector lambda, Vector s) {
  IipmIterate it{std::move(x), std::move(lambda), std::move(s), {}};
  it.res = residuals(hqp, it.x, it.lambda, it.s);
  return it;
}

/// Reference quantities fixed by the starting point.
struct NeighborhoodRef {
  double r0_norm = 0.0;
  double mu0 = 0.0;
};

struct NeighborhoodCheck {
  bool inside = false;
  /// (||r|| / mu) / (r0_norm / mu0); at most beta inside the neighborhood.
  double ratio = 0.0;
  /// min_i x_i s_i / mu; at least gamma inside the neighborhood.
  double centrality = 0.0;
  bool positive = false;
};

inline NeighborhoodCheck in_neighborhood(const Eigen::Ref<const Vector>& x,
                                         const Eigen::Ref<const Vector>& s, const Residuals& res,
                                         const IipmConfig& cfg, const NeighborhoodRef& ref) {
  NeighborhoodCheck c;
  c.positive = (x.array() > 0.0).all() && (s.array() > 0.0).all();
  const double mu = res.mu;
  const double lhs = res.norm() / mu;
  const double bound = ref.r0_norm / ref.mu0;
  c.ratio = bound > 0.0 ? lhs / bound : (lhs == 0.0 ? 0.0 : std::numeric_limits<double>::infinity());
  c.centrality = x.cwiseProduct(s).minCoeff() / mu;
  c.inside = c.positive && mu > 0.0 && lhs <= cfg.beta * bound &&
             (x.cwiseProduct(s).array() >= cfg.gamma * mu).all();
  return c;
}

inline NeighborhoodCheck in_neighborhood(const IipmIterate& it, const IipmConfig& cfg,
                                         const NeighborhoodRef& ref) {
  return in_neighborhood(it.x, it.s, it.res, cfg, ref);
}

/// Solves the Newton system with right-hand side (-r_d, -r_p, -X s + sigma mu e).
inline linsys::NewtonStep newton_direction(const HqpProblem& hqp, const IipmIterate& it,
                                           double sigma) {
  const Index n1 = hqp.dim();
  const Index m = hqp.rows();
  Vector rhs(2 * n1 + m);
  rhs.head(n1) = -it.res.r_d;
  rhs.segment(n1, m) = -it.res.r_p;
  rhs.tail(n1) = -it.x.cwiseProduct(it.s) + Vector::Constant(n1, sigma * it.res.mu);
  return linsys::solve_newton_system(hqp.Q, hqp.A, it.x, it.s, rhs);
}

/// Largest alpha keeping (x, s) + alpha (dx, ds) strictly positive; +inf when
/// no component decreases.
inline double positivity_boundary(const Eigen::Ref<const Vector>& x, const Eigen::Ref<const Vector>& dx,
                                  const Eigen::Ref<const Vector>& s, const Eigen::Ref<const Vector>& ds) {
  double amax = std::numeric_limits<double>::infinity();
  for (Index i = 0; i < x.size(); ++i) {
    if (dx(i) < 0.0) amax = std::min(amax, -x(i) / dx(i));
    if (ds(i) < 0.0) amax = std::min(amax, -s(i) / ds(i));
  }
  return amax;
}

struct StepResult {
  double alpha = 0.0;
  int trials = 0;
  IipmIterate next;
  NeighborhoodCheck nbhd;
};

/// Backtracks from min(1, 0.995 * boundary) until the trial point is in the
/// neighborhood and mu(alpha) <= (1 - 0.01 alpha) mu.
inline StepResult step_length(const HqpProblem& hqp, const IipmIterate& it,
                              const linsys::NewtonStep& dir, const IipmConfig& cfg,
                              const NeighborhoodRef& ref) {
  const double boundary = positivity_boundary(it.x, dir.dx, it.s, dir.ds);
  double alpha = std::min(1.0, 0.995 * boundary);
  for (int j = 0; j < cfg.step_trials; ++j, alpha *= cfg.step_backtrack) {
    IipmIterate trial = make_iterate(hqp, it.x + alpha * dir.dx, it.lambda + alpha * dir.dlambda,
                                     it.s + alpha * dir.ds);
    const NeighborhoodCheck nb = in_neighborhood(trial, cfg, ref);
    if (nb.inside && trial.res.mu <= (1.0 - 0.01 * alpha) * it.res.mu) {
      return StepResult{alpha, j + 1, std::move(trial), nb};
    }
  }
  throw Error(ErrorCode::kStepSearchFailed,
              "no step accepted after " + std::to_string(cfg.step_trials) + " trials (mu = " +
                  std::to_string(it.res.mu) + ")");
}

struct IterationRecord {
  int k = 0;
  double mu = 0.0;
  double rd_norm = 0.0;
  double rp_norm = 0.0;
  /// Step taken from this iterate; NaN on the final record.
  double alpha = std::numeric_limits<double>::quiet_NaN();
  double sigma = std::numeric_limits<double>::quiet_NaN();
  double nbhd_ratio = 0.0;
  double centrality = 0.0;
  /// prod_{j<k} (1 - alpha_j)
  double upsilon = 1.0;
  /// ||(x, s)||_1, kept for the post-hoc iterate-size diagnostic.
  double xs_norm1 = 0.0;
  /// Newton solve residual relative to ||rhs||, and its normwise backward error.
  double newton_residual = std::numeric_limits<double>::quiet_NaN();
  double newton_backward_error = std::numeric_limits<double>::quiet_NaN();
  /// ||r^{k+1} - (1 - alpha) r^k|| / ||r^k||, for r_d and r_p, evaluated on
  /// the step out of this iterate.
  double decay_err_rd = std::numeric_limits<double>::quiet_NaN();
  double decay_err_rp = std::numeric_limits<double>::quiet_NaN();
  /// Unscaled ||r^{k+1} - (1 - alpha) r^k||.
  double decay_abs_rd = std::numeric_limits<double>::quiet_NaN();
  double decay_abs_rp = std::numeric_limits<double>::quiet_NaN();
  /// Rounding bound on decay_abs from evaluating both residuals in double.
  double decay_floor_rd = std::numeric_limits<double>::quiet_NaN();
  double decay_floor_rp = std::numeric_limits<double>::quiet_NaN();
  /// max(||D^{-1} dx||, ||D ds||) / ((n+1) mu) with D = X^{1/2} S^{-1/2}.
  double scaled_step = std::numeric_limits<double>::quiet_NaN();
  bool in_nbhd = false;
  bool mu_decrease = true;
};

struct IterationLog {
  std::vector<IterationRecord> records;
  double zeta = 0.0;
  double r0_norm = 0.0;
  double mu0 = 0.0;

  void write_csv(std::ostream& os) const {
    os << "k,mu,rd_norm,rp_norm,alpha,sigma,nbhd_ratio,upsilon\n";
    const auto old = os.precision(17);
    for (const auto& r : records) {
      os << r.k << ',' << r.mu << ',' << r.rd_norm << ',' << r.rp_norm << ',';
      if (std::isfinite(r.alpha)) os << r.alpha;
      os << ',';
      if (std::isfinite(r.sigma)) os << r.sigma;
      os << ',' << r.nbhd_ratio << ',' << r.upsilon << '\n';
    }
    os.precision(old);
  }
};

/// Numerical failure inside the iteration, carrying the log up to that point.
class SolveError : public Error {
 public:
  SolveError(const Error& cause, IterationLog log)
      : Error(cause), log_(std::make_shared<IterationLog>(std::move(log))) {}
  const IterationLog& log() const { return *log_; }

 private:
  std::shared_ptr<IterationLog> log_;
};

struct IipmResult {
  SolveOutcome outcome;
  IterationLog log;
  IipmIterate final_iterate;
  int iterations = 0;
  double hqp_objective = 0.0;
};

struct ResidualMagnitude {
  double dual = 0.0;    ///< || |Q||x| + |q| + |A^T||lambda| + |s| ||
  double primal = 0.0;  ///< || |A||x| ||
};

/// Magnitudes of the terms summed when forming (r_d, r_p); a computed residual
/// is exact only up to a small multiple of unit roundoff times these.
inline ResidualMagnitude residual_magnitude(const HqpProblem& hqp, const IipmIterate& it) {
  const Vector ax = it.x.cwiseAbs();
  ResidualMagnitude out;
  out.dual = (hqp.Q.cwiseAbs() * ax + hqp.q.cwiseAbs() +
              hqp.A.transpose().cwiseAbs() * it.lambda.cwiseAbs() + it.s.cwiseAbs())
                 .norm();
  out.primal = (hqp.A.cwiseAbs() * ax).norm();
  return out;
}

inline double auto_zeta(const HqpProblem& hqp) {
  const QpProblem& p = hqp.parent.problem();
  return std::max({10.0, norm_inf(p.c), norm_inf(p.f), hqp.theta()});
}

inline IipmResult solve(const HqpProblem& hqp, const IipmConfig& cfg = {}) {
  cfg.validate();
  const Index n1 = hqp.dim();
  const Index m = hqp.rows();
  const double zeta = cfg.zeta.value_or(auto_zeta(hqp));
  const double sigma = cfg.clamped_sigma();

  IterationLog log;
  log.zeta = zeta;
  IipmIterate it =
      make_iterate(hqp, Vector::Constant(n1, zeta), Vector::Zero(m), Vector::Constant(n1, zeta));
  const NeighborhoodRef ref{it.res.norm(), it.res.mu};
  log.r0_norm = ref.r0_norm;
  log.mu0 = ref.mu0;
  const double res_tol = cfg.tol_res * std::max(1.0, ref.r0_norm);

  double upsilon = 1.0;
  // Set once the tolerances are met but neither reading verifies; iteration
  // continues until one does.
  bool ambiguous = false;
  const double unit = std::numeric_limits<double>::epsilon();
  const double terms = static_cast<double>(n1 + m + 2);
  ResidualMagnitude mag = residual_magnitude(hqp, it);
  for (int k = 0;; ++k) {
    IterationRecord rec;
    rec.k = k;
    rec.mu = it.res.mu;
    rec.rd_norm = it.res.r_d.norm();
    rec.rp_norm = it.res.r_p.norm();
    rec.upsilon = upsilon;
    rec.xs_norm1 = it.x.lpNorm<1>() + it.s.lpNorm<1>();
    const NeighborhoodCheck nb = in_neighborhood(it, cfg, ref);
    rec.nbhd_ratio = nb.ratio;
    rec.centrality = nb.centrality;
    rec.in_nbhd = nb.inside;

    if (it.res.mu <= cfg.tol_mu && it.res.norm_inf() <= res_tol) {
      std::optional<SolveOutcome> outcome;
      try {
        outcome = recover(hqp, it.x, it.lambda, it.s, cfg.recovery);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::kAmbiguousStatus) {
          log.records.push_back(rec);
          throw SolveError(e, std::move(log));
        }
        ambiguous = true;
      }
      if (outcome) {
        log.records.push_back(rec);
        IipmResult out;
        out.outcome = std::move(*outcome);
        out.iterations = k;
        out.hqp_objective = hqp.objective(it.x);
        out.log = std::move(log);
        out.final_iterate = std::move(it);
        return out;
      }
    }
    if (k == cfg.max_iter) {
      log.records.push_back(rec);
      IipmResult out;
      out.outcome.status = SolveStatus::kIterationLimit;
      out.outcome.tau_hat = it.x(n1 - 1);
      out.outcome.omega_hat = it.s(n1 - 1);
      out.iterations = k;
      out.hqp_objective = hqp.objective(it.x);
      out.log = std::move(log);
      out.final_iterate = std::move(it);
      return out;
    }

    try {
      const linsys::NewtonStep dir = newton_direction(hqp, it, sigma);
      rec.sigma = sigma;
      rec.newton_residual = dir.rel_residual;
      rec.newton_backward_error = dir.backward_error;
      const Vector sqrt_ratio = it.x.cwiseQuotient(it.s).cwiseSqrt();
      rec.scaled_step = std::max(dir.dx.cwiseQuotient(sqrt_ratio).norm(),
                                 dir.ds.cwiseProduct(sqrt_ratio).norm()) /
                        (static_cast<double>(n1) * it.res.mu);

      StepResult step = step_length(hqp, it, dir, cfg, ref);
      rec.alpha = step.alpha;
      const double keep = 1.0 - step.alpha;
      const auto rel = [](const Vector& now, const Vector& before, double factor) {
        const double scale = before.norm();
        const double err = (now - factor * before).norm();
        return scale > 0.0 ? err / scale : err;
      };
      rec.decay_err_rd = rel(step.next.res.r_d, it.res.r_d, keep);
      rec.decay_err_rp = rel(step.next.res.r_p, it.res.r_p, keep);
      rec.decay_abs_rd = (step.next.res.r_d - keep * it.res.r_d).norm();
      rec.decay_abs_rp = (step.next.res.r_p - keep * it.res.r_p).norm();
      const ResidualMagnitude next_mag = residual_magnitude(hqp, step.next);
      rec.decay_floor_rd = terms * unit * (next_mag.dual + mag.dual);
      rec.decay_floor_rp = terms * unit * (next_mag.primal + mag.primal);
      mag = next_mag;
      rec.mu_decrease = step.next.res.mu <= (1.0 - 0.01 * step.alpha) * it.res.mu;
      log.records.push_back(rec);
      upsilon *= keep;
      it = std::move(step.next);
    } catch (const Error& e) {
      log.records.push_back(rec);
      if (ambiguous) {
        throw SolveError(Error(ErrorCode::kAmbiguousStatus,
                               std::string("neither reading verified at convergence and "
                                           "iteration then stopped: ") + e.what()),
                         std::move(log));
      }
      throw SolveError(e, std::move(log));
    }
  }
}

struct IterateSizeViolation {
  int k = 0;
  double lhs = 0.0;  ///< zeta * upsilon^k * ||(x^k, s^k)||_1
  double rhs = 0.0;  ///< 4 beta (n+1) mu^k
};

/// Post-hoc check of zeta upsilon^k ||(x^k, s^k)||_1 <= 4 beta (n+1) mu^k.
/// Only meaningful when zeta bounds the size of an optimal (x*, s*), so the
/// check reports nothing unless `solution_norm <= zeta`.
inline std::vector<IterateSizeViolation> iterate_size_diagnostic(const IterationLog& log,
                                                                 double beta, Index n1,
                                                                 double solution_norm) {
  std::vector<IterateSizeViolation> out;
  if (solution_norm > log.zeta) return out;
  for (const auto& r : log.records) {
    const double lhs = log.zeta * r.upsilon * r.xs_norm1;
    const double rhs = 4.0 * beta * static_cast<double>(n1) * r.mu;
    if (lhs > rhs * (1.0 + 1e-12)) out.push_back({r.k, lhs, rhs});
  }
  return out;
}

}  // namespace hqp

#endif  // HQP_IIPM_HPP_
