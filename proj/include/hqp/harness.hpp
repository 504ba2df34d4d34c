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

#ifndef HQP_HARNESS_HPP_
#define HQP_HARNESS_HPP_

/**
 * @file
 * @brief Random instance families, a brute-force reference solver and the
 * experiment sweep.
 */

#include <Eigen/Dense>

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <iterator>
#include <limits>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "hqp/common.hpp"
#include "hqp/homogenize.hpp"
#include "hqp/iipm.hpp"
#include "hqp/qp_core.hpp"

namespace hqp {

/// xoshiro256** seeded through splitmix64.
class Xoshiro256 {
 public:
  using result_type = std::uint64_t;

  explicit Xoshiro256(std::uint64_t seed) {
    for (auto& w : state_) {
      seed += 0x9e3779b97f4a7c15ULL;
      std::uint64_t z = seed;
      z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
      z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
      w = z ^ (z >> 31);
    }
  }

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() {
    const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  /// Uniform on (0, 1].
  double uniform_open_closed() {
    return static_cast<double>(((*this)() >> 11) + 1) * 0x1.0p-53;
  }

  /// Standard normal via Box-Muller.
  double normal() {
    if (spare_) {
      const double v = *spare_;
      spare_.reset();
      return v;
    }
    const double u1 = uniform_open_closed();
    const double u2 = uniform_open_closed();
    const double r = std::sqrt(-2.0 * std::log(u1));
    constexpr double kTwoPi = 6.283185307179586476925286766559;
    spare_ = r * std::sin(kTwoPi * u2);
    return r * std::cos(kTwoPi * u2);
  }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
  std::uint64_t state_[4];
  std::optional<double> spare_;
};

enum class InstanceKind { kInfeasibleSv, kFeasibleSv, kRandomSpd };

inline std::string_view to_string(InstanceKind k) {
  switch (k) {
    case InstanceKind::kInfeasibleSv: return "infeasible_sv";
    case InstanceKind::kFeasibleSv: return "feasible_sv";
    case InstanceKind::kRandomSpd: return "random_spd";
  }
  return "unknown";
}

inline std::optional<InstanceKind> parse_instance_kind(std::string_view s) {
  if (s == "infeasible_sv") return InstanceKind::kInfeasibleSv;
  if (s == "feasible_sv") return InstanceKind::kFeasibleSv;
  if (s == "random_spd") return InstanceKind::kRandomSpd;
  return std::nullopt;
}

struct InstanceSpec {
  InstanceKind kind = InstanceKind::kInfeasibleSv;
  Index n = 10;
  /// Ignored for the single-row kinds.
  Index m = 1;
  std::uint64_t seed = 0;
};

/// Single-row kinds: C = I, c = e, E uniform on (0, 1], f = -1 (infeasible) or
/// +1 (feasible). random_spd: C = G^T G + 0.1 I with standard normal G, and
/// standard normal c, E, f.
inline QpProblem generate(const InstanceSpec& spec) {
  HQP_CHECK(spec.n >= 1, ErrorCode::kInvalidConfig, "n must be positive");
  Xoshiro256 rng(spec.seed);
  QpProblem p;
  const Index n = spec.n;
  if (spec.kind == InstanceKind::kRandomSpd) {
    HQP_CHECK(spec.m >= 0 && spec.m <= n, ErrorCode::kInvalidConfig, "need 0 <= m <= n");
    Matrix G(n, n);
    for (Index j = 0; j < n; ++j)
      for (Index i = 0; i < n; ++i) G(i, j) = rng.normal();
    p.C = G.transpose() * G + 0.1 * Matrix::Identity(n, n);
    p.c.resize(n);
    for (Index i = 0; i < n; ++i) p.c(i) = rng.normal();
    p.E.resize(spec.m, n);
    for (Index j = 0; j < n; ++j)
      for (Index i = 0; i < spec.m; ++i) p.E(i, j) = rng.normal();
    p.f.resize(spec.m);
    for (Index i = 0; i < spec.m; ++i) p.f(i) = rng.normal();
    return p;
  }
  p.C = Matrix::Identity(n, n);
  p.c = Vector::Ones(n);
  p.E.resize(1, n);
  for (Index j = 0; j < n; ++j) p.E(0, j) = rng.uniform_open_closed();
  p.f = Vector::Constant(1, spec.kind == InstanceKind::kInfeasibleSv ? -1.0 : 1.0);
  return p;
}

// ---------------------------------------------------------------------------
// Brute-force reference solver.

struct OracleResult {
  SolveStatus status = SolveStatus::kInfeasible;
  std::optional<Vector> y_opt;
  std::optional<Vector> nu;
  std::optional<Vector> xi;
  /// Indices held at zero in the optimal point.
  std::optional<std::vector<Index>> active_set;
};

namespace detail {

inline std::vector<Index> bits_to_indices(std::uint64_t mask, Index n, bool set) {
  std::vector<Index> out;
  for (Index i = 0; i < n; ++i)
    if (((mask >> i) & 1U) == static_cast<unsigned>(set)) out.push_back(i);
  return out;
}

inline Matrix select_cols(const Matrix& a, const std::vector<Index>& idx) {
  Matrix out(a.rows(), static_cast<Index>(idx.size()));
  for (std::size_t k = 0; k < idx.size(); ++k) out.col(static_cast<Index>(k)) = a.col(idx[k]);
  return out;
}

/// Decides whether {y >= 0 : E y = f} is nonempty. One row: f must lie in the
/// cone spanned by the row entries. Several rows: search for a nonnegative
/// basic solution over all column supports of size m.
inline bool feasible_by_enumeration(const QpProblem& p, double tol) {
  const Index n = p.n();
  const Index m = p.m();
  if (m == 0 || p.f.isZero(0.0)) return true;
  if (m == 1) {
    const double f = p.f(0);
    const Vector row = p.E.row(0);
    return f > 0.0 ? (row.array() > 0.0).any() : (row.array() < 0.0).any();
  }
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << n); ++mask) {
    if (std::popcount(mask) != m) continue;
    const Matrix B = select_cols(p.E, bits_to_indices(mask, n, true));
    Eigen::FullPivLU<Matrix> lu(B);
    if (!lu.isInvertible()) continue;
    const Vector yb = lu.solve(p.f);
    if ((yb.array() >= -tol).all()) return true;
  }
  return false;
}

}  // namespace detail

/// Enumerates every set of free variables F. With y = 0 off F, the equality
/// constrained KKT system on F gives a candidate; the first candidate with
/// y_F >= 0 and nonnegative bound multipliers is the optimum, which is unique
/// when C is positive definite on null(E).
inline OracleResult active_set_oracle(const QpProblem& p, double tol = 1e-9) {
  check_dimensions(p);
  const Index n = p.n();
  const Index m = p.m();
  HQP_CHECK(n <= 20, ErrorCode::kTooLarge, "enumeration oracle limited to n <= 20");
  OracleResult out;
  const double scale = data_scale(p);
  if (!detail::feasible_by_enumeration(p, tol * scale)) {
    out.status = SolveStatus::kInfeasible;
    return out;
  }
  const Matrix C = 0.5 * (p.C + p.C.transpose());
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << n); ++mask) {
    const auto free_idx = detail::bits_to_indices(mask, n, true);
    const Index k = static_cast<Index>(free_idx.size());
    if (k < m) continue;
    Matrix K = Matrix::Zero(k + m, k + m);
    for (Index a = 0; a < k; ++a)
      for (Index b = 0; b < k; ++b) K(a, b) = C(free_idx[a], free_idx[b]);
    const Matrix EF = detail::select_cols(p.E, free_idx);
    K.topRightCorner(k, m) = EF.transpose();
    K.bottomLeftCorner(m, k) = EF;
    Vector rhs(k + m);
    for (Index a = 0; a < k; ++a) rhs(a) = -p.c(free_idx[a]);
    rhs.tail(m) = p.f;
    Vector z(0);
    if (k + m > 0) {
      Eigen::FullPivLU<Matrix> lu(K);
      if (!lu.isInvertible()) continue;
      z = lu.solve(rhs);
    }
    Vector y = Vector::Zero(n);
    for (Index a = 0; a < k; ++a) y(free_idx[a]) = z(a);
    const Vector nu = z.tail(m);
    Vector xi = C * y + p.c + p.E.transpose() * nu;
    for (Index i : free_idx) xi(i) = 0.0;
    if ((y.array() >= -tol * scale).all() && (xi.array() >= -tol * scale).all() &&
        norm_inf(Vector(p.E * y - p.f)) <= tol * scale) {
      out.status = SolveStatus::kOptimal;
      out.y_opt = y.cwiseMax(0.0);
      out.nu = nu;
      out.xi = xi.cwiseMax(0.0);
      out.active_set = detail::bits_to_indices(mask, n, false);
      return out;
    }
  }
  throw Error(ErrorCode::kAmbiguousStatus,
              "feasible problem but no active set satisfied the KKT conditions");
}

// ---------------------------------------------------------------------------
// Full pipeline and sweeps.

struct PipelineOptions {
  ThetaOptions theta;
  /// Skips compute_theta when set; the lifted reduced Hessian is still checked.
  std::optional<double> theta_override;
  IipmConfig iipm;
  ValidationTolerances validation;
};

struct PipelineResult {
  ValidatedProblem problem;
  HqpProblem hqp;
  IipmResult run;
};

/// validate -> theta -> embed -> solve (-> recover).
inline PipelineResult run_pipeline(const QpProblem& problem, const PipelineOptions& opts = {}) {
  ValidatedProblem vp = validate(problem, opts.validation);
  ThetaReport report;
  if (opts.theta_override) {
    report = theta_override(vp, *opts.theta_override);
    const double lam = check_reduced_hessian_pd(vp, report.theta);
    HQP_CHECK(report.theta > 0.0 && lam > 0.0, ErrorCode::kInvalidConfig,
              "theta override leaves the lifted reduced Hessian indefinite (lambda_min = " +
                  std::to_string(lam) + ")");
  } else {
    report = compute_theta(vp, opts.theta);
  }
  HqpProblem hqp = embed(vp, report);
  IipmResult run = solve(hqp, opts.iipm);
  return PipelineResult{std::move(vp), std::move(hqp), std::move(run)};
}

struct ExperimentRow {
  InstanceKind kind = InstanceKind::kInfeasibleSv;
  Index n = 0;
  std::uint64_t seed = 0;
  /// optimal / infeasible / iteration_limit / error
  std::string status;
  int iters = 0;
  double mu_final = std::numeric_limits<double>::quiet_NaN();
  double rd_final = std::numeric_limits<double>::quiet_NaN();
  double rp_final = std::numeric_limits<double>::quiet_NaN();
  std::optional<double> cert_res;
  std::optional<double> kkt_res;
  double theta = std::numeric_limits<double>::quiet_NaN();
  double hqp_objective = std::numeric_limits<double>::quiet_NaN();
  double time_ms = 0.0;
  std::string message;
};

struct ExperimentReport {
  std::vector<ExperimentRow> rows;

  void write_csv(std::ostream& os) const {
    os << "kind,n,seed,status,iters,mu_final,rd_final,rp_final,cert_res,kkt_res,theta,time_ms\n";
    const auto old = os.precision(17);
    for (const auto& r : rows) {
      os << to_string(r.kind) << ',' << r.n << ',' << r.seed << ',' << r.status << ',' << r.iters
         << ',' << r.mu_final << ',' << r.rd_final << ',' << r.rp_final << ',';
      if (r.cert_res) os << *r.cert_res;
      os << ',';
      if (r.kkt_res) os << *r.kkt_res;
      os << ',' << r.theta << ',' << r.time_ms << '\n';
    }
    os.precision(old);
  }

  /// One line per (kind, n): status counts and iteration range.
  void write_summary(std::ostream& os) const {
    struct Group {
      InstanceKind kind;
      Index n;
      int total = 0, optimal = 0, infeasible = 0, other = 0, min_it = 0, max_it = 0;
      double time_ms = 0.0;
    };
    std::vector<Group> groups;
    for (const auto& r : rows) {
      auto it = std::find_if(groups.begin(), groups.end(),
                             [&](const Group& g) { return g.kind == r.kind && g.n == r.n; });
      if (it == groups.end()) {
        groups.push_back(Group{r.kind, r.n, 0, 0, 0, 0, r.iters, r.iters, 0.0});
        it = std::prev(groups.end());
      }
      ++it->total;
      if (r.status == "optimal") ++it->optimal;
      else if (r.status == "infeasible") ++it->infeasible;
      else ++it->other;
      it->min_it = std::min(it->min_it, r.iters);
      it->max_it = std::max(it->max_it, r.iters);
      it->time_ms += r.time_ms;
    }
    for (const auto& g : groups) {
      os << to_string(g.kind) << " n=" << g.n << ": " << g.total << " runs, " << g.optimal
         << " optimal, " << g.infeasible << " infeasible, " << g.other << " other; iterations "
         << g.min_it << '-' << g.max_it << "; mean time " << (g.total ? g.time_ms / g.total : 0.0)
         << " ms\n";
    }
  }
};

/// Runs the pipeline on one generated instance; failures become rows with
/// status "error" instead of propagating.
inline ExperimentRow run_instance(const InstanceSpec& spec, const PipelineOptions& opts) {
  ExperimentRow row;
  row.kind = spec.kind;
  row.n = spec.n;
  row.seed = spec.seed;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    const PipelineResult res = run_pipeline(generate(spec), opts);
    const IipmResult& run = res.run;
    row.status = std::string(to_string(run.outcome.status));
    row.iters = run.iterations;
    row.mu_final = run.final_iterate.res.mu;
    row.rd_final = hqp::norm_inf(run.final_iterate.res.r_d);
    row.rp_final = hqp::norm_inf(run.final_iterate.res.r_p);
    if (run.outcome.status == SolveStatus::kInfeasible && run.outcome.cert_check)
      row.cert_res = run.outcome.cert_check->worst();
    if (run.outcome.status == SolveStatus::kOptimal && run.outcome.kkt_check)
      row.kkt_res = run.outcome.kkt_check->worst();
    row.theta = res.hqp.theta();
    row.hqp_objective = run.hqp_objective;
  } catch (const SolveError& e) {
    row.status = "error";
    row.iters = static_cast<int>(e.log().records.size()) - 1;
    row.message = e.what();
  } catch (const std::exception& e) {
    row.status = "error";
    row.message = e.what();
  }
  row.time_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  return row;
}

/// Seeds are base_seed, base_seed + 1, ..., base_seed + reps - 1 for every
/// (kind, n) pair.
inline ExperimentReport run_experiment(const std::vector<InstanceKind>& kinds,
                                       const std::vector<Index>& sizes, int reps,
                                       const PipelineOptions& opts = {},
                                       std::uint64_t base_seed = 0, Index random_m = 1) {
  ExperimentReport report;
  for (InstanceKind kind : kinds) {
    for (Index n : sizes) {
      for (int r = 0; r < reps; ++r) {
        InstanceSpec spec{kind, n, kind == InstanceKind::kRandomSpd ? std::min(random_m, n) : 1,
                          base_seed + static_cast<std::uint64_t>(r)};
        report.rows.push_back(run_instance(spec, opts));
      }
    }
  }
  return report;
}

}  // namespace hqp

#endif  // HQP_HARNESS_HPP_
