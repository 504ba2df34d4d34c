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

// Acceptance suite. Prints one PASS/FAIL line per criterion; exits non-zero
// if any selected criterion fails.
//
//   hqp_acceptance              all criteria
//   hqp_acceptance -c 3         criterion 3 only

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "hqp/hqp.hpp"

namespace {

using namespace hqp;
using Clock = std::chrono::steady_clock;

struct Verdict {
  bool pass = true;
  std::string summary;
  std::vector<std::string> details;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      if (details.size() < 12) details.push_back("violation: " + what);
    }
  }
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

struct LoggedRun {
  std::string label;
  InstanceKind kind = InstanceKind::kInfeasibleSv;
  Index n = 0;
  QpProblem problem;
  std::optional<PipelineResult> result;
  std::string error;
  double time_ms = 0.0;
};

PipelineOptions sv_options() {
  PipelineOptions opts;
  opts.iipm.recovery.scale_by_data = false;
  opts.iipm.recovery.tol = 1e-6;
  return opts;
}

LoggedRun run_logged(std::string label, InstanceKind kind, Index n, QpProblem p,
                     const PipelineOptions& opts) {
  LoggedRun r{std::move(label), kind, n, std::move(p), std::nullopt, {}, 0.0};
  const auto t0 = Clock::now();
  try {
    r.result = run_pipeline(r.problem, opts);
  } catch (const std::exception& e) {
    r.error = e.what();
  }
  r.time_ms = ms_since(t0);
  return r;
}

const std::vector<LoggedRun>& sv_runs(InstanceKind kind) {
  static std::map<InstanceKind, std::vector<LoggedRun>> cache;
  auto it = cache.find(kind);
  if (it != cache.end()) return it->second;
  std::vector<LoggedRun> runs;
  for (Index n : {10, 25, 50}) {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      const InstanceSpec spec{kind, n, 1, seed};
      runs.push_back(run_logged(std::string(to_string(kind)) + " n=" + std::to_string(n) +
                                    " seed=" + std::to_string(seed),
                                kind, n, generate(spec), sv_options()));
    }
  }
  return cache.emplace(kind, std::move(runs)).first->second;
}

struct OracleRun {
  LoggedRun run;
  OracleResult oracle;
};

const std::vector<OracleRun>& oracle_runs() {
  static std::optional<std::vector<OracleRun>> cache;
  if (cache) return *cache;
  cache.emplace();
  for (int i = 0; i < 100; ++i) {
    const Index n = 1 + i % 6;
    const Index m = std::min<Index>(i % 4, n);
    const InstanceSpec spec{InstanceKind::kRandomSpd, n, m, 1000 + static_cast<std::uint64_t>(i)};
    QpProblem p = generate(spec);
    OracleResult o = active_set_oracle(p);
    cache->push_back({run_logged("random_spd n=" + std::to_string(n) + " m=" + std::to_string(m) +
                                     " seed=" + std::to_string(spec.seed),
                                 InstanceKind::kRandomSpd, n, std::move(p), {}),
                      std::move(o)});
  }
  return *cache;
}

Verdict criterion1() {
  Verdict v;
  const auto& runs = sv_runs(InstanceKind::kInfeasibleSv);
  int infeasible = 0;
  double worst_r1 = 0, worst_r2 = 0, min_xi = 1e300, worst_obj = 0, worst_ms = 0;
  int max_it = 0;
  for (const auto& r : runs) {
    worst_ms = std::max(worst_ms, r.time_ms);
    v.require(r.time_ms <= 1000.0, r.label + " took " + fmt("%.1f ms", r.time_ms));
    if (!r.result) {
      v.require(false, r.label + ": " + r.error);
      continue;
    }
    const IipmResult& run = r.result->run;
    max_it = std::max(max_it, run.iterations);
    v.require(run.iterations <= 200, r.label + " iterations");
    v.require(run.outcome.status == SolveStatus::kInfeasible,
              r.label + " status " + std::string(to_string(run.outcome.status)));
    if (run.outcome.status != SolveStatus::kInfeasible) continue;
    ++infeasible;
    const InfeasCertificate& cert = *run.outcome.certificate;
    const CertificateResiduals c = check_certificate(r.problem, cert);
    const double r1 = norm_inf(c.r1), r2 = std::abs(c.r2), xi = min_coeff(cert.xi);
    worst_r1 = std::max(worst_r1, r1);
    worst_r2 = std::max(worst_r2, r2);
    min_xi = std::min(min_xi, xi);
    worst_obj = std::max(worst_obj, std::abs(run.hqp_objective));
    v.require(r1 <= 1e-6, r.label + " |E^T nu - xi| = " + fmt("%.3g", r1));
    v.require(r2 <= 1e-6, r.label + " |f^T nu + 1| = " + fmt("%.3g", r2));
    v.require(xi >= -1e-9, r.label + " min xi = " + fmt("%.3g", xi));
    v.require(std::abs(run.hqp_objective) <= 1e-6,
              r.label + " HQP objective " + fmt("%.3g", run.hqp_objective));
  }
  v.summary = "infeasible_sv: " + std::to_string(infeasible) + "/30 infeasible; max |E^T nu - xi| " +
              fmt("%.2e", worst_r1) + ", max |f^T nu + 1| " + fmt("%.2e", worst_r2) + ", min xi " +
              fmt("%.2e", min_xi) + ", max |HQP obj| " + fmt("%.2e", worst_obj) + ", max iters " +
              std::to_string(max_it) + ", max time " + fmt("%.1f ms", worst_ms);
  return v;
}

Verdict criterion2() {
  Verdict v;
  const auto& runs = sv_runs(InstanceKind::kFeasibleSv);
  int optimal = 0;
  double worst = 0, min_tau = 1e300;
  for (const auto& r : runs) {
    if (!r.result) {
      v.require(false, r.label + ": " + r.error);
      continue;
    }
    const IipmResult& run = r.result->run;
    v.require(run.outcome.status == SolveStatus::kOptimal,
              r.label + " status " + std::string(to_string(run.outcome.status)));
    if (run.outcome.status != SolveStatus::kOptimal) continue;
    ++optimal;
    const KktResiduals k = qp_kkt_residuals(r.problem, *run.outcome.optimal);
    worst = std::max(worst, k.worst());
    min_tau = std::min(min_tau, run.outcome.tau_hat);
    v.require(k.worst() <= 1e-6, r.label + " KKT residual " + fmt("%.3g", k.worst()));
    v.require(run.outcome.tau_hat > 0.0, r.label + " tau_hat not positive");
  }
  v.summary = "feasible_sv: " + std::to_string(optimal) + "/30 optimal; max KKT residual " +
              fmt("%.2e", worst) + ", min tau_hat " + fmt("%.3f", min_tau);
  return v;
}

Verdict criterion3() {
  Verdict v;
  const auto t0 = Clock::now();
  const auto& runs = oracle_runs();
  const double total_ms = ms_since(t0);
  int match = 0, optimal = 0;
  double worst_dy = 0;
  for (const auto& [r, o] : runs) {
    if (!r.result) {
      v.require(false, r.label + ": " + r.error);
      continue;
    }
    const SolveOutcome& out = r.result->run.outcome;
    const bool same = out.status == o.status;
    v.require(same, r.label + " solver " + std::string(to_string(out.status)) + " vs oracle " +
                        std::string(to_string(o.status)));
    if (!same) continue;
    ++match;
    if (o.status == SolveStatus::kOptimal) {
      ++optimal;
      const double dy = (out.optimal->y - *o.y_opt).lpNorm<Eigen::Infinity>();
      worst_dy = std::max(worst_dy, dy);
      v.require(dy <= 1e-6, r.label + " |y - y_oracle| = " + fmt("%.3g", dy));
    }
  }
  v.require(total_ms <= 30000.0, "total time " + fmt("%.0f ms", total_ms));
  v.summary = std::to_string(match) + "/100 statuses match (" + std::to_string(optimal) +
              " optimal); max |y - y_oracle| " + fmt("%.2e", worst_dy) + "; total " +
              fmt("%.0f ms", total_ms);
  return v;
}

Matrix normal_matrix(Xoshiro256& rng, Index r, Index c) {
  Matrix m(r, c);
  for (Index j = 0; j < c; ++j)
    for (Index i = 0; i < r; ++i) m(i, j) = rng.normal();
  return m;
}

Vector normal_vector(Xoshiro256& rng, Index n) { return normal_matrix(rng, n, 1).col(0); }

HqpProblem embed_default(const QpProblem& p) {
  const ValidatedProblem vp = validate(p);
  return embed(vp, compute_theta(vp));
}

void pack(const HqpKktPoint& h, Vector& x, Vector& lambda, Vector& s) {
  const Index n = h.y_hat.size();
  x.resize(n + 1);
  s.resize(n + 1);
  x << h.y_hat, h.tau_hat;
  s << h.xi_hat, h.omega_hat;
  lambda = h.nu_hat;
}

Verdict criterion4() {
  Verdict v;
  Xoshiro256 rng(4040);
  double worst1 = 0, worst2 = 0, worst_back = 0;
  for (int t = 0; t < 50; ++t) {
    const Index n = 2 + t % 7;
    const Index m = 1 + t % static_cast<int>(n);
    const Matrix G = normal_matrix(rng, n, n);
    const Matrix C = G.transpose() * G + 0.1 * Matrix::Identity(n, n);

    // Planted optimum: complementary y and xi, arbitrary nu; c and f follow.
    QpProblem p;
    p.C = C;
    p.E = normal_matrix(rng, m, n);
    Vector y = Vector::Zero(n), xi = Vector::Zero(n);
    for (Index i = 0; i < n; ++i) {
      if (rng.uniform_open_closed() < 0.6) y(i) = rng.uniform_open_closed();
      else xi(i) = rng.uniform_open_closed();
    }
    const Vector nu = normal_vector(rng, m);
    p.c = -(C * y + p.E.transpose() * nu - xi);
    p.f = p.E * y;
    const HqpProblem h1 = embed_default(p);
    const HqpKktPoint lifted = lift_optimal(p, h1.theta(), {y, nu, xi});
    const double r1 = hqp_kkt_residuals(p, h1.theta(), lifted).worst();
    worst1 = std::max(worst1, r1);
    v.require(r1 <= 1e-10, "planted optimum " + std::to_string(t) + " residual " + fmt("%.3g", r1));
    v.require(lifted.tau_hat > 0.0, "planted optimum " + std::to_string(t) + " tau not positive");
    Vector x, lambda, s;
    pack(lifted, x, lambda, s);
    const SolveOutcome back = recover(h1, x, lambda, s);
    v.require(back.status == SolveStatus::kOptimal,
              "planted optimum " + std::to_string(t) + " recovered as non-optimal");
    if (back.optimal) {
      const double d = std::max({(back.optimal->y - y).lpNorm<Eigen::Infinity>(),
                                 (back.optimal->nu - nu).lpNorm<Eigen::Infinity>(),
                                 (back.optimal->xi - xi).lpNorm<Eigen::Infinity>()});
      worst_back = std::max(worst_back, d);
      v.require(d <= 1e-10, "planted optimum " + std::to_string(t) + " round trip " + fmt("%.3g", d));
    }

    // Planted certificate: flip columns so E^T nu0 >= 0, then shift f to f^T nu0 = -1.
    QpProblem q;
    q.C = C;
    q.c = normal_vector(rng, n);
    q.E = normal_matrix(rng, m, n);
    const Vector nu0 = normal_vector(rng, m);
    for (Index j = 0; j < n; ++j)
      if (q.E.col(j).dot(nu0) < 0.0) q.E.col(j) *= -1.0;
    const Vector xi0 = q.E.transpose() * nu0;
    const Vector g = normal_vector(rng, m);
    q.f = g - ((g.dot(nu0) + 1.0) / nu0.squaredNorm()) * nu0;
    const HqpProblem h2 = embed_default(q);
    const HqpKktPoint cert = lift_certificate(q, h2.theta(), {nu0, xi0});
    const double r2 = hqp_kkt_residuals(q, h2.theta(), cert).worst();
    worst2 = std::max(worst2, r2);
    v.require(r2 <= 1e-10, "planted certificate " + std::to_string(t) + " residual " + fmt("%.3g", r2));
    pack(cert, x, lambda, s);
    const SolveOutcome back2 = recover(h2, x, lambda, s);
    v.require(back2.status == SolveStatus::kInfeasible,
              "planted certificate " + std::to_string(t) + " recovered as feasible");
    if (back2.certificate) {
      const double d = std::max((back2.certificate->nu - nu0).lpNorm<Eigen::Infinity>(),
                                (back2.certificate->xi - xi0).lpNorm<Eigen::Infinity>());
      worst_back = std::max(worst_back, d);
      v.require(d <= 1e-10, "planted certificate " + std::to_string(t) + " round trip " + fmt("%.3g", d));
    }
  }
  v.summary = "50 planted optima max lifted residual " + fmt("%.2e", worst1) +
              "; 50 planted certificates max lifted residual " + fmt("%.2e", worst2) +
              "; max recovery round-trip error " + fmt("%.2e", worst_back);
  return v;
}

Verdict criterion5() {
  Verdict v;
  double min_lam = 1e300, min_margin1 = 1e300;
  int ordered = 0;
  for (int t = 0; t < 50; ++t) {
    const Index n = 2 + t % 9;
    const Index m = 1 + (t / 9) % static_cast<int>(n);
    const ValidatedProblem vp =
        validate(generate({InstanceKind::kRandomSpd, n, m, 5000 + static_cast<std::uint64_t>(t)}));
    const ThetaReport r = compute_theta(vp);
    const double lam = check_reduced_hessian_pd(vp, r.theta);
    min_lam = std::min(min_lam, lam);
    min_margin1 = std::min(min_margin1, r.theta - 2.0 * std::abs(r.theta_star));
    v.require(lam > 0.0, "instance " + std::to_string(t) + " lifted lambda_min " + fmt("%.3g", lam));
    v.require(r.theta > 2.0 * std::abs(r.theta_star), "instance " + std::to_string(t) + " theta <= 2|theta*|");
    const double exact = pd_bound_rhs(vp, ThetaMode::kExactZ);
    const double norm = pd_bound_rhs(vp, ThetaMode::kNormRelaxed);
    v.require(exact <= norm, "instance " + std::to_string(t) + " exact bound " + fmt("%.17g", exact) +
                                 " > norm bound " + fmt("%.17g", norm));
    if (exact <= norm) ++ordered;
  }
  v.summary = "50 instances: min lifted lambda_min " + fmt("%.3e", min_lam) +
              ", min theta - 2|theta*| " + fmt("%.3e", min_margin1) + ", exact <= norm on " +
              std::to_string(ordered) + "/50";
  return v;
}

std::vector<const LoggedRun*> all_logged_runs() {
  std::vector<const LoggedRun*> out;
  for (const auto& r : sv_runs(InstanceKind::kInfeasibleSv)) out.push_back(&r);
  for (const auto& r : sv_runs(InstanceKind::kFeasibleSv)) out.push_back(&r);
  for (const auto& r : oracle_runs()) out.push_back(&r.run);
  return out;
}

Verdict criterion6() {
  Verdict v;
  std::size_t steps = 0, records = 0;
  int nbhd_bad = 0, mu_bad = 0, decay_bad = 0, newton_bad = 0, decay_floor_bad = 0;
  double max_decay = 0, max_newton = 0, max_backward = 0, max_floor_ratio = 0;
  std::string first_decay, first_newton;
  for (const LoggedRun* r : all_logged_runs()) {
    if (!r->result) continue;
    for (const IterationRecord& rec : r->result->run.log.records) {
      ++records;
      if (!rec.in_nbhd) {
        ++nbhd_bad;
        v.require(false, r->label + " k=" + std::to_string(rec.k) + " outside the neighborhood");
      }
      if (!std::isfinite(rec.alpha)) continue;
      ++steps;
      if (!rec.mu_decrease) {
        ++mu_bad;
        v.require(false, r->label + " k=" + std::to_string(rec.k) + " insufficient mu decrease");
      }
      const double decay = std::max(rec.decay_err_rd, rec.decay_err_rp);
      max_decay = std::max(max_decay, decay);
      if (decay > 1e-8) {
        if (decay_bad++ == 0)
          first_decay = r->label + " k=" + std::to_string(rec.k) + " relative decay error " +
                        fmt("%.3g", decay) + " at ||r_d|| " + fmt("%.3g", rec.rd_norm) +
                        ", ||r_p|| " + fmt("%.3g", rec.rp_norm);
      }
      const double floor_ratio =
          std::max(rec.decay_abs_rd / (1e-8 * rec.rd_norm + rec.decay_floor_rd),
                   rec.decay_abs_rp / (1e-8 * rec.rp_norm + rec.decay_floor_rp));
      max_floor_ratio = std::max(max_floor_ratio, floor_ratio);
      if (floor_ratio > 1.0) ++decay_floor_bad;
      max_newton = std::max(max_newton, rec.newton_residual);
      max_backward = std::max(max_backward, rec.newton_backward_error);
      if (rec.newton_residual > 1e-10) {
        if (newton_bad++ == 0)
          first_newton = r->label + " k=" + std::to_string(rec.k) + " Newton residual " +
                         fmt("%.3g", rec.newton_residual) + " relative to ||rhs||";
      }
    }
  }
  v.require(decay_bad == 0, std::to_string(decay_bad) + " steps exceed 1e-8 relative decay error; first: " + first_decay);
  v.require(newton_bad == 0, std::to_string(newton_bad) + " Newton solves exceed 1e-10 relative residual; first: " + first_newton);
  v.summary = std::to_string(records) + " iterates / " + std::to_string(steps) + " steps over " +
              std::to_string(all_logged_runs().size()) + " runs";
  v.details.insert(v.details.begin(),
                   {std::string(nbhd_bad ? "FAIL" : "pass") + " neighborhood membership: " +
                        std::to_string(nbhd_bad) + " violations",
                    std::string(mu_bad ? "FAIL" : "pass") + " mu decrease: " +
                        std::to_string(mu_bad) + " violations",
                    std::string(decay_bad ? "FAIL" : "pass") +
                        " residual decay to 1e-8 relative: max " + fmt("%.3e", max_decay) + ", " +
                        std::to_string(decay_bad) + " steps over",
                    std::string(newton_bad ? "FAIL" : "pass") +
                        " Newton residual to 1e-10 relative to ||rhs||: max " +
                        fmt("%.3e", max_newton) + ", " + std::to_string(newton_bad) +
                        " solves over",
                    "info residual decay error / (1e-8 ||r^k|| + rounding bound): max " +
                        fmt("%.3f", max_floor_ratio) + ", " + std::to_string(decay_floor_bad) +
                        " steps over 1",
                    "info Newton normwise backward error: max " + fmt("%.3e", max_backward)});
  return v;
}

Verdict criterion7() {
  Verdict v;
  Xoshiro256 rng(7007);
  double worst_rel = 0, worst_neg = 0;
  int samples = 0;
  for (int t = 0; t < 50; ++t) {
    const Index n = 2 + t % 9;
    const Index m = 1 + t % static_cast<int>(n);
    const ValidatedProblem vp =
        validate(generate({InstanceKind::kRandomSpd, n, m, 7000 + static_cast<std::uint64_t>(t)}));
    const HqpProblem h = embed(vp, compute_theta(vp));
    const Matrix zh = lifted_nullspace_basis(vp);
    for (int k = 0; k < 20; ++k, ++samples) {
      const Vector x = zh * normal_vector(rng, zh.cols());
      const Vector lambda = normal_vector(rng, h.rows());
      const Vector s = h.Q * x + h.A.transpose() * lambda;
      const double quad = x.dot(h.Q * x);
      const double pair = x.dot(s);
      const double rel = std::abs(quad - pair) / std::abs(quad);
      const double neg = -pair / x.squaredNorm();
      worst_rel = std::max(worst_rel, rel);
      worst_neg = std::max(worst_neg, neg);
      v.require(rel <= 1e-10, "sample " + std::to_string(samples) + " relative gap " + fmt("%.3g", rel));
      v.require(pair >= -1e-10 * x.squaredNorm(), "sample " + std::to_string(samples) + " negative pairing");
    }
  }
  v.summary = std::to_string(samples) + " samples: max |x'Qx - x's| / |x'Qx| " +
              fmt("%.2e", worst_rel) + ", max -x's / ||x||^2 " + fmt("%.2e", worst_neg);
  return v;
}

Verdict criterion8() {
  Verdict v;
  std::ostringstream table;
  int worst = 0;
  for (InstanceKind kind : {InstanceKind::kInfeasibleSv, InstanceKind::kFeasibleSv}) {
    for (Index n : {10, 25, 50}) {
      int lo = 1 << 30, hi = 0, sum = 0, count = 0;
      for (const auto& r : sv_runs(kind)) {
        if (r.n != n) continue;
        if (!r.result) {
          v.require(false, r.label + ": " + r.error);
          continue;
        }
        const int it = r.result->run.iterations;
        lo = std::min(lo, it);
        hi = std::max(hi, it);
        sum += it;
        ++count;
        v.require(it <= 200, r.label + " used " + std::to_string(it) + " iterations");
      }
      worst = std::max(worst, hi);
      v.details.push_back("info " + std::string(to_string(kind)) + " n=" + std::to_string(n) +
                          ": iterations min " + std::to_string(lo) + ", mean " +
                          fmt("%.1f", count ? static_cast<double>(sum) / count : 0.0) + ", max " +
                          std::to_string(hi));
    }
  }
  v.summary = "max iterations " + std::to_string(worst) + " (limit 200)";
  return v;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"hqp acceptance suite"};
  std::vector<int> selected;
  app.add_option("-c,--criterion", selected, "Criteria to run (default all)")
      ->check(CLI::Range(1, 8));
  CLI11_PARSE(app, argc, argv);
  if (selected.empty()) selected = {1, 2, 3, 4, 5, 6, 7, 8};

  const std::vector<std::function<Verdict()>> criteria{criterion1, criterion2, criterion3,
                                                       criterion4, criterion5, criterion6,
                                                       criterion7, criterion8};
  const char* names[] = {"infeasible family reproduction", "feasible family reproduction",
                         "oracle equivalence",             "embedding round trips",
                         "theta conditions",               "per-iteration invariants",
                         "nullspace pairing property",     "iteration budget"};
  bool all = true;
  for (int c : selected) {
    const Verdict v = criteria[static_cast<std::size_t>(c - 1)]();
    all = all && v.pass;
    std::cout << (v.pass ? "PASS" : "FAIL") << " criterion " << c << " (" << names[c - 1]
              << "): " << v.summary << '\n';
    for (const auto& d : v.details) std::cout << "    " << d << '\n';
  }
  return all ? 0 : 1;
}
