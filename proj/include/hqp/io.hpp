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

#ifndef HQP_IO_HPP_
#define HQP_IO_HPP_

/**
 * @file
 * @brief JSON problem files and solution documents.
 *
 * Problem file:
 *
 *   {"n": 2, "m": 1,
 *    "C": {"format": "dense", "data": [1, 0, 0, 1]},
 *    "c": [1, 1],
 *    "E": {"format": "coo", "rows": [0, 0], "cols": [0, 1], "vals": [1, 1]},
 *    "f": [-1],
 *    "min_eig_lower_bound": 0.5}
 *
 * Dense data is row-major. COO indices are 0-based and duplicates are summed.
 * Unknown keys are rejected.
 */

#include <json.hpp>

#include <cmath>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "hqp/common.hpp"
#include "hqp/harness.hpp"
#include "hqp/homogenize.hpp"
#include "hqp/iipm.hpp"
#include "hqp/qp_core.hpp"

namespace hqp::io {

using nlohmann::json;

namespace detail {

[[noreturn]] inline void fail(const std::string& msg) { throw Error(ErrorCode::kParseError, msg); }

inline void reject_unknown(const json& obj, const std::set<std::string>& allowed,
                           const std::string& where) {
  for (const auto& [key, _] : obj.items()) {
    if (!allowed.count(key)) fail("unknown field '" + key + "' in " + where);
  }
}

inline double number(const json& v, const std::string& what) {
  if (!v.is_number()) fail(what + " must be a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) fail(what + " must be finite");
  return d;
}

inline Index integer(const json& v, const std::string& what) {
  if (!v.is_number_integer()) fail(what + " must be an integer");
  return v.get<Index>();
}

inline Vector vector(const json& v, Index len, const std::string& what) {
  if (!v.is_array()) fail(what + " must be an array");
  if (static_cast<Index>(v.size()) != len)
    fail(what + " must have " + std::to_string(len) + " entries");
  Vector out(len);
  for (Index i = 0; i < len; ++i) out(i) = number(v[static_cast<std::size_t>(i)], what);
  return out;
}

inline Matrix matrix(const json& v, Index rows, Index cols, const std::string& what) {
  if (!v.is_object() || !v.contains("format")) fail(what + " must be an object with a format");
  const json& fmt = v.at("format");
  if (fmt == "dense") {
    reject_unknown(v, {"format", "data"}, what);
    if (!v.contains("data")) fail(what + " is missing data");
    const Vector flat = vector(v.at("data"), rows * cols, what + ".data");
    Matrix out(rows, cols);
    for (Index i = 0; i < rows; ++i)
      for (Index j = 0; j < cols; ++j) out(i, j) = flat(i * cols + j);
    return out;
  }
  if (fmt == "coo") {
    reject_unknown(v, {"format", "rows", "cols", "vals"}, what);
    if (!v.contains("rows") || !v.contains("cols") || !v.contains("vals"))
      fail(what + " needs rows, cols and vals");
    const json &r = v.at("rows"), &c = v.at("cols"), &x = v.at("vals");
    if (!r.is_array() || !c.is_array() || !x.is_array() || r.size() != c.size() ||
        r.size() != x.size())
      fail(what + " rows/cols/vals must be arrays of equal length");
    Matrix out = Matrix::Zero(rows, cols);
    for (std::size_t k = 0; k < r.size(); ++k) {
      const Index i = integer(r[k], what + ".rows");
      const Index j = integer(c[k], what + ".cols");
      if (i < 0 || i >= rows || j < 0 || j >= cols) fail(what + " index out of range");
      out(i, j) += number(x[k], what + ".vals");
    }
    return out;
  }
  fail(what + ".format must be \"dense\" or \"coo\"");
}

inline json dense(const Matrix& a) {
  std::vector<double> flat;
  flat.reserve(static_cast<std::size_t>(a.size()));
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = 0; j < a.cols(); ++j) flat.push_back(a(i, j));
  return json{{"format", "dense"}, {"data", flat}};
}

}  // namespace detail

inline json to_json(const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

inline Vector vector_from_json(const json& v) {
  if (!v.is_array()) detail::fail("expected an array");
  return detail::vector(v, static_cast<Index>(v.size()), "array");
}

inline QpProblem problem_from_json(const json& doc) {
  if (!doc.is_object()) detail::fail("problem must be a JSON object");
  detail::reject_unknown(doc, {"n", "m", "C", "c", "E", "f", "min_eig_lower_bound"}, "problem");
  for (const char* key : {"n", "m", "C", "c", "E", "f"})
    if (!doc.contains(key)) detail::fail(std::string("problem is missing '") + key + "'");
  const Index n = detail::integer(doc.at("n"), "n");
  const Index m = detail::integer(doc.at("m"), "m");
  if (n < 1) detail::fail("n must be positive");
  if (m < 0 || m > n) detail::fail("m must satisfy 0 <= m <= n");
  QpProblem p;
  p.C = detail::matrix(doc.at("C"), n, n, "C");
  p.c = detail::vector(doc.at("c"), n, "c");
  p.E = detail::matrix(doc.at("E"), m, n, "E");
  p.f = detail::vector(doc.at("f"), m, "f");
  if (doc.contains("min_eig_lower_bound"))
    p.min_eig_lower_bound = detail::number(doc.at("min_eig_lower_bound"), "min_eig_lower_bound");
  return p;
}

inline QpProblem parse_problem(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    detail::fail(std::string("malformed JSON: ") + e.what());
  }
  return problem_from_json(doc);
}

inline json problem_to_json(const QpProblem& p) {
  json doc{{"n", p.n()},
           {"m", p.m()},
           {"C", detail::dense(p.C)},
           {"c", to_json(p.c)},
           {"E", detail::dense(p.E)},
           {"f", to_json(p.f)}};
  if (p.min_eig_lower_bound) doc["min_eig_lower_bound"] = *p.min_eig_lower_bound;
  return doc;
}

// ---------------------------------------------------------------------------
// Solution document.

struct SolutionDocument {
  /// "optimal", "infeasible", "iteration_limit" or "error".
  std::string status;
  std::optional<Vector> y, nu, xi;
  std::optional<Vector> cert_nu, cert_xi;
  json theta_report;
  json residuals;
  std::vector<IterationRecord> iterations;
  json config_echo;
  std::optional<std::string> message;
};

inline json to_json(const ThetaReport& r) {
  return json{{"theta_star", r.theta_star},
              {"bound_used", std::string(to_string(r.bound_used))},
              {"pd_bound_rhs", r.pd_bound_rhs},
              {"condition1_rhs", r.condition1_rhs},
              {"theta", r.theta},
              {"margin", r.margin},
              {"overridden", r.overridden}};
}

inline json to_json(const IipmConfig& c) {
  json out{{"gamma", c.gamma},
           {"beta", c.beta},
           {"sigma", c.sigma},
           {"sigma_min", c.sigma_min},
           {"sigma_max", c.sigma_max},
           {"tol_mu", c.tol_mu},
           {"tol_res", c.tol_res},
           {"max_iter", c.max_iter},
           {"step_backtrack", c.step_backtrack},
           {"step_trials", c.step_trials},
           {"tol_recover", c.recovery.tol}};
  out["zeta"] = c.zeta ? json(*c.zeta) : json("auto");
  return out;
}

inline json to_json(const PipelineOptions& o) {
  json out{{"iipm", to_json(o.iipm)}, {"theta_margin", o.theta.margin}, {"theta_floor", o.theta.floor}};
  out["theta_mode"] = o.theta.mode ? json(std::string(to_string(*o.theta.mode))) : json("auto");
  out["theta"] = o.theta_override ? json(*o.theta_override) : json(nullptr);
  return out;
}

namespace detail {

/// Non-finite values (NaN alpha/sigma on the last record) serialize as null.
inline json num_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }
inline double null_or_num(const json& v) {
  return v.is_null() ? std::numeric_limits<double>::quiet_NaN() : v.get<double>();
}

}  // namespace detail

inline json to_json(const IterationRecord& r) {
  return json{{"k", r.k},
              {"mu", r.mu},
              {"rd_norm", r.rd_norm},
              {"rp_norm", r.rp_norm},
              {"alpha", detail::num_or_null(r.alpha)},
              {"sigma", detail::num_or_null(r.sigma)},
              {"nbhd_ratio", detail::num_or_null(r.nbhd_ratio)},
              {"upsilon", r.upsilon}};
}

inline IterationRecord record_from_json(const json& j) {
  IterationRecord r;
  r.k = j.at("k").get<int>();
  r.mu = j.at("mu").get<double>();
  r.rd_norm = j.at("rd_norm").get<double>();
  r.rp_norm = j.at("rp_norm").get<double>();
  r.alpha = detail::null_or_num(j.at("alpha"));
  r.sigma = detail::null_or_num(j.at("sigma"));
  r.nbhd_ratio = detail::null_or_num(j.at("nbhd_ratio"));
  r.upsilon = j.at("upsilon").get<double>();
  return r;
}

inline json to_json(const SolutionDocument& d) {
  json out{{"status", d.status}};
  if (d.y) out["y"] = to_json(*d.y);
  if (d.nu) out["nu"] = to_json(*d.nu);
  if (d.xi) out["xi"] = to_json(*d.xi);
  if (d.cert_nu) out["cert_nu"] = to_json(*d.cert_nu);
  if (d.cert_xi) out["cert_xi"] = to_json(*d.cert_xi);
  out["theta_report"] = d.theta_report;
  out["residuals"] = d.residuals;
  json iters = json::array();
  for (const auto& r : d.iterations) iters.push_back(to_json(r));
  out["iterations"] = std::move(iters);
  out["config_echo"] = d.config_echo;
  if (d.message) out["message"] = *d.message;
  return out;
}

inline SolutionDocument solution_from_json(const json& j) {
  if (!j.is_object() || !j.contains("status") || !j.at("status").is_string())
    detail::fail("solution document needs a string status");
  SolutionDocument d;
  try {
    d.status = j.at("status").get<std::string>();
    auto vec = [&j](const char* key) -> std::optional<Vector> {
      if (!j.contains(key)) return std::nullopt;
      return vector_from_json(j.at(key));
    };
    d.y = vec("y");
    d.nu = vec("nu");
    d.xi = vec("xi");
    d.cert_nu = vec("cert_nu");
    d.cert_xi = vec("cert_xi");
    d.theta_report = j.value("theta_report", json());
    d.residuals = j.value("residuals", json());
    if (j.contains("iterations"))
      for (const auto& r : j.at("iterations")) d.iterations.push_back(record_from_json(r));
    d.config_echo = j.value("config_echo", json());
    if (j.contains("message")) d.message = j.at("message").get<std::string>();
  } catch (const json::exception& e) {
    detail::fail(std::string("bad solution document: ") + e.what());
  }
  return d;
}

inline json to_json(const KktResiduals& r) {
  return json{{"r_stat", norm_inf(r.r_stat)},
              {"r_eq", norm_inf(r.r_eq)},
              {"r_comp", r.r_comp},
              {"comp_min", norm_inf(r.comp_min)},
              {"r_nonneg", r.r_nonneg}};
}

inline json to_json(const CertificateResiduals& r) {
  return json{{"r1", norm_inf(r.r1)}, {"r2", r.r2}, {"r3", r.r3}};
}

/// Document for a finished pipeline run.
inline SolutionDocument make_document(const PipelineResult& res, const PipelineOptions& opts) {
  SolutionDocument d;
  const IipmResult& run = res.run;
  const SolveOutcome& out = run.outcome;
  d.status = std::string(to_string(out.status));
  if (out.status == SolveStatus::kOptimal && out.optimal) {
    d.y = out.optimal->y;
    d.nu = out.optimal->nu;
    d.xi = out.optimal->xi;
  }
  if (out.status == SolveStatus::kInfeasible && out.certificate) {
    d.cert_nu = out.certificate->nu;
    d.cert_xi = out.certificate->xi;
  }
  d.theta_report = to_json(res.hqp.theta_report);
  json resid{{"mu", run.final_iterate.res.mu},
             {"rd_norm", norm_inf(run.final_iterate.res.r_d)},
             {"rp_norm", norm_inf(run.final_iterate.res.r_p)},
             {"tau_hat", out.tau_hat},
             {"omega_hat", out.omega_hat},
             {"hqp_objective", run.hqp_objective},
             {"iterations", run.iterations},
             {"zeta", run.log.zeta}};
  if (out.kkt_check) resid["kkt"] = to_json(*out.kkt_check);
  if (out.cert_check) resid["certificate"] = to_json(*out.cert_check);
  d.residuals = std::move(resid);
  d.iterations = run.log.records;
  d.config_echo = to_json(opts);
  return d;
}

inline SolutionDocument make_error_document(const std::string& message, const PipelineOptions& opts,
                                            const IterationLog* log = nullptr) {
  SolutionDocument d;
  d.status = "error";
  d.message = message;
  d.theta_report = json::object();
  d.residuals = json::object();
  if (log) d.iterations = log->records;
  d.config_echo = to_json(opts);
  return d;
}

}  // namespace hqp::io

#endif  // HQP_IO_HPP_
