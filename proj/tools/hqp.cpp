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

// hqp: solve, generate and check standard-form QPs.
//
// Exit codes: 0 optimal / check passed, 1 check failed, 2 infeasible,
// 3 iteration limit, 4 input or validation error, 5 numerical failure.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>

#include "hqp/hqp.hpp"

namespace {

using hqp::io::json;

constexpr int kExitOptimal = 0;
constexpr int kExitCheckFailed = 1;
constexpr int kExitInfeasible = 2;
constexpr int kExitIterationLimit = 3;
constexpr int kExitInput = 4;
constexpr int kExitNumerical = 5;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  HQP_CHECK(in.good(), hqp::ErrorCode::kParseError, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_output(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  HQP_CHECK(out.good(), hqp::ErrorCode::kParseError, "cannot write " + path);
  out << text;
}

int exit_for(hqp::SolveStatus s) {
  switch (s) {
    case hqp::SolveStatus::kOptimal:
      return kExitOptimal;
    case hqp::SolveStatus::kInfeasible:
      return kExitInfeasible;
    case hqp::SolveStatus::kIterationLimit:
      return kExitIterationLimit;
  }
  return kExitNumerical;
}

int exit_for(const hqp::Error& e) {
  return hqp::is_input_error(e.code()) ? kExitInput : kExitNumerical;
}

std::string format_vector(const hqp::Vector& v) {
  std::ostringstream os;
  os.precision(10);
  os << '[';
  for (hqp::Index i = 0; i < v.size(); ++i) os << (i ? ", " : "") << v(i);
  os << ']';
  return os.str();
}

std::string render_text(const hqp::io::SolutionDocument& d) {
  std::ostringstream os;
  os << "status: " << d.status << '\n';
  if (d.message) os << "message: " << *d.message << '\n';
  if (d.y) os << "y:  " << format_vector(*d.y) << '\n';
  if (d.nu) os << "nu: " << format_vector(*d.nu) << '\n';
  if (d.xi) os << "xi: " << format_vector(*d.xi) << '\n';
  if (d.cert_nu) os << "certificate nu: " << format_vector(*d.cert_nu) << '\n';
  if (d.cert_xi) os << "certificate xi: " << format_vector(*d.cert_xi) << '\n';
  if (!d.theta_report.empty()) os << "theta: " << d.theta_report.dump() << '\n';
  if (!d.residuals.empty()) os << "residuals: " << d.residuals.dump() << '\n';
  os << "iterations logged: " << d.iterations.size() << '\n';
  return os.str();
}

struct SolveArgs {
  std::string problem;
  std::string output;
  std::string format = "json";
  std::string log_path;
  std::string theta_mode;
  std::optional<double> theta;
  std::optional<double> zeta;
};

int cmd_solve(const SolveArgs& a, hqp::PipelineOptions opts) {
  static const std::map<std::string, hqp::ThetaMode> modes{
      {"exact", hqp::ThetaMode::kExactZ},
      {"norm", hqp::ThetaMode::kNormRelaxed},
      {"alpha", hqp::ThetaMode::kUserAlpha}};
  if (!a.theta_mode.empty()) opts.theta.mode = modes.at(a.theta_mode);
  opts.theta_override = a.theta;
  opts.iipm.zeta = a.zeta;

  hqp::io::SolutionDocument doc;
  int code = kExitOptimal;
  const hqp::IterationLog* log = nullptr;
  std::optional<hqp::PipelineResult> result;
  std::optional<hqp::SolveError> solve_error;
  try {
    opts.iipm.validate();
    const hqp::QpProblem problem = hqp::io::parse_problem(read_file(a.problem));
    result = hqp::run_pipeline(problem, opts);
    doc = hqp::io::make_document(*result, opts);
    code = exit_for(result->run.outcome.status);
    log = &result->run.log;
  } catch (const hqp::SolveError& e) {
    solve_error = e;
    log = &solve_error->log();
    doc = hqp::io::make_error_document(e.what(), opts, log);
    code = exit_for(e);
  } catch (const hqp::Error& e) {
    doc = hqp::io::make_error_document(e.what(), opts);
    code = exit_for(e);
  }

  if (!a.log_path.empty() && log) {
    std::ostringstream csv;
    log->write_csv(csv);
    write_output(a.log_path, csv.str());
  }
  write_output(a.output, a.format == "text" ? render_text(doc)
                                            : hqp::io::to_json(doc).dump(2) + "\n");
  if (doc.message) std::cerr << "hqp: " << *doc.message << '\n';
  return code;
}

int cmd_gen(const std::string& kind_name, hqp::Index n, hqp::Index m, std::uint64_t seed,
            const std::string& output) {
  const auto kind = hqp::parse_instance_kind(kind_name);
  HQP_CHECK(kind.has_value(), hqp::ErrorCode::kInvalidConfig, "unknown kind '" + kind_name + "'");
  HQP_CHECK(n >= 1, hqp::ErrorCode::kInvalidConfig, "n must be positive");
  const hqp::QpProblem p = hqp::generate({*kind, n, m, seed});
  write_output(output, hqp::io::problem_to_json(p).dump(2) + "\n");
  return kExitOptimal;
}

int cmd_check(const std::string& problem_path, const std::string& solution_path, double tol) {
  const hqp::QpProblem p = hqp::io::parse_problem(read_file(problem_path));
  json j;
  try {
    j = json::parse(read_file(solution_path));
  } catch (const json::parse_error& e) {
    throw hqp::Error(hqp::ErrorCode::kParseError, std::string("malformed JSON: ") + e.what());
  }
  const hqp::io::SolutionDocument d = hqp::io::solution_from_json(j);

  if (d.status == "optimal") {
    HQP_CHECK(d.y && d.nu && d.xi, hqp::ErrorCode::kParseError,
              "optimal document needs y, nu and xi");
    const auto r = hqp::qp_kkt_residuals(p, {*d.y, *d.nu, *d.xi});
    const bool ok = r.accepted(tol);
    std::cout << (ok ? "PASS" : "FAIL") << " optimal: stationarity " << hqp::norm_inf(r.r_stat)
              << ", equality " << hqp::norm_inf(r.r_eq) << ", complementarity " << r.r_comp
              << ", nonnegativity " << r.r_nonneg << " (tol " << tol << ")\n";
    return ok ? kExitOptimal : kExitCheckFailed;
  }
  if (d.status == "infeasible") {
    HQP_CHECK(d.cert_nu && d.cert_xi, hqp::ErrorCode::kParseError,
              "infeasible document needs cert_nu and cert_xi");
    const auto r = hqp::check_certificate(p, {*d.cert_nu, *d.cert_xi});
    const bool ok = r.accepted(tol);
    std::cout << (ok ? "PASS" : "FAIL") << " certificate: |E^T nu - xi| " << hqp::norm_inf(r.r1)
              << ", |f^T nu + 1| " << std::abs(r.r2) << ", negativity " << r.r3 << " (tol " << tol
              << ")\n";
    return ok ? kExitOptimal : kExitCheckFailed;
  }
  std::cout << "FAIL status '" << d.status << "' carries nothing to verify\n";
  return kExitCheckFailed;
}

int cmd_sweep(const std::vector<std::string>& kind_names, const std::vector<hqp::Index>& sizes,
              int reps, std::uint64_t seed, hqp::Index m, const std::string& csv_path,
              const hqp::PipelineOptions& opts) {
  std::vector<hqp::InstanceKind> kinds;
  for (const auto& k : kind_names) {
    const auto kind = hqp::parse_instance_kind(k);
    HQP_CHECK(kind.has_value(), hqp::ErrorCode::kInvalidConfig, "unknown kind '" + k + "'");
    kinds.push_back(*kind);
  }
  for (hqp::Index n : sizes) HQP_CHECK(n >= 1, hqp::ErrorCode::kInvalidConfig, "sizes must be positive");
  const hqp::ExperimentReport report = hqp::run_experiment(kinds, sizes, reps, opts, seed, m);
  if (!csv_path.empty()) {
    std::ostringstream csv;
    report.write_csv(csv);
    write_output(csv_path, csv.str());
  }
  report.write_summary(std::cout);
  return kExitOptimal;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Homogeneous interior-point solver for convex quadratic programs"};
  app.require_subcommand(1);

  hqp::PipelineOptions opts;
  auto add_solver_flags = [&opts](CLI::App* cmd) {
    cmd->add_option("--tol-mu", opts.iipm.tol_mu, "Stop when mu falls below this")
        ->capture_default_str();
    cmd->add_option("--tol-res", opts.iipm.tol_res, "Residual tolerance, relative to max(1, ||r0||)")
        ->capture_default_str();
    cmd->add_option("--gamma", opts.iipm.gamma, "Centrality parameter in (0, 1)")
        ->capture_default_str();
    cmd->add_option("--beta", opts.iipm.beta, "Residual-to-mu bound factor, >= 1")
        ->capture_default_str();
    cmd->add_option("--sigma", opts.iipm.sigma, "Centering parameter")->capture_default_str();
    cmd->add_option("--max-iter", opts.iipm.max_iter, "Iteration limit")->capture_default_str();
  };

  SolveArgs sa;
  CLI::App* solve = app.add_subcommand("solve", "Solve a problem file");
  solve->add_option("problem", sa.problem, "Problem JSON file")->required();
  solve->add_option("-o,--output", sa.output, "Output path (default stdout)");
  add_solver_flags(solve);
  solve->add_option("--theta", sa.theta, "Use this theta instead of computing one");
  solve->add_option("--theta-mode", sa.theta_mode, "Bound used for theta")
      ->check(CLI::IsMember({"exact", "norm", "alpha"}));
  solve->add_option("--zeta", sa.zeta, "Starting point scale (default automatic)");
  solve->add_option("--format", sa.format, "Output format")
      ->check(CLI::IsMember({"json", "text"}))
      ->capture_default_str();
  solve->add_option("--log", sa.log_path, "Write the iteration log as CSV");

  std::string kind_name;
  hqp::Index gen_n = 0;
  hqp::Index gen_m = 1;
  std::uint64_t seed = 0;
  std::string gen_out;
  CLI::App* gen = app.add_subcommand("gen", "Generate a random instance");
  gen->add_option("--kind", kind_name, "infeasible_sv, feasible_sv or random_spd")->required();
  gen->add_option("-n,--n", gen_n, "Number of variables")->required();
  gen->add_option("-m,--m", gen_m, "Equality rows for random_spd")->capture_default_str();
  gen->add_option("--seed", seed, "Generator seed")->capture_default_str();
  gen->add_option("-o,--output", gen_out, "Output path (default stdout)");

  std::string check_problem, check_solution;
  double check_tol = 1e-6;
  CLI::App* check = app.add_subcommand("check", "Re-verify a solution document");
  check->add_option("problem", check_problem, "Problem JSON file")->required();
  check->add_option("solution", check_solution, "Solution JSON document")->required();
  check->add_option("--tol", check_tol, "Absolute residual tolerance")->capture_default_str();

  std::vector<std::string> sweep_kinds{"infeasible_sv", "feasible_sv"};
  std::vector<hqp::Index> sweep_sizes{10, 25, 50};
  int sweep_reps = 10;
  hqp::Index sweep_m = 1;
  std::uint64_t sweep_seed = 0;
  std::string sweep_csv;
  CLI::App* sweep = app.add_subcommand("sweep", "Run a batch of generated instances");
  sweep->add_option("--kinds", sweep_kinds, "Instance kinds")->capture_default_str();
  sweep->add_option("--sizes", sweep_sizes, "Problem sizes")->capture_default_str();
  sweep->add_option("--reps", sweep_reps, "Seeds per (kind, n)")->capture_default_str();
  sweep->add_option("--seed", sweep_seed, "First seed")->capture_default_str();
  sweep->add_option("-m,--m", sweep_m, "Equality rows for random_spd")->capture_default_str();
  sweep->add_option("--csv", sweep_csv, "Write the per-instance table as CSV");
  add_solver_flags(sweep);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitInput;
  }

  try {
    if (*solve) return cmd_solve(sa, opts);
    if (*gen) return cmd_gen(kind_name, gen_n, gen_m, seed, gen_out);
    if (*check) return cmd_check(check_problem, check_solution, check_tol);
    if (*sweep) {
      opts.iipm.validate();
      return cmd_sweep(sweep_kinds, sweep_sizes, sweep_reps, sweep_seed, sweep_m, sweep_csv, opts);
    }
  } catch (const hqp::Error& e) {
    std::cerr << "hqp: " << e.what() << '\n';
    return exit_for(e);
  } catch (const std::exception& e) {
    std::cerr << "hqp: " << e.what() << '\n';
    return kExitNumerical;
  }
  return kExitInput;
}
