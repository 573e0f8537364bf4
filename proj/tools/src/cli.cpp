#include "ree_cli/cli.hpp"

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <optional>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "ree/estimating.hpp"
#include "ree/solvers.hpp"
#include "ree_cli/bench.hpp"
#include "ree_cli/io.hpp"
#include "ree_cli/problem_io.hpp"
#include "ree_cli/report.hpp"

namespace ree::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct ProblemFlags {
  std::optional<std::string> problem;
  std::optional<std::string> estimating;
  std::optional<std::string> design;
  std::optional<std::string> response;
  bool opaque = false;
  std::optional<std::string> penalty;
  std::optional<double> lambda;
  std::optional<std::string> groups;
  std::optional<std::string> weights;
  std::optional<double> alpha;
  std::optional<double> ratio;
  std::optional<double> radius;
  std::optional<std::string> ball_norm;
  std::optional<std::string> lower;
  std::optional<std::string> upper;
  std::optional<double> lipschitz;
};

struct ConfigFlags {
  std::optional<double> tau;
  std::optional<double> rho;
  std::optional<double> step;
  std::optional<double> t_bar;
  std::optional<double> psi;
  std::optional<double> epsilon;
  std::optional<double> zero_threshold;
  std::optional<int> max_iter;
  std::optional<double> tol;
  bool fd_jacobian = false;
  bool record_iterates = false;
};

struct ProbeFlags {
  std::optional<std::uint64_t> seed;
  std::optional<int> vi_samples;
  std::optional<double> vi_radius;
  std::optional<double> kkt_tol;
};

void add_problem_flags(CLI::App* app, ProblemFlags& f) {
  app->add_option("--problem", f.problem, "Problem JSON document; flags override its fields");
  app->add_option("--estimating", f.estimating, "least_squares | logistic | linear");
  app->add_option("--design", f.design, "Design matrix X (or A for linear U), headerless CSV");
  app->add_option("--response", f.response, "Response y (or offset b for linear U), headerless CSV");
  app->add_flag("--opaque", f.opaque, "Treat U as a black box: no Jacobian, no built-in Lipschitz bound");
  app->add_option("--penalty", f.penalty, "ridge | lasso | elastic_net | group_lasso | sparse_group_lasso | ball");
  app->add_option("--lambda", f.lambda, "Regularization strength lambda >= 0");
  app->add_option("--groups", f.groups, "1-based groups, e.g. \"1,2;3\"");
  app->add_option("--weights", f.weights, "Per-group weights, comma separated");
  app->add_option("--alpha", f.alpha, "Sparse group lasso mixing alpha in [0,1]");
  app->add_option("--ratio", f.ratio, "Elastic net ratio r >= 0");
  app->add_option("--radius", f.radius, "Ball radius r");
  app->add_option("--ball-norm", f.ball_norm, "l1 | l2 | box");
  app->add_option("--lower", f.lower, "Box lower bounds, comma separated");
  app->add_option("--upper", f.upper, "Box upper bounds, comma separated");
  app->add_option("--lipschitz", f.lipschitz, "Lipschitz constant L of U");
}

void add_config_flags(CLI::App* app, ConfigFlags& f) {
  app->add_option("--tau", f.tau, "Picard/KM stepsize (default 1/L)");
  app->add_option("--rho", f.rho, "KM mixing rho in (0,1)");
  app->add_option("--step", f.step, "GRA fixed stepsize t in (0, phi/(2L)]");
  app->add_option("--t-bar", f.t_bar, "Adaptive GRA stepsize cap");
  app->add_option("--psi", f.psi, "Adaptive GRA psi in (1, phi]");
  app->add_option("--epsilon", f.epsilon, "LQA epsilon");
  app->add_option("--zero-threshold", f.zero_threshold, "LQA truncation threshold c");
  app->add_option("--max-iter", f.max_iter, "Iteration limit");
  app->add_option("--tol", f.tol, "Fixed-point residual tolerance");
  app->add_flag("--fd-jacobian", f.fd_jacobian, "Allow finite-difference Jacobians for LQA");
  app->add_flag("--record-iterates", f.record_iterates, "Store every iterate in the trace");
}

void add_probe_flags(CLI::App* app, ProbeFlags& f) {
  app->add_option("--seed", f.seed, "VI probe seed");
  app->add_option("--vi-samples", f.vi_samples, "VI probe sample count");
  app->add_option("--vi-radius", f.vi_radius, "VI probe ball radius");
  app->add_option("--kkt-tol", f.kkt_tol, "KKT certificate threshold (default 10 * tol)");
}

ProblemDescriptor load_descriptor(const ProblemFlags& f) {
  ProblemDescriptor d;
  if (f.problem) {
    const fs::path path(*f.problem);
    d = descriptor_from_json(read_json_file(path), path.parent_path());
  }
  if (f.estimating) d.estimating.kind = *f.estimating;
  if (f.design) d.estimating.design = *f.design;
  if (f.response) d.estimating.response = *f.response;
  if (f.opaque) d.estimating.opaque = true;
  if (f.penalty) d.penalty.kind = *f.penalty;
  if (f.lambda) d.lambda = *f.lambda;
  if (f.groups) d.penalty.groups = parse_groups(*f.groups);
  if (f.weights) d.penalty.weights = parse_real_list(*f.weights, "--weights");
  if (f.alpha) d.penalty.alpha = *f.alpha;
  if (f.ratio) d.penalty.ratio = *f.ratio;
  if (f.radius) d.penalty.radius = *f.radius;
  if (f.ball_norm) d.penalty.ball_norm = *f.ball_norm;
  if (f.lower) d.penalty.lower = parse_real_list(*f.lower, "--lower");
  if (f.upper) d.penalty.upper = parse_real_list(*f.upper, "--upper");
  if (f.lipschitz && d.estimating.opaque) d.estimating.declared_lipschitz = *f.lipschitz;
  return d;
}

SolverConfig load_config(const ProblemDescriptor& d, const ConfigFlags& f, std::optional<double> lipschitz) {
  SolverConfig c = config_from_json(d.config);
  if (f.tau) c.tau = *f.tau;
  if (f.rho) c.rho = *f.rho;
  if (f.step) c.step = *f.step;
  if (f.t_bar) c.t_bar = *f.t_bar;
  if (f.psi) c.psi = *f.psi;
  if (f.epsilon) c.epsilon_lqa = *f.epsilon;
  if (f.zero_threshold) c.zero_threshold = *f.zero_threshold;
  if (f.max_iter) c.max_iter = *f.max_iter;
  if (f.tol) c.tol = *f.tol;
  if (f.fd_jacobian) c.allow_fd_jacobian = true;
  if (f.record_iterates) c.record_iterates = true;
  if (lipschitz && !c.tau) {
    if (!(*lipschitz > 0.0)) throw InputError("--lipschitz must be positive");
    c.tau = 1.0 / *lipschitz;
  }
  c.validate();
  return c;
}

CoefficientVector load_init(const ProblemDescriptor& d, const std::optional<std::string>& flag, Index p) {
  std::optional<fs::path> path;
  if (d.init) path = *d.init;
  if (flag) path = fs::path(*flag);
  if (!path) return CoefficientVector::zeros(p);
  Vector v = read_csv_vector(*path);
  if (v.size() != p) {
    throw InputError(fmt::format("init file '{}' has {} entries but p = {}", path->string(), v.size(), p));
  }
  return CoefficientVector(std::move(v));
}

CertificateOptions probe_options(const ProbeFlags& f, CertificateOptions o) {
  if (f.seed) o.seed = *f.seed;
  if (f.vi_samples) o.vi_samples = *f.vi_samples;
  if (f.vi_radius) o.vi_radius = *f.vi_radius;
  if (f.kkt_tol) o.kkt_tol = *f.kkt_tol;
  return o;
}

bool numerical_failure(SolverStatus s) { return s == SolverStatus::Diverged || s == SolverStatus::NumericalFailure; }

std::string guidance(const Error& e) {
  switch (e.code()) {
    case ErrorCode::StepOutOfRange:
      return "GRA with a fixed step needs a Lipschitz constant: pass --lipschitz L (and optionally --step "
             "t <= phi/(2L)), or use --method gra-adaptive, which needs none";
    case ErrorCode::UnsupportedPenalty:
      return "LQA-Newton only handles elementwise penalties; use picard, km, gra-fixed or gra-adaptive";
    case ErrorCode::JacobianUnavailable: return "pass --fd-jacobian to allow finite differences";
    default: return {};
  }
}

struct SolveRequest {
  ProblemFlags problem;
  ConfigFlags config;
  ProbeFlags probe;
  std::string method = "gra-adaptive";
  std::optional<std::string> init;
  std::string output = "report.json";
};

int cmd_solve(const SolveRequest& req, std::ostream& out) {
  ProblemDescriptor d = load_descriptor(req.problem);
  const Method method = parse_method(req.method != "gra-adaptive" || !d.method ? req.method : *d.method);
  d.method = std::string(to_string(method));
  const SolverConfig config = load_config(d, req.config, req.problem.lipschitz);
  const EstimatingProblem problem = build_problem(d);
  const CoefficientVector init = load_init(d, req.init, problem.dimension());
  if (req.init) d.init = fs::path(*req.init);

  const SolverReport report = solve(problem, config, init, method, req.problem.lipschitz);
  CertificateOptions copts = probe_options(req.probe, {});
  copts.tau = report.step;
  copts.tol = config.tol;
  const Certificates certs = certify(problem, report.solution.values(), copts);
  write_text_file(req.output, dump_json(report_json(d, method, config, req.problem.lipschitz, report, certs)));

  out << fmt::format("status={} method={} iterations={} final_residual={}\n", to_string(report.status),
                     to_string(method), report.iterations, format_real(report.final_residual()));
  for (const auto& flag : report.flags) out << "flag: " << flag << "\n";
  if (!report.message.empty()) out << "message: " << report.message << "\n";
  out << describe(certs);
  out << "report: " << req.output << "\n";
  return numerical_failure(report.status) ? kExitFailure : kExitOk;
}

struct PathRequest {
  ProblemFlags problem;
  ConfigFlags config;
  ProbeFlags probe;
  std::string method = "gra-adaptive";
  std::optional<std::string> init;
  std::optional<std::string> lambdas;
  std::optional<int> auto_grid;
  bool cold = false;
  std::optional<int> jobs;
  std::string output_dir = "path_reports";
  std::optional<std::string> summary;
};

int default_jobs() {
  if (const char* env = std::getenv("REE_SOLVE_JOBS")) {
    try {
      const int v = std::stoi(env);
      if (v >= 1) return v;
    } catch (const std::exception&) {
    }
    throw InputError(fmt::format("environment variable REE_SOLVE_JOBS='{}' is not a positive integer", env));
  }
  return 1;
}

int cmd_path(const PathRequest& req, std::ostream& out) {
  ProblemDescriptor d = load_descriptor(req.problem);
  const Method method = parse_method(req.method != "gra-adaptive" || !d.method ? req.method : *d.method);
  d.method = std::string(to_string(method));
  const SolverConfig config = load_config(d, req.config, req.problem.lipschitz);
  const EstimatingProblem problem = build_problem(d);
  const CoefficientVector init = load_init(d, req.init, problem.dimension());
  if (req.init) d.init = fs::path(*req.init);

  std::vector<double> lambdas;
  if (req.lambdas && req.auto_grid) throw InputError("give either --lambdas or --auto-grid, not both");
  if (req.lambdas) {
    lambdas = parse_real_list(*req.lambdas, "--lambdas");
  } else if (req.auto_grid) {
    lambdas = auto_lambda_grid(lasso_lambda_max(*problem.u), *req.auto_grid);
  } else {
    throw InputError("path needs --lambdas or --auto-grid n");
  }

  PathOptions options;
  options.warm_start = !req.cold;
  options.jobs = req.jobs.value_or(default_jobs());
  options.lipschitz = req.problem.lipschitz;
  const auto entries = solve_path(problem, lambdas, config, method, init, options);

  const fs::path dir(req.output_dir);
  std::string csv = "lambda,nonzeros,iterations,max_kkt_residual,status,error\n";
  long long total_iterations = 0;
  bool any_failure = false;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const auto& e = entries[i];
    std::string kkt_field;
    std::string status;
    int iterations = 0;
    if (e.report) {
      EstimatingProblem at = problem;
      at.lambda = e.lambda;
      ProblemDescriptor di = d;
      di.lambda = e.lambda;
      CertificateOptions copts = probe_options(req.probe, {});
      copts.tau = e.report->step;
      copts.tol = config.tol;
      const Certificates certs = certify(at, e.report->solution.values(), copts);
      if (certs.kkt) kkt_field = format_real(certs.kkt->max_residual);
      json rep = report_json(di, method, config, req.problem.lipschitz, *e.report, certs);
      rep["path"] = {{"index", i}, {"lambda", e.lambda}, {"warm_start", options.warm_start}};
      write_text_file(dir / fmt::format("lambda_{:03d}.json", i), dump_json(rep));
      status = std::string(to_string(e.report->status));
      iterations = e.report->iterations;
      total_iterations += iterations;
      any_failure = any_failure || numerical_failure(e.report->status);
    } else {
      status = "Error";
      any_failure = true;
    }
    std::string error = e.error;
    std::replace(error.begin(), error.end(), ',', ';');
    std::replace(error.begin(), error.end(), '\n', ' ');
    csv += fmt::format("{},{},{},{},{},{}\n", format_real(e.lambda), e.support.size(), iterations, kkt_field, status,
                       error);
  }
  const fs::path summary = req.summary ? fs::path(*req.summary) : dir / "summary.csv";
  write_text_file(summary, csv);
  out << fmt::format("path lambdas={} mode={} total_iterations={} summary={}\n", entries.size(),
                     options.warm_start ? "warm" : "cold", total_iterations, summary.string());
  return any_failure ? kExitFailure : kExitOk;
}

struct CheckRequest {
  ProblemFlags problem;
  ProbeFlags probe;
  std::optional<std::string> report;
  std::optional<std::string> beta;
  std::optional<double> tau;
  std::optional<double> tol;
};

int cmd_check(const CheckRequest& req, std::ostream& out) {
  if (req.report.has_value() == req.beta.has_value()) throw InputError("check needs exactly one of --report or --beta");
  ProblemDescriptor d;
  Vector beta;
  CertificateOptions copts;
  if (req.report) {
    const fs::path path(*req.report);
    const json rep = read_json_file(path);
    if (!rep.contains("problem") || !rep.contains("solution") || !rep.contains("certificates")) {
      throw InputError(fmt::format("'{}' is not a report: needs 'problem', 'solution' and 'certificates'",
                                   path.string()));
    }
    d = descriptor_from_json(rep["problem"], path.parent_path());
    beta = vector_from_json(rep["solution"], "solution");
    copts = certificate_options_from_json(rep["certificates"]);
  } else {
    d = load_descriptor(req.problem);
    beta = read_csv_vector(*req.beta);
    copts.tol = 1e-8;
  }
  EstimatingProblem problem = build_problem(d);
  if (beta.size() != problem.dimension()) {
    throw InputError(fmt::format("candidate has {} entries but p = {}", beta.size(), problem.dimension()));
  }
  if (req.beta) {
    if (req.tau) {
      copts.tau = *req.tau;
    } else if (req.problem.lipschitz) {
      copts.tau = 1.0 / *req.problem.lipschitz;
    } else if (const auto l = lipschitz_upper_bound(*problem.u)) {
      copts.tau = 1.0 / *l;
    } else {
      throw InputError("no Lipschitz bound is known for this U: pass --tau or --lipschitz");
    }
  } else if (req.tau) {
    copts.tau = *req.tau;
  }
  if (req.tol) copts.tol = *req.tol;
  copts = probe_options(req.probe, copts);

  const Certificates certs = certify(problem, beta, copts);
  out << describe(certs);
  if (certs.all_passed()) {
    out << "check: all certificates passed\n";
    return kExitOk;
  }
  if (!certs.fp_passed) out << "FAILED certificate: fixed_point\n";
  if (!certs.kkt_passed) out << fmt::format("FAILED certificate: kkt (block {})\n", certs.kkt->worst_block + 1);
  if (!certs.vi.passed) {
    std::string point;
    for (Index j = 0; j < certs.vi.worst_point->size(); ++j) {
      point += (j ? "," : "") + format_real((*certs.vi.worst_point)[j]);
    }
    out << fmt::format("FAILED certificate: vi_probe (worst value {} at [{}])\n", format_real(certs.vi.worst_value),
                       point);
  }
  return kExitFailure;
}

struct BenchRequest {
  std::string manifest;
  std::string output = "-";
  std::optional<int> jobs;
};

int cmd_bench(const BenchRequest& req, std::ostream& out) {
  const BenchManifest manifest = manifest_from_json(read_json_file(req.manifest));
  const auto rows = run_bench(manifest, req.jobs.value_or(default_jobs()));
  const std::string csv = bench_csv(rows);
  if (req.output == "-") {
    out << csv;
  } else {
    write_text_file(req.output, csv);
    out << fmt::format("bench rows={} csv={}\n", rows.size(), req.output);
  }
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Solver and certifier for regularized estimating equations", "ree-solve"};
  app.require_subcommand(1);

  SolveRequest solve_req;
  auto* solve_cmd = app.add_subcommand("solve", "Run one solver on one problem and write a report");
  add_problem_flags(solve_cmd, solve_req.problem);
  add_config_flags(solve_cmd, solve_req.config);
  add_probe_flags(solve_cmd, solve_req.probe);
  solve_cmd->add_option("--method", solve_req.method, "picard | km | gra-fixed | gra-adaptive | lqa");
  solve_cmd->add_option("--init", solve_req.init, "Starting point, CSV vector");
  solve_cmd->add_option("--output", solve_req.output, "Report JSON path");

  PathRequest path_req;
  auto* path_cmd = app.add_subcommand("path", "Solve along a decreasing lambda grid");
  add_problem_flags(path_cmd, path_req.problem);
  add_config_flags(path_cmd, path_req.config);
  add_probe_flags(path_cmd, path_req.probe);
  path_cmd->add_option("--method", path_req.method, "picard | km | gra-fixed | gra-adaptive | lqa");
  path_cmd->add_option("--init", path_req.init, "Starting point for the first lambda, CSV vector");
  path_cmd->add_option("--lambdas", path_req.lambdas, "Strictly decreasing grid, comma separated");
  path_cmd->add_option("--auto-grid", path_req.auto_grid, "n log-spaced values from ||U(0)||_inf down two decades");
  auto* warm = path_cmd->add_flag("--warm", "Warm-start each lambda from the previous solution (default)");
  path_cmd->add_flag("--cold", path_req.cold, "Start every lambda from the init")->excludes(warm);
  path_cmd->add_option("--jobs", path_req.jobs, "Concurrent cold-start solves (default $REE_SOLVE_JOBS or 1)");
  path_cmd->add_option("--output-dir", path_req.output_dir, "Directory for per-lambda reports");
  path_cmd->add_option("--summary", path_req.summary, "Summary CSV path (default <output-dir>/summary.csv)");

  CheckRequest check_req;
  auto* check_cmd = app.add_subcommand("check", "Re-certify a report or a candidate beta");
  add_problem_flags(check_cmd, check_req.problem);
  add_probe_flags(check_cmd, check_req.probe);
  check_cmd->add_option("--report", check_req.report, "Report JSON written by solve or path");
  check_cmd->add_option("--beta", check_req.beta, "Candidate beta, CSV vector");
  check_cmd->add_option("--tau", check_req.tau, "Step for the fixed-point residual (default 1/L)");
  check_cmd->add_option("--tol", check_req.tol, "Fixed-point tolerance");

  BenchRequest bench_req;
  auto* bench_cmd = app.add_subcommand("bench", "Run a benchmark manifest and write a CSV");
  bench_cmd->add_option("--manifest", bench_req.manifest, "Benchmark manifest JSON")->required();
  bench_cmd->add_option("--output", bench_req.output, "CSV path, '-' for stdout");
  bench_cmd->add_option("--jobs", bench_req.jobs, "Concurrent cells (default $REE_SOLVE_JOBS or 1)");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitInput;
  }

  try {
    if (*solve_cmd) return cmd_solve(solve_req, out);
    if (*path_cmd) return cmd_path(path_req, out);
    if (*check_cmd) return cmd_check(check_req, out);
    if (*bench_cmd) return cmd_bench(bench_req, out);
  } catch (const InputError& e) {
    err << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    if (const auto hint = guidance(e); !hint.empty()) err << "hint: " << hint << "\n";
    return kExitInput;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitInput;
}

}  // namespace ree::cli
