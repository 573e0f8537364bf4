#include "ree_cli/report.hpp"

#include <fmt/format.h>

#include "ree_cli/io.hpp"

namespace ree::cli {

using nlohmann::json;

namespace {

bool kkt_applies(const EstimatingProblem& problem) {
  const auto& k = problem.penalty.kind;
  return std::holds_alternative<LassoPenalty>(k) || std::holds_alternative<GroupLassoPenalty>(k) ||
         std::holds_alternative<SparseGroupLassoPenalty>(k);
}

const char* verdict(bool passed) { return passed ? "PASS" : "FAIL"; }

}  // namespace

Certificates certify(const EstimatingProblem& problem, const Vector& beta, const CertificateOptions& options) {
  Certificates c;
  c.options = options;
  c.fp_residual = fixed_point_residual(problem, beta, options.tau);
  c.fp_passed = c.fp_residual <= options.tol;
  c.kkt_tol = options.kkt_tol.value_or(10.0 * options.tol);
  if (!kkt_applies(problem)) {
    c.kkt_skipped = fmt::format("{} has no case-split KKT form", problem.penalty.name());
  } else if (problem.lambda == 0.0) {
    c.kkt_skipped = "lambda = 0, the equation is unpenalized";
  } else {
    c.kkt = kkt_residual(problem, beta);
    c.kkt_passed = c.kkt->max_residual <= c.kkt_tol;
  }
  c.vi = vi_probe(problem, beta, options.vi_samples, options.vi_radius, options.seed, options.vi_threshold);
  return c;
}

std::string describe(const Certificates& c) {
  std::string out = fmt::format("fixed_point residual={} tau={} tol={} {}\n", format_real(c.fp_residual),
                                format_real(c.options.tau), format_real(c.options.tol), verdict(c.fp_passed));
  if (c.kkt) {
    out += fmt::format("kkt max_residual={} worst_block={} tol={} {}\n", format_real(c.kkt->max_residual),
                       c.kkt->worst_block + 1, format_real(c.kkt_tol), verdict(c.kkt_passed));
  } else {
    out += fmt::format("kkt skipped: {}\n", c.kkt_skipped);
  }
  out += fmt::format("vi_probe worst={} samples={} radius={} seed={} threshold={} {}\n",
                     format_real(c.vi.worst_value), c.vi.samples, format_real(c.vi.radius), c.vi.seed,
                     format_real(c.vi.threshold), verdict(c.vi.passed));
  return out;
}

json to_json(const Certificates& c) {
  json out;
  out["fixed_point"] = {{"residual", c.fp_residual},
                        {"tau", c.options.tau},
                        {"tol", c.options.tol},
                        {"passed", c.fp_passed}};
  if (c.kkt) {
    out["kkt"] = {{"max_residual", c.kkt->max_residual},
                  {"worst_block", c.kkt->worst_block + 1},
                  {"tol", c.kkt_tol},
                  {"passed", c.kkt_passed}};
  } else {
    out["kkt"] = {{"skipped", c.kkt_skipped}};
  }
  json vi = {{"worst_value", c.vi.worst_value}, {"samples", c.vi.samples}, {"radius", c.vi.radius},
             {"seed", c.vi.seed},               {"threshold", c.vi.threshold}, {"passed", c.vi.passed}};
  if (!c.vi.passed && c.vi.worst_point) vi["worst_point"] = to_json(*c.vi.worst_point);
  out["vi_probe"] = vi;
  return out;
}

CertificateOptions certificate_options_from_json(const json& j) {
  CertificateOptions o;
  try {
    const json& fp = j.at("fixed_point");
    o.tau = json_real(fp.at("tau"), "certificates.fixed_point.tau");
    o.tol = json_real(fp.at("tol"), "certificates.fixed_point.tol");
    const json& kkt = j.at("kkt");
    if (kkt.contains("tol")) o.kkt_tol = json_real(kkt.at("tol"), "certificates.kkt.tol");
    const json& vi = j.at("vi_probe");
    o.vi_samples = vi.at("samples").get<int>();
    o.vi_radius = json_real(vi.at("radius"), "certificates.vi_probe.radius");
    o.seed = vi.at("seed").get<std::uint64_t>();
    o.vi_threshold = json_real(vi.at("threshold"), "certificates.vi_probe.threshold");
  } catch (const json::exception& e) {
    throw InputError(fmt::format("report field 'certificates' is incomplete: {}", e.what()));
  }
  return o;
}

json trace_json(const std::vector<IterationRecord>& trace) {
  json out = json::array();
  for (const auto& r : trace) {
    json rec = {{"k", r.k}, {"fp_residual", r.fp_residual}, {"step", r.step}};
    if (r.theta) rec["theta"] = *r.theta;
    if (r.iterate) rec["iterate"] = to_json(*r.iterate);
    out.push_back(std::move(rec));
  }
  return out;
}

json report_json(const ProblemDescriptor& descriptor, Method method, const SolverConfig& config,
                 std::optional<double> lipschitz_flag, const SolverReport& report, const Certificates& certificates) {
  json out;
  out["schema_version"] = kSchemaVersion;
  out["problem"] = to_json(descriptor);
  out["method"] = std::string(to_string(method));
  json cfg = to_json(config);
  cfg["lipschitz"] = lipschitz_flag ? json(*lipschitz_flag) : json(nullptr);
  out["config"] = cfg;
  out["seeds"] = {{"vi_probe", certificates.options.seed}};
  out["status"] = std::string(to_string(report.status));
  out["iterations"] = report.iterations;
  out["step"] = report.step;
  out["lipschitz"] = report.lipschitz ? json(*report.lipschitz) : json(nullptr);
  if (report.zero_threshold) out["zero_threshold"] = *report.zero_threshold;
  out["flags"] = report.flags;
  out["message"] = report.message;
  out["solution"] = to_json(report.solution.values());
  out["trace"] = trace_json(report.trace);
  out["certificates"] = to_json(certificates);
  return out;
}

}  // namespace ree::cli
