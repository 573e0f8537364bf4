#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "ree/diagnostics.hpp"
#include "ree/problem.hpp"
#include "ree/types.hpp"
#include "ree_cli/problem_io.hpp"

namespace ree::cli {

inline constexpr std::uint64_t kDefaultSeed = 20240611;

struct CertificateOptions {
  /// Step the fixed-point residual is measured with.
  double tau = 1.0;
  double tol = 1e-8;
  /// KKT threshold; defaults to 10 * tol.
  std::optional<double> kkt_tol;
  int vi_samples = 10000;
  double vi_radius = 1.0;
  std::uint64_t seed = kDefaultSeed;
  double vi_threshold = -1e-8;
};

struct Certificates {
  double fp_residual = 0.0;
  bool fp_passed = false;
  std::optional<KktReport> kkt;
  double kkt_tol = 0.0;
  bool kkt_passed = true;
  std::string kkt_skipped;
  ViProbeResult vi;
  CertificateOptions options;

  bool all_passed() const { return fp_passed && kkt_passed && vi.passed; }
};

/// Fixed-point residual, case-split KKT (lasso family, lambda > 0) and VI probe.
Certificates certify(const EstimatingProblem& problem, const Vector& beta, const CertificateOptions& options);

/// One line per certificate, numbers at 17 significant digits.
std::string describe(const Certificates& c);

nlohmann::json to_json(const Certificates& c);
CertificateOptions certificate_options_from_json(const nlohmann::json& j);

nlohmann::json trace_json(const std::vector<IterationRecord>& trace);

/// Self-contained report: problem descriptor, config echo, seeds, solution,
/// status, trace and certificates.
nlohmann::json report_json(const ProblemDescriptor& descriptor, Method method, const SolverConfig& config,
                           std::optional<double> lipschitz_flag, const SolverReport& report,
                           const Certificates& certificates);

}  // namespace ree::cli
