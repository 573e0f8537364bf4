#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ree/types.hpp"

namespace ree::cli {

struct BenchManifest {
  std::vector<Index> n{50};
  std::vector<Index> p{50, 200};
  /// lasso | group_lasso (groups of group_size consecutive coordinates)
  std::vector<std::string> penalties{"lasso"};
  std::vector<Method> solvers{Method::Picard, Method::KM, Method::GraAdaptive, Method::Lqa};
  std::vector<std::uint64_t> seeds{1};
  /// lambda = lambda_ratio * ||U(0)||_inf.
  double lambda_ratio = 0.1;
  double tol = 1e-6;
  int max_iter = 10000;
  /// Wall time is the minimum over this many identical runs.
  int repeats = 1;
  Index group_size = 5;
};

BenchManifest manifest_from_json(const nlohmann::json& j);

struct BenchInstance {
  Matrix x;
  Vector y;
};

/// X_ij ~ N(0, 1/n); y = X beta* + 0.1 e with five nonzero true coefficients.
BenchInstance generate_instance(Index n, Index p, std::uint64_t seed);

struct BenchRow {
  std::string solver;
  std::string penalty;
  Index n = 0;
  Index p = 0;
  std::uint64_t seed = 0;
  std::string status;
  int iterations = 0;
  double wall_seconds = 0.0;
  double seconds_per_iteration = 0.0;
  double final_residual = 0.0;
  bool p_exceeds_n = false;
};

BenchRow run_cell(const BenchManifest& manifest, Method solver, const std::string& penalty, Index n, Index p,
                  std::uint64_t seed);

/// Every cell of the manifest, in manifest order. jobs > 1 runs cells concurrently.
std::vector<BenchRow> run_bench(const BenchManifest& manifest, int jobs);

std::string bench_csv(const std::vector<BenchRow>& rows);

}  // namespace ree::cli
