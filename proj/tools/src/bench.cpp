#include "ree_cli/bench.hpp"

#include <atomic>
#include <chrono>
#include <random>
#include <thread>

#include <fmt/format.h>

#include "ree/estimating.hpp"
#include "ree/solvers.hpp"
#include "ree_cli/io.hpp"
#include "ree_cli/problem_io.hpp"

namespace ree::cli {

using nlohmann::json;

BenchManifest manifest_from_json(const json& j) {
  if (!j.is_object()) throw InputError("manifest must be a JSON object");
  if (!j.contains("schema_version") || j["schema_version"] != kSchemaVersion) {
    throw InputError(fmt::format("manifest field 'schema_version' must be {}", kSchemaVersion));
  }
  BenchManifest m;
  try {
    for (auto it = j.begin(); it != j.end(); ++it) {
      const auto& key = it.key();
      const auto& v = it.value();
      if (key == "schema_version") continue;
      if (key == "n") m.n = v.get<std::vector<Index>>();
      else if (key == "p") m.p = v.get<std::vector<Index>>();
      else if (key == "penalties") m.penalties = v.get<std::vector<std::string>>();
      else if (key == "solvers") {
        m.solvers.clear();
        for (const auto& s : v) m.solvers.push_back(parse_method(s.get<std::string>()));
      } else if (key == "seeds") m.seeds = v.get<std::vector<std::uint64_t>>();
      else if (key == "lambda_ratio") m.lambda_ratio = v.get<double>();
      else if (key == "tol") m.tol = v.get<double>();
      else if (key == "max_iter") m.max_iter = v.get<int>();
      else if (key == "repeats") m.repeats = v.get<int>();
      else if (key == "group_size") m.group_size = v.get<Index>();
      else throw InputError(fmt::format("unknown manifest field '{}'", key));
    }
  } catch (const json::exception& e) {
    throw InputError(fmt::format("manifest has a field of the wrong type: {}", e.what()));
  }
  for (const auto& pen : m.penalties) {
    if (pen != "lasso" && pen != "group_lasso") {
      throw InputError(fmt::format("manifest field 'penalties' has unsupported value '{}'", pen));
    }
  }
  for (Index v : m.n) if (v < 1) throw InputError("manifest field 'n' needs positive sizes");
  for (Index v : m.p) if (v < 1) throw InputError("manifest field 'p' needs positive sizes");
  if (m.repeats < 1) throw InputError("manifest field 'repeats' must be >= 1");
  if (m.group_size < 1) throw InputError("manifest field 'group_size' must be >= 1");
  return m;
}

BenchInstance generate_instance(Index n, Index p, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  BenchInstance inst{Matrix(n, p), Vector(n)};
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  for (Index j = 0; j < p; ++j) {
    for (Index i = 0; i < n; ++i) inst.x(i, j) = scale * normal(rng);
  }
  const double truth[] = {2.0, -2.0, 1.5, -1.5, 1.0};
  Vector beta = Vector::Zero(p);
  for (Index j = 0; j < std::min<Index>(5, p); ++j) beta[j] = truth[j];
  inst.y = inst.x * beta;
  for (Index i = 0; i < n; ++i) inst.y[i] += 0.1 * normal(rng);
  return inst;
}

BenchRow run_cell(const BenchManifest& manifest, Method solver, const std::string& penalty, Index n, Index p,
                  std::uint64_t seed) {
  BenchRow row;
  row.solver = std::string(to_string(solver));
  row.penalty = penalty;
  row.n = n;
  row.p = p;
  row.seed = seed;
  row.p_exceeds_n = solver == Method::Lqa && p > n;
  try {
    BenchInstance inst = generate_instance(n, p, seed);
    auto u = std::make_shared<LeastSquaresEstimating>(inst.x, inst.y);
    EstimatingProblem problem;
    problem.u = u;
    if (penalty == "lasso") {
      problem.penalty = PenaltySpec::lasso();
    } else {
      std::vector<std::vector<Index>> groups;
      for (Index start = 0; start < p; start += manifest.group_size) {
        auto& g = groups.emplace_back();
        for (Index j = start; j < std::min(p, start + manifest.group_size); ++j) g.push_back(j);
      }
      problem.penalty = PenaltySpec::group_lasso(GroupPartition(std::move(groups)));
    }
    problem.lambda = manifest.lambda_ratio * lasso_lambda_max(*u);

    SolverConfig config;
    config.tol = manifest.tol;
    config.max_iter = manifest.max_iter;
    CoefficientVector init = CoefficientVector::zeros(p);
    if (solver == Method::Lqa) {
      // Started at zero every LQA weight is lambda/epsilon and the iterate cannot leave 0; start from ridge.
      const Matrix system = u->gram() + problem.lambda * Matrix::Identity(p, p);
      init = CoefficientVector(Vector(system.ldlt().solve(inst.x.transpose() * inst.y)));
    }

    double best = INFINITY;
    // One untimed run first so cold caches and clock ramp-up stay out of the timings.
    SolverReport report = solve(problem, config, init, solver);
    for (int r = 0; r < manifest.repeats; ++r) {
      const auto start = std::chrono::steady_clock::now();
      report = solve(problem, config, init, solver);
      const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;
      best = std::min(best, elapsed.count());
    }
    row.status = std::string(to_string(report.status));
    row.iterations = report.iterations;
    row.wall_seconds = best;
    row.seconds_per_iteration = report.iterations > 0 ? best / report.iterations : best;
    row.final_residual = report.final_residual();
  } catch (const Error& e) {
    row.status = std::string(to_string(e.code()));
    row.iterations = 0;
    row.final_residual = NAN;
    row.wall_seconds = NAN;
    row.seconds_per_iteration = NAN;
  }
  return row;
}

std::vector<BenchRow> run_bench(const BenchManifest& m, int jobs) {
  struct Cell {
    Method solver;
    std::string penalty;
    Index n, p;
    std::uint64_t seed;
  };
  std::vector<Cell> cells;
  for (const auto& pen : m.penalties)
    for (Index n : m.n)
      for (Index p : m.p)
        for (std::uint64_t seed : m.seeds)
          for (Method s : m.solvers) cells.push_back({s, pen, n, p, seed});

  std::vector<BenchRow> rows(cells.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < cells.size(); i = next++) {
      const Cell& c = cells[i];
      rows[i] = run_cell(m, c.solver, c.penalty, c.n, c.p, c.seed);
    }
  };
  if (jobs <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < jobs; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  return rows;
}

std::string bench_csv(const std::vector<BenchRow>& rows) {
  std::string out =
      "solver,penalty,n,p,seed,status,iterations,wall_seconds,seconds_per_iteration,final_residual,p_exceeds_n\n";
  for (const auto& r : rows) {
    out += fmt::format("{},{},{},{},{},{},{},{},{},{},{}\n", r.solver, r.penalty, r.n, r.p, r.seed, r.status,
                       r.iterations, format_real(r.wall_seconds), format_real(r.seconds_per_iteration),
                       format_real(r.final_residual), r.p_exceeds_n ? "true" : "false");
  }
  return out;
}

}  // namespace ree::cli
