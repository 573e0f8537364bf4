#include "ree_cli/problem_io.hpp"

#include <fmt/format.h>

#include "ree/estimating.hpp"
#include "ree_cli/io.hpp"

namespace ree::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path resolve(const fs::path& p, const fs::path& base) {
  if (p.empty() || p.is_absolute()) return p;
  return base / p;
}

const json& require(const json& j, const char* key, const std::string& where) {
  if (!j.contains(key)) throw InputError(fmt::format("missing field '{}.{}'", where, key));
  return j.at(key);
}

template <class T>
T get(const json& j, const std::string& field) {
  try {
    return j.get<T>();
  } catch (const json::exception&) {
    throw InputError(fmt::format("field '{}' has the wrong type", field));
  }
}

void reject_unknown(const json& j, std::initializer_list<const char*> known, const std::string& where) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const char* k : known) ok = ok || it.key() == k;
    if (!ok) throw InputError(fmt::format("unknown field '{}.{}'", where, it.key()));
  }
}

}  // namespace

ProblemDescriptor descriptor_from_json(const json& j, const fs::path& base_dir) {
  if (!j.is_object()) throw InputError("problem document must be a JSON object");
  reject_unknown(j, {"schema_version", "estimating", "penalty", "lambda", "method", "config", "init"}, "problem");
  ProblemDescriptor d;
  d.schema_version = get<int>(require(j, "schema_version", "problem"), "schema_version");
  if (d.schema_version != kSchemaVersion) {
    throw InputError(fmt::format("field 'schema_version' is {}, expected {}", d.schema_version, kSchemaVersion));
  }

  const json& est = require(j, "estimating", "problem");
  reject_unknown(est, {"kind", "design", "response", "matrix", "offset", "opaque", "declared_lipschitz"},
                 "estimating");
  d.estimating.kind = est.contains("kind") ? get<std::string>(est["kind"], "estimating.kind") : "least_squares";
  const bool linear = d.estimating.kind == "linear";
  const char* design_key = linear ? "matrix" : "design";
  const char* response_key = linear ? "offset" : "response";
  d.estimating.design = resolve(get<std::string>(require(est, design_key, "estimating"),
                                                 std::string("estimating.") + design_key),
                                base_dir);
  d.estimating.response = resolve(get<std::string>(require(est, response_key, "estimating"),
                                                   std::string("estimating.") + response_key),
                                  base_dir);
  if (est.contains("opaque")) d.estimating.opaque = get<bool>(est["opaque"], "estimating.opaque");
  if (est.contains("declared_lipschitz") && !est["declared_lipschitz"].is_null()) {
    d.estimating.declared_lipschitz = json_real(est["declared_lipschitz"], "estimating.declared_lipschitz");
  }

  const json& pen = require(j, "penalty", "problem");
  reject_unknown(pen, {"kind", "ratio", "alpha", "groups", "weights", "norm", "radius", "lower", "upper"}, "penalty");
  d.penalty.kind = get<std::string>(require(pen, "kind", "penalty"), "penalty.kind");
  if (pen.contains("ratio")) d.penalty.ratio = json_real(pen["ratio"], "penalty.ratio");
  if (pen.contains("alpha")) d.penalty.alpha = json_real(pen["alpha"], "penalty.alpha");
  if (pen.contains("groups")) d.penalty.groups = get<std::vector<std::vector<long long>>>(pen["groups"], "penalty.groups");
  if (pen.contains("weights")) d.penalty.weights = get<std::vector<double>>(pen["weights"], "penalty.weights");
  if (pen.contains("norm")) d.penalty.ball_norm = get<std::string>(pen["norm"], "penalty.norm");
  if (pen.contains("radius")) d.penalty.radius = json_real(pen["radius"], "penalty.radius");
  if (pen.contains("lower")) d.penalty.lower = get<std::vector<double>>(pen["lower"], "penalty.lower");
  if (pen.contains("upper")) d.penalty.upper = get<std::vector<double>>(pen["upper"], "penalty.upper");

  if (j.contains("lambda")) d.lambda = json_real(j["lambda"], "lambda");
  if (j.contains("method")) d.method = get<std::string>(j["method"], "method");
  if (j.contains("config")) {
    if (!j["config"].is_object()) throw InputError("field 'config' must be an object");
    d.config = j["config"];
  }
  if (j.contains("init")) d.init = resolve(get<std::string>(j["init"], "init"), base_dir);
  return d;
}

json to_json(const ProblemDescriptor& d) {
  json est = {{"kind", d.estimating.kind}, {"opaque", d.estimating.opaque}};
  const bool linear = d.estimating.kind == "linear";
  est[linear ? "matrix" : "design"] = fs::absolute(d.estimating.design).lexically_normal().string();
  est[linear ? "offset" : "response"] = fs::absolute(d.estimating.response).lexically_normal().string();
  if (d.estimating.declared_lipschitz) est["declared_lipschitz"] = *d.estimating.declared_lipschitz;

  json pen = {{"kind", d.penalty.kind}};
  const auto& k = d.penalty.kind;
  if (k == "elastic_net") pen["ratio"] = d.penalty.ratio;
  if (k == "sparse_group_lasso") pen["alpha"] = d.penalty.alpha;
  if (k == "group_lasso" || k == "sparse_group_lasso") {
    pen["groups"] = d.penalty.groups;
    if (!d.penalty.weights.empty()) pen["weights"] = d.penalty.weights;
  }
  if (k == "ball") {
    pen["norm"] = d.penalty.ball_norm;
    if (d.penalty.radius) pen["radius"] = *d.penalty.radius;
    if (d.penalty.ball_norm == "box") {
      pen["lower"] = d.penalty.lower;
      pen["upper"] = d.penalty.upper;
    }
  }
  json out = {{"schema_version", d.schema_version}, {"estimating", est}, {"penalty", pen}, {"lambda", d.lambda}};
  if (d.method) out["method"] = *d.method;
  if (!d.config.empty()) out["config"] = d.config;
  if (d.init) out["init"] = fs::absolute(*d.init).lexically_normal().string();
  return out;
}

PenaltySpec build_penalty(const PenaltyDescriptor& d, Index p) {
  const auto& k = d.kind;
  if (k == "ridge") return PenaltySpec::ridge();
  if (k == "lasso") return PenaltySpec::lasso();
  if (k == "elastic_net") return PenaltySpec::elastic_net(d.ratio);
  if (k == "group_lasso" || k == "sparse_group_lasso") {
    if (d.groups.empty()) throw InputError(fmt::format("penalty '{}' needs 'groups' (--groups)", k));
    auto partition = GroupPartition::from_one_based(d.groups, d.weights);
    if (k == "group_lasso") return PenaltySpec::group_lasso(std::move(partition));
    return PenaltySpec::sparse_group_lasso(std::move(partition), d.alpha);
  }
  if (k == "ball") {
    if (d.ball_norm == "box") {
      if (static_cast<Index>(d.lower.size()) != p || static_cast<Index>(d.upper.size()) != p) {
        throw InputError(fmt::format("box bounds 'penalty.lower'/'penalty.upper' need {} entries each", p));
      }
      return PenaltySpec::ball_indicator(BallConstraint::box(
          Eigen::Map<const Vector>(d.lower.data(), p), Eigen::Map<const Vector>(d.upper.data(), p)));
    }
    if (!d.radius) throw InputError("ball penalty needs 'penalty.radius' (--radius)");
    if (d.ball_norm == "l1") return PenaltySpec::ball_indicator(BallConstraint::l1(*d.radius));
    if (d.ball_norm == "l2") return PenaltySpec::ball_indicator(BallConstraint::l2(*d.radius));
    throw InputError(fmt::format("field 'penalty.norm' must be l1, l2 or box, got '{}'", d.ball_norm));
  }
  throw InputError(fmt::format("field 'penalty.kind' has unknown value '{}'", k));
}

EstimatingFunctionPtr build_estimating(const EstimatingDescriptor& d) {
  if (d.design.empty()) throw InputError("no design file given (--design)");
  if (d.response.empty()) throw InputError("no response file given (--response)");
  Matrix x = read_csv_matrix(d.design);
  Vector y = read_csv_vector(d.response);
  EstimatingFunctionPtr base;
  if (d.kind == "least_squares") {
    base = std::make_shared<LeastSquaresEstimating>(std::move(x), std::move(y));
  } else if (d.kind == "logistic") {
    base = std::make_shared<LogisticEstimating>(std::move(x), std::move(y));
  } else if (d.kind == "linear") {
    base = std::make_shared<LinearEstimating>(std::move(x), std::move(y));
  } else {
    throw InputError(fmt::format("field 'estimating.kind' has unknown value '{}'", d.kind));
  }
  if (!d.opaque) return base;
  CallbackEstimating::Options options;
  options.lipschitz = d.declared_lipschitz;
  options.sample_size = base->sample_size();
  options.concurrency_safe = true;
  options.name = "opaque " + base->name();
  return std::make_shared<CallbackEstimating>(
      base->dimension(), [base](const Vector& beta) { return base->evaluate(beta); }, std::move(options));
}

EstimatingProblem build_problem(const ProblemDescriptor& d) {
  EstimatingProblem problem;
  problem.u = build_estimating(d.estimating);
  problem.penalty = build_penalty(d.penalty, problem.u->dimension());
  problem.lambda = problem.penalty.is_indicator() ? 1.0 : d.lambda;
  return validate_problem(problem);
}

std::vector<std::vector<long long>> parse_groups(const std::string& text) {
  std::vector<std::vector<long long>> groups;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t semi = text.find(';', start);
    const std::string part = text.substr(start, semi == std::string::npos ? std::string::npos : semi - start);
    auto& group = groups.emplace_back();
    for (double x : parse_real_list(part, "--groups")) {
      if (x != std::floor(x)) throw InputError(fmt::format("--groups: '{}' is not an integer index", x));
      group.push_back(static_cast<long long>(x));
    }
    if (semi == std::string::npos) break;
    start = semi + 1;
  }
  return groups;
}

SolverConfig config_from_json(const json& j, SolverConfig c) {
  if (!j.is_object()) throw InputError("field 'config' must be an object");
  reject_unknown(j, {"tau", "rho", "step", "t_bar", "psi", "epsilon_lqa", "zero_threshold", "max_iter", "tol",
                     "allow_fd_jacobian", "record_iterates"},
                 "config");
  auto real = [&](const char* key) { return json_real(j.at(key), std::string("config.") + key); };
  if (j.contains("tau") && !j["tau"].is_null()) c.tau = real("tau");
  if (j.contains("rho")) c.rho = real("rho");
  if (j.contains("step") && !j["step"].is_null()) c.step = real("step");
  if (j.contains("t_bar")) c.t_bar = real("t_bar");
  if (j.contains("psi")) c.psi = real("psi");
  if (j.contains("epsilon_lqa")) c.epsilon_lqa = real("epsilon_lqa");
  if (j.contains("zero_threshold")) c.zero_threshold = real("zero_threshold");
  if (j.contains("max_iter")) c.max_iter = get<int>(j["max_iter"], "config.max_iter");
  if (j.contains("tol")) c.tol = real("tol");
  if (j.contains("allow_fd_jacobian")) c.allow_fd_jacobian = get<bool>(j["allow_fd_jacobian"], "config.allow_fd_jacobian");
  if (j.contains("record_iterates")) c.record_iterates = get<bool>(j["record_iterates"], "config.record_iterates");
  return c;
}

json to_json(const SolverConfig& c) {
  json out = {{"rho", c.rho},
              {"t_bar", c.t_bar},
              {"psi", c.psi},
              {"epsilon_lqa", c.epsilon_lqa},
              {"zero_threshold", c.zero_threshold},
              {"max_iter", c.max_iter},
              {"tol", c.tol},
              {"allow_fd_jacobian", c.allow_fd_jacobian},
              {"record_iterates", c.record_iterates}};
  out["tau"] = c.tau ? json(*c.tau) : json(nullptr);
  out["step"] = c.step ? json(*c.step) : json(nullptr);
  return out;
}

Method parse_method(const std::string& name) {
  if (auto m = method_from_string(name)) return *m;
  throw InputError(fmt::format("--method must be one of picard, km, gra-fixed, gra-adaptive, lqa; got '{}'", name));
}

}  // namespace ree::cli
