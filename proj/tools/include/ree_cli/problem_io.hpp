#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ree/problem.hpp"
#include "ree/types.hpp"

namespace ree::cli {

inline constexpr int kSchemaVersion = 1;

struct EstimatingDescriptor {
  /// least_squares | logistic | linear
  std::string kind = "least_squares";
  /// X for least_squares / logistic, A for linear.
  std::filesystem::path design;
  /// y for least_squares / logistic, b for linear.
  std::filesystem::path response;
  /// Hide the Jacobian and the built-in Lipschitz bound from the solvers.
  bool opaque = false;
  std::optional<double> declared_lipschitz;
};

struct PenaltyDescriptor {
  /// ridge | lasso | elastic_net | group_lasso | sparse_group_lasso | ball
  std::string kind = "lasso";
  double ratio = 0.0;
  double alpha = 0.5;
  /// 1-based, as in problem files.
  std::vector<std::vector<long long>> groups;
  std::vector<double> weights;
  /// l1 | l2 | box
  std::string ball_norm = "l2";
  std::optional<double> radius;
  std::vector<double> lower;
  std::vector<double> upper;
};

struct ProblemDescriptor {
  int schema_version = kSchemaVersion;
  EstimatingDescriptor estimating;
  PenaltyDescriptor penalty;
  double lambda = 0.0;
  std::optional<std::string> method;
  nlohmann::json config = nlohmann::json::object();
  std::optional<std::filesystem::path> init;
};

/// Relative paths are resolved against base_dir.
ProblemDescriptor descriptor_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir);
/// Paths are written absolute so the document stands on its own.
nlohmann::json to_json(const ProblemDescriptor& d);

PenaltySpec build_penalty(const PenaltyDescriptor& d, Index p);
EstimatingFunctionPtr build_estimating(const EstimatingDescriptor& d);
EstimatingProblem build_problem(const ProblemDescriptor& d);

/// Parses "1,2;3,4" into 1-based groups.
std::vector<std::vector<long long>> parse_groups(const std::string& text);

/// Applies config fields over a base config; unknown keys are rejected.
SolverConfig config_from_json(const nlohmann::json& j, SolverConfig base = {});
nlohmann::json to_json(const SolverConfig& c);

Method parse_method(const std::string& name);

}  // namespace ree::cli
