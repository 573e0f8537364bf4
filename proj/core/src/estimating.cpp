#include "ree/estimating.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <string>

namespace ree {

namespace {

void require_finite(const Matrix& m, const char* what) {
  if (!m.allFinite()) throw Error(ErrorCode::NonFiniteInput, std::string(what) + " has non-finite entries");
}

// Power iteration for the top eigenvalue of a symmetric PSD operator.
template <class Apply>
double top_eigenvalue(Index p, Apply&& apply, double rel_tol, int max_iter) {
  std::mt19937_64 rng(0x5eed);
  std::normal_distribution<double> normal;
  Vector v(p);
  for (Index j = 0; j < p; ++j) v[j] = normal(rng);
  v.normalize();
  double estimate = 0.0;
  for (int it = 0; it < max_iter; ++it) {
    Vector w = apply(v);
    const double norm = w.norm();
    if (norm == 0.0) return 0.0;
    const double previous = estimate;
    estimate = v.dot(w);
    v = w / norm;
    if (it > 0 && std::abs(estimate - previous) <= rel_tol * std::abs(estimate)) break;
  }
  return estimate;
}

Vector sample_in_ball(std::mt19937_64& rng, Index p, double radius) {
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Vector direction(p);
  do {
    for (Index j = 0; j < p; ++j) direction[j] = normal(rng);
  } while (direction.norm() == 0.0);
  direction.normalize();
  const double r = radius * std::pow(unit(rng), 1.0 / static_cast<double>(p));
  return r * direction;
}

}  // namespace

Matrix EstimatingFunction::jacobian(const Vector&) const {
  throw Error(ErrorCode::JacobianUnavailable, name() + " has no analytic Jacobian");
}

LinearEstimating::LinearEstimating(Matrix a, Vector b) : a_(std::move(a)), b_(std::move(b)) {
  if (a_.rows() != a_.cols() || a_.rows() != b_.size() || a_.rows() < 1) {
    throw Error(ErrorCode::DimensionMismatch, "linear U needs a square p x p matrix and a p-vector offset");
  }
  require_finite(a_, "matrix A");
  require_finite(b_, "offset b");
}

Vector LinearEstimating::evaluate(const Vector& beta) const { return a_ * beta - b_; }

Matrix LinearEstimating::jacobian(const Vector&) const { return a_; }

LeastSquaresEstimating::LeastSquaresEstimating(Matrix x, Vector y) : x_(std::move(x)), y_(std::move(y)) {
  if (x_.rows() != y_.size() || x_.cols() < 1 || x_.rows() < 1) {
    throw Error(ErrorCode::DimensionMismatch, "design has " + std::to_string(x_.rows()) + " rows, response has " +
                                                  std::to_string(y_.size()) + " entries");
  }
  require_finite(x_, "design X");
  require_finite(y_, "response y");
  gram_ = x_.transpose() * x_;
}

Vector LeastSquaresEstimating::evaluate(const Vector& beta) const {
  return -(x_.transpose() * (y_ - x_ * beta));
}

Matrix LeastSquaresEstimating::jacobian(const Vector&) const { return gram_; }

LogisticEstimating::LogisticEstimating(Matrix x, Vector y) : x_(std::move(x)), y_(std::move(y)) {
  if (x_.rows() != y_.size() || x_.cols() < 1 || x_.rows() < 1) {
    throw Error(ErrorCode::DimensionMismatch, "design has " + std::to_string(x_.rows()) + " rows, response has " +
                                                  std::to_string(y_.size()) + " entries");
  }
  require_finite(x_, "design X");
  for (Index i = 0; i < y_.size(); ++i) {
    if (y_[i] != 0.0 && y_[i] != 1.0) {
      throw Error(ErrorCode::InvalidResponse, "logistic response entry " + std::to_string(i + 1) + " is not 0 or 1");
    }
  }
}

namespace {
double sigmoid(double t) {
  if (t >= 0.0) return 1.0 / (1.0 + std::exp(-t));
  const double e = std::exp(t);
  return e / (1.0 + e);
}
}  // namespace

Vector LogisticEstimating::evaluate(const Vector& beta) const {
  Vector mu = (x_ * beta).unaryExpr([](double t) { return sigmoid(t); });
  return -(x_.transpose() * (y_ - mu));
}

Matrix LogisticEstimating::jacobian(const Vector& beta) const {
  Vector w = (x_ * beta).unaryExpr([](double t) {
    const double s = sigmoid(t);
    return s * (1.0 - s);
  });
  return x_.transpose() * w.asDiagonal() * x_;
}

CallbackEstimating::CallbackEstimating(Index p, Evaluator evaluator)
    : CallbackEstimating(p, std::move(evaluator), Options{}) {}

CallbackEstimating::CallbackEstimating(Index p, Evaluator evaluator, Options options)
    : p_(p), evaluator_(std::move(evaluator)), options_(std::move(options)) {
  if (p_ < 1) throw Error(ErrorCode::DimensionMismatch, "callback dimension must be >= 1");
  if (!evaluator_) throw Error(ErrorCode::InvalidConfig, "callback evaluator is empty");
  if (options_.lipschitz && !(*options_.lipschitz > 0.0)) {
    throw Error(ErrorCode::InvalidConfig, "declared Lipschitz constant must be positive");
  }
}

Matrix CallbackEstimating::jacobian(const Vector& beta) const {
  if (!options_.jacobian) return EstimatingFunction::jacobian(beta);
  return options_.jacobian(beta);
}

Vector evaluate(const EstimatingFunction& f, const Vector& beta) {
  if (beta.size() != f.dimension()) {
    throw Error(ErrorCode::DimensionMismatch, "beta has length " + std::to_string(beta.size()) + ", U expects " +
                                                  std::to_string(f.dimension()));
  }
  Vector out = f.evaluate(beta);
  if (out.size() != f.dimension()) {
    throw Error(ErrorCode::DimensionMismatch, f.name() + " returned a vector of length " + std::to_string(out.size()));
  }
  if (!out.allFinite()) throw Error(ErrorCode::NonFiniteOutput, f.name() + " returned non-finite values");
  return out;
}

Matrix finite_difference_jacobian(const EstimatingFunction& f, const Vector& beta) {
  const Index p = f.dimension();
  if (beta.size() != p) throw Error(ErrorCode::DimensionMismatch, "beta length does not match U");
  const double base = std::cbrt(std::numeric_limits<double>::epsilon());
  Matrix jac(p, p);
  Vector probe = beta;
  for (Index j = 0; j < p; ++j) {
    const double h = base * (1.0 + std::abs(beta[j]));
    probe[j] = beta[j] + h;
    const Vector plus = evaluate(f, probe);
    probe[j] = beta[j] - h;
    const Vector minus = evaluate(f, probe);
    probe[j] = beta[j];
    jac.col(j) = (plus - minus) / (2.0 * h);
  }
  return jac;
}

Matrix jacobian(const EstimatingFunction& f, const Vector& beta, bool allow_finite_difference) {
  if (beta.size() != f.dimension()) throw Error(ErrorCode::DimensionMismatch, "beta length does not match U");
  if (f.has_jacobian()) {
    Matrix jac = f.jacobian(beta);
    if (jac.rows() != f.dimension() || jac.cols() != f.dimension()) {
      throw Error(ErrorCode::DimensionMismatch, f.name() + " Jacobian is not p x p");
    }
    return jac;
  }
  if (!allow_finite_difference) {
    throw Error(ErrorCode::JacobianUnavailable,
                f.name() + " has no analytic Jacobian and finite differences were not enabled");
  }
  return finite_difference_jacobian(f, beta);
}

double spectral_norm(const Matrix& m, double rel_tol, int max_iter) {
  const double top = top_eigenvalue(
      m.cols(), [&](const Vector& v) -> Vector { return m.transpose() * (m * v); }, rel_tol * 0.5, max_iter);
  return std::sqrt(std::max(top, 0.0));
}

std::optional<double> lipschitz_upper_bound(const EstimatingFunction& f) {
  constexpr double kRelTol = 1e-6;
  constexpr int kMaxIter = 1000;
  if (const auto* lin = dynamic_cast<const LinearEstimating*>(&f)) return spectral_norm(lin->matrix(), kRelTol, kMaxIter);
  if (const auto* ls = dynamic_cast<const LeastSquaresEstimating*>(&f)) {
    const Matrix& x = ls->design();
    return top_eigenvalue(
        x.cols(), [&](const Vector& v) -> Vector { return x.transpose() * (x * v); }, kRelTol, kMaxIter);
  }
  if (const auto* lg = dynamic_cast<const LogisticEstimating*>(&f)) {
    const Matrix& x = lg->design();
    return 0.25 * top_eigenvalue(
                      x.cols(), [&](const Vector& v) -> Vector { return x.transpose() * (x * v); }, kRelTol,
                      kMaxIter);
  }
  return f.declared_lipschitz();
}

MonotonicityProbe monotonicity_probe(const EstimatingFunction& f, int trials, double radius, std::uint64_t seed) {
  if (trials < 1) throw Error(ErrorCode::InvalidConfig, "monotonicity probe needs trials >= 1");
  if (!(radius > 0.0)) throw Error(ErrorCode::InvalidRadius, "probe radius must be positive");
  MonotonicityProbe result;
  result.seed = seed;
  std::mt19937_64 rng(seed);
  const Index p = f.dimension();
  for (int t = 0; t < trials; ++t) {
    Vector a = sample_in_ball(rng, p, radius);
    Vector b = sample_in_ball(rng, p, radius);
    const double inner = (evaluate(f, a) - evaluate(f, b)).dot(a - b);
    ++result.trials;
    if (inner < result.worst_inner_product) result.worst_inner_product = inner;
    if (inner < -1e-10) {
      result.passed = false;
      result.counterexample = std::make_pair(std::move(a), std::move(b));
      break;
    }
  }
  return result;
}

}  // namespace ree
