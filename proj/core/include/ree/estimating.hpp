#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <utility>

#include "ree/types.hpp"

namespace ree {

/// A map U : R^p -> R^p, optionally with its Jacobian dU/dbeta^T.
///
/// Solvers only ever call evaluate(); the Jacobian is consumed by the
/// LQA-Newton baseline alone.
class EstimatingFunction {
 public:
  virtual ~EstimatingFunction() = default;

  virtual Index dimension() const = 0;
  virtual Vector evaluate(const Vector& beta) const = 0;

  virtual bool has_jacobian() const { return false; }
  virtual Matrix jacobian(const Vector& beta) const;

  /// Lipschitz constant of U declared by the caller, if any.
  virtual std::optional<double> declared_lipschitz() const { return std::nullopt; }

  /// Number of observations behind U, when known. Used for the p > n cost flag.
  virtual std::optional<Index> sample_size() const { return std::nullopt; }

  /// Whether evaluate() may be called from several threads at once.
  virtual bool concurrency_safe() const { return true; }

  virtual std::string name() const = 0;
};

using EstimatingFunctionPtr = std::shared_ptr<const EstimatingFunction>;

/// U(beta) = A beta - b.
class LinearEstimating final : public EstimatingFunction {
 public:
  LinearEstimating(Matrix a, Vector b);

  Index dimension() const override { return a_.cols(); }
  Vector evaluate(const Vector& beta) const override;
  bool has_jacobian() const override { return true; }
  Matrix jacobian(const Vector& beta) const override;
  std::string name() const override { return "linear"; }

  const Matrix& matrix() const noexcept { return a_; }
  const Vector& offset() const noexcept { return b_; }

 private:
  Matrix a_;
  Vector b_;
};

/// U(beta) = -X^T (y - X beta), the negative least-squares gradient.
class LeastSquaresEstimating final : public EstimatingFunction {
 public:
  LeastSquaresEstimating(Matrix x, Vector y);

  Index dimension() const override { return x_.cols(); }
  Vector evaluate(const Vector& beta) const override;
  bool has_jacobian() const override { return true; }
  /// X^T X, independent of beta and cached at construction.
  Matrix jacobian(const Vector& beta) const override;
  std::optional<Index> sample_size() const override { return x_.rows(); }
  std::string name() const override { return "least_squares"; }

  const Matrix& design() const noexcept { return x_; }
  const Vector& response() const noexcept { return y_; }
  const Matrix& gram() const noexcept { return gram_; }

 private:
  Matrix x_;
  Vector y_;
  Matrix gram_;
};

/// U(beta) = -X^T (y - sigmoid(X beta)), the negative logistic score.
class LogisticEstimating final : public EstimatingFunction {
 public:
  LogisticEstimating(Matrix x, Vector y);

  Index dimension() const override { return x_.cols(); }
  Vector evaluate(const Vector& beta) const override;
  bool has_jacobian() const override { return true; }
  Matrix jacobian(const Vector& beta) const override;
  std::optional<Index> sample_size() const override { return x_.rows(); }
  std::string name() const override { return "logistic"; }

  const Matrix& design() const noexcept { return x_; }
  const Vector& response() const noexcept { return y_; }

 private:
  Matrix x_;
  Vector y_;
};

/// User-supplied evaluator treated as a black box.
class CallbackEstimating final : public EstimatingFunction {
 public:
  using Evaluator = std::function<Vector(const Vector&)>;
  using JacobianEvaluator = std::function<Matrix(const Vector&)>;

  struct Options {
    JacobianEvaluator jacobian;
    std::optional<double> lipschitz;
    std::optional<Index> sample_size;
    bool concurrency_safe = false;
    std::string name = "callback";
  };

  CallbackEstimating(Index p, Evaluator evaluator);
  CallbackEstimating(Index p, Evaluator evaluator, Options options);

  Index dimension() const override { return p_; }
  Vector evaluate(const Vector& beta) const override { return evaluator_(beta); }
  bool has_jacobian() const override { return static_cast<bool>(options_.jacobian); }
  Matrix jacobian(const Vector& beta) const override;
  std::optional<double> declared_lipschitz() const override { return options_.lipschitz; }
  std::optional<Index> sample_size() const override { return options_.sample_size; }
  bool concurrency_safe() const override { return options_.concurrency_safe; }
  std::string name() const override { return options_.name; }

 private:
  Index p_;
  Evaluator evaluator_;
  Options options_;
};

/// Checked evaluation: dimension match and finite output.
Vector evaluate(const EstimatingFunction& f, const Vector& beta);

/// Analytic Jacobian when available, else central differences if allowed.
Matrix jacobian(const EstimatingFunction& f, const Vector& beta, bool allow_finite_difference = false);

/// Central differences with h_j = cbrt(eps) * (1 + |beta_j|).
Matrix finite_difference_jacobian(const EstimatingFunction& f, const Vector& beta);

/// Spectral-norm estimate of the Lipschitz constant of U, or nullopt when unavailable.
///
/// Linear: ||A||_2. Least squares: ||X^T X||_2. Logistic: ||X^T X||_2 / 4.
/// Both by power iteration (relative tolerance 1e-6, at most 1000 steps).
/// Anything else: the declared constant.
std::optional<double> lipschitz_upper_bound(const EstimatingFunction& f);

/// Largest singular value of a matrix by power iteration on M^T M.
double spectral_norm(const Matrix& m, double rel_tol = 1e-6, int max_iter = 1000);

struct MonotonicityProbe {
  bool passed = true;
  std::uint64_t seed = 0;
  int trials = 0;
  /// Most negative <U(b) - U(b'), b - b'> seen.
  double worst_inner_product = 0.0;
  std::optional<std::pair<Vector, Vector>> counterexample;
};

/// Samples pairs uniformly in the origin-centred ball and reports the first
/// pair with <U(b) - U(b'), b - b'> < -1e-10.
MonotonicityProbe monotonicity_probe(const EstimatingFunction& f, int trials, double radius,
                                     std::uint64_t seed);

}  // namespace ree
