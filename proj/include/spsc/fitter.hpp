#pragma once

#include <Eigen/Dense>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace spsc {

/// Scalar model y = f(params, x) with box bounds. A parameter whose lower
/// and upper bounds coincide is held fixed.
struct ModelSpec {
  std::string name;
  std::vector<std::string> param_names;
  std::vector<double> lower;
  std::vector<double> upper;
  std::function<double(std::span<const double> params, double x)> value;
  /// Optional analytic derivative of value() with respect to each parameter.
  std::function<void(std::span<const double> params, double x, std::span<double> grad)> gradient;

  std::size_t size() const { return param_names.size(); }
  void validate() const;
  /// Copy with parameter `name` fixed at `at`.
  ModelSpec with_fixed(std::string_view name, double at) const;
};

struct FitOptions {
  int max_iterations = 200;
  double relative_tolerance = 1e-10;  ///< on the objective decrease of an accepted step
  double gradient_tolerance = 1e-8;   ///< on the scaled projected gradient infinity-norm
  double initial_damping = 1e-3;
  bool use_analytic_gradient = true;
};

enum class Termination { kRelativeDecrease, kGradient, kStalled, kMaxIterations };

struct FitResult {
  std::string model;
  std::vector<std::string> names;
  std::vector<double> params;
  std::vector<double> sigma;
  Eigen::MatrixXd covariance;
  double chi2 = 0.0;
  double chi2_reduced = 0.0;
  int iterations = 0;
  bool converged = false;
  Termination termination = Termination::kMaxIterations;
  /// Objective at the start and after every accepted step.
  std::vector<double> objective_history;

  std::size_t index(std::string_view name) const;
  double value(std::string_view name) const { return params[index(name)]; }
  double error(std::string_view name) const { return sigma[index(name)]; }
};

/// Weighted Levenberg-Marquardt minimization of sum w_i (y_i - f(p, x_i))^2.
///
/// Steps solve (J^T W J + lambda diag(J^T W J)) dp = J^T W r and are projected
/// onto the bounds. A parameter on a bound whose gradient points outward is
/// held there for that step. lambda starts at options.initial_damping, grows
/// x10 on a rejected step and shrinks x10 on an accepted one. Only steps that
/// lower the objective are accepted. Covariance is (J^T W J)^-1 scaled by the
/// reduced chi-square, restricted to parameters that are neither fixed nor
/// resting on a bound (those report sigma 0).
///
/// Throws std::invalid_argument on malformed input and ComputationError when
/// the normal matrix at the optimum is singular. Running out of iterations
/// is not an error: the best point is returned with converged == false.
FitResult fit_nlls(const ModelSpec& model, std::span<const double> xs, std::span<const double> ys,
                   std::span<const double> weights, std::span<const double> init,
                   const FitOptions& options = {});

/// Finite-difference Jacobian by Richardson-extrapolated central
/// differences, rows = data points.
Eigen::MatrixXd finite_difference_jacobian(const ModelSpec& model, std::span<const double> params,
                                           std::span<const double> xs);

/// Jacobian from model.gradient; throws std::logic_error if it is absent.
Eigen::MatrixXd analytic_jacobian(const ModelSpec& model, std::span<const double> params,
                                  std::span<const double> xs);

}  // namespace spsc
