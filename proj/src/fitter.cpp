#include "spsc/fitter.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "spsc/errors.hpp"

namespace spsc {

void ModelSpec::validate() const {
  const std::size_t n = param_names.size();
  if (n == 0) throw std::invalid_argument("model has no parameters");
  if (lower.size() != n || upper.size() != n) {
    throw std::invalid_argument("model " + name + ": bounds do not match parameter count");
  }
  for (std::size_t j = 0; j < n; ++j) {
    if (!(lower[j] <= upper[j])) {
      throw std::invalid_argument("model " + name + ": bounds of " + param_names[j] + " are not ordered");
    }
  }
  if (!value) throw std::invalid_argument("model " + name + ": no value function");
}

ModelSpec ModelSpec::with_fixed(std::string_view pname, double at) const {
  ModelSpec m = *this;
  const auto it = std::find(m.param_names.begin(), m.param_names.end(), pname);
  if (it == m.param_names.end()) throw std::invalid_argument("unknown parameter " + std::string(pname));
  const auto j = static_cast<std::size_t>(it - m.param_names.begin());
  m.lower[j] = at;
  m.upper[j] = at;
  return m;
}

std::size_t FitResult::index(std::string_view pname) const {
  const auto it = std::find(names.begin(), names.end(), pname);
  if (it == names.end()) throw std::out_of_range("fit result has no parameter " + std::string(pname));
  return static_cast<std::size_t>(it - names.begin());
}

Eigen::MatrixXd finite_difference_jacobian(const ModelSpec& model, std::span<const double> params,
                                           std::span<const double> xs) {
  // Ridders' extrapolation of central differences (Numerical Recipes dfridr),
  // run for every data point at once. The starting step is shrunk until the
  // model moves by at most 1% of its peak magnitude, so parameters with a
  // large offset but a narrow response, such as a line centre, get a step on
  // the scale of that response.
  constexpr int kLevels = 10;
  constexpr double kShrink = 1.4;
  constexpr double kSafe = 2.0;
  const std::size_t n = xs.size();
  const std::size_t k = params.size();
  Eigen::MatrixXd jac(n, k);
  std::vector<double> p(params.begin(), params.end());
  auto central = [&](std::size_t j, double h, std::vector<double>& out) {
    for (std::size_t i = 0; i < n; ++i) {
      p[j] = params[j] + h;
      const double up = model.value(p, xs[i]);
      p[j] = params[j] - h;
      const double down = model.value(p, xs[i]);
      out[i] = (up - down) / (2.0 * h);
    }
    p[j] = params[j];
  };
  std::vector<double> base(n);
  double peak = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    base[i] = model.value(p, xs[i]);
    peak = std::max(peak, std::abs(base[i]));
  }
  auto start_step = [&](std::size_t j) {
    double h = 1e-2 * std::max(std::abs(params[j]), 1.0);
    for (int halving = 0; halving < 60 && peak > 0.0; ++halving, h *= 0.5) {
      double moved = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        p[j] = params[j] + h;
        moved = std::max(moved, std::abs(model.value(p, xs[i]) - base[i]));
        p[j] = params[j] - h;
        moved = std::max(moved, std::abs(model.value(p, xs[i]) - base[i]));
      }
      p[j] = params[j];
      if (moved <= 1e-2 * peak) break;
    }
    return h;
  };
  for (std::size_t j = 0; j < k; ++j) {
    // prev[m] / cur[m]: extrapolation order m at the previous / current level
    std::vector<std::vector<double>> prev(kLevels, std::vector<double>(n, 0.0));
    std::vector<std::vector<double>> cur = prev;
    std::vector<double> err(n, std::numeric_limits<double>::max());
    std::vector<bool> done(n, false);
    double h = start_step(j);
    central(j, h, prev[0]);
    std::vector<double> best = prev[0];
    for (int lvl = 1; lvl < kLevels; ++lvl) {
      h /= kShrink;
      central(j, h, cur[0]);
      for (std::size_t i = 0; i < n; ++i) {
        if (done[i]) continue;
        double fac = kShrink * kShrink;
        for (int m = 1; m <= lvl; ++m) {
          const double v = (cur[m - 1][i] * fac - prev[m - 1][i]) / (fac - 1.0);
          cur[m][i] = v;
          fac *= kShrink * kShrink;
          const double e = std::max(std::abs(v - cur[m - 1][i]), std::abs(v - prev[m - 1][i]));
          if (e <= err[i]) {
            err[i] = e;
            best[i] = v;
          }
        }
        if (std::abs(cur[lvl][i] - prev[lvl - 1][i]) >= kSafe * err[i]) done[i] = true;
      }
      std::swap(prev, cur);
      if (std::all_of(done.begin(), done.end(), [](bool d) { return d; })) break;
    }
    for (std::size_t i = 0; i < n; ++i) jac(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = best[i];
  }
  return jac;
}

Eigen::MatrixXd analytic_jacobian(const ModelSpec& model, std::span<const double> params,
                                  std::span<const double> xs) {
  if (!model.gradient) throw std::logic_error("model " + model.name + " has no analytic gradient");
  const auto k = static_cast<Eigen::Index>(params.size());
  Eigen::MatrixXd jac(static_cast<Eigen::Index>(xs.size()), k);
  std::vector<double> grad(params.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    model.gradient(params, xs[i], grad);
    for (Eigen::Index j = 0; j < k; ++j) jac(static_cast<Eigen::Index>(i), j) = grad[static_cast<std::size_t>(j)];
  }
  return jac;
}

namespace {

class Problem {
 public:
  Problem(const ModelSpec& model, std::span<const double> xs, std::span<const double> ys,
          std::span<const double> weights, bool analytic)
      : model_(model), xs_(xs), ys_(ys), weights_(weights), analytic_(analytic && model.gradient) {}

  double objective(std::span<const double> p) const {
    double sum = 0.0;
    for (std::size_t i = 0; i < xs_.size(); ++i) {
      const double r = ys_[i] - model_.value(p, xs_[i]);
      sum += weights_[i] * r * r;
    }
    return sum;
  }

  Eigen::VectorXd residuals(std::span<const double> p) const {
    Eigen::VectorXd r(static_cast<Eigen::Index>(xs_.size()));
    for (std::size_t i = 0; i < xs_.size(); ++i) {
      r(static_cast<Eigen::Index>(i)) = ys_[i] - model_.value(p, xs_[i]);
    }
    return r;
  }

  Eigen::MatrixXd jacobian(std::span<const double> p) const {
    return analytic_ ? analytic_jacobian(model_, p, xs_) : finite_difference_jacobian(model_, p, xs_);
  }

  Eigen::VectorXd weights() const {
    return Eigen::Map<const Eigen::VectorXd>(weights_.data(), static_cast<Eigen::Index>(weights_.size()));
  }

 private:
  const ModelSpec& model_;
  std::span<const double> xs_;
  std::span<const double> ys_;
  std::span<const double> weights_;
  bool analytic_;
};

std::vector<std::size_t> free_indices(const ModelSpec& m) {
  std::vector<std::size_t> out;
  for (std::size_t j = 0; j < m.size(); ++j) {
    if (m.lower[j] < m.upper[j]) out.push_back(j);
  }
  return out;
}

Eigen::MatrixXd select_columns(const Eigen::MatrixXd& jac, const std::vector<std::size_t>& cols) {
  Eigen::MatrixXd out(jac.rows(), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t c = 0; c < cols.size(); ++c) {
    out.col(static_cast<Eigen::Index>(c)) = jac.col(static_cast<Eigen::Index>(cols[c]));
  }
  return out;
}

// Inverse of a symmetric positive semi-definite matrix after scaling it to
// unit diagonal; throws when the scaled matrix is numerically singular.
Eigen::MatrixXd scaled_inverse(const Eigen::MatrixXd& a, const std::string& model) {
  const Eigen::Index n = a.rows();
  if (n == 0) return a;
  Eigen::VectorXd d(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    if (!(a(j, j) > 0.0)) throw ComputationError("fit " + model + ": singular normal matrix");
    d(j) = 1.0 / std::sqrt(a(j, j));
  }
  const Eigen::MatrixXd s = d.asDiagonal() * a * d.asDiagonal();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(s);
  if (eig.info() != Eigen::Success || eig.eigenvalues().minCoeff() < 1e-12 * static_cast<double>(n)) {
    throw ComputationError("fit " + model + ": singular normal matrix");
  }
  const Eigen::MatrixXd s_inv =
      eig.eigenvectors() * eig.eigenvalues().cwiseInverse().asDiagonal() * eig.eigenvectors().transpose();
  return d.asDiagonal() * s_inv * d.asDiagonal();
}

}  // namespace

FitResult fit_nlls(const ModelSpec& model, std::span<const double> xs, std::span<const double> ys,
                   std::span<const double> weights, std::span<const double> init, const FitOptions& options) {
  model.validate();
  const std::size_t k = model.size();
  if (xs.size() != ys.size() || xs.size() != weights.size()) {
    throw std::invalid_argument("fit " + model.name + ": xs, ys and weights differ in length");
  }
  if (init.size() != k) throw std::invalid_argument("fit " + model.name + ": initial guess has wrong size");
  const auto free = free_indices(model);
  if (xs.size() < free.size()) {
    throw std::invalid_argument("fit " + model.name + ": fewer data points than free parameters");
  }
  for (double w : weights) {
    if (!(w > 0.0) || !std::isfinite(w)) throw std::invalid_argument("fit " + model.name + ": weights must be positive");
  }
  for (std::size_t i = 0; i < ys.size(); ++i) {
    if (!std::isfinite(ys[i]) || !std::isfinite(xs[i])) {
      throw std::invalid_argument("fit " + model.name + ": non-finite data");
    }
  }

  Problem problem(model, xs, ys, weights, options.use_analytic_gradient);
  std::vector<double> p(init.begin(), init.end());
  for (std::size_t j = 0; j < k; ++j) p[j] = std::clamp(p[j], model.lower[j], model.upper[j]);

  FitResult result;
  result.model = model.name;
  result.names = model.param_names;

  const Eigen::VectorXd w = problem.weights();
  double objective = problem.objective(p);
  result.objective_history.push_back(objective);
  double lambda = options.initial_damping;
  constexpr double kMaxDamping = 1e16;
  const auto nf = static_cast<Eigen::Index>(free.size());

  for (int iter = 1; iter <= options.max_iterations && !result.converged; ++iter) {
    result.iterations = iter;
    const Eigen::MatrixXd jac = select_columns(problem.jacobian(p), free);
    const Eigen::VectorXd r = problem.residuals(p);
    const Eigen::MatrixXd normal = jac.transpose() * w.asDiagonal() * jac;
    const Eigen::VectorXd g = jac.transpose() * (w.asDiagonal() * r);

    // Projected gradient, each component scaled by its column norm and the
    // residual norm so the test does not depend on the units of y or p.
    // Components pushing into an active bound vanish.
    double grad_norm = 0.0;
    const double r_norm = std::sqrt(objective);
    std::vector<Eigen::Index> active;  // free columns that may move this iteration
    for (Eigen::Index c = 0; c < nf; ++c) {
      const std::size_t j = free[static_cast<std::size_t>(c)];
      const bool blocked = (p[j] <= model.lower[j] && g(c) < 0.0) || (p[j] >= model.upper[j] && g(c) > 0.0);
      if (blocked) continue;
      active.push_back(c);
      const double col_norm = std::sqrt(normal(c, c));
      if (r_norm > 0.0 && col_norm > 0.0) grad_norm = std::max(grad_norm, std::abs(g(c)) / (col_norm * r_norm));
    }
    if (grad_norm < options.gradient_tolerance) {
      result.converged = true;
      result.termination = Termination::kGradient;
      break;
    }

    // Blocked parameters stay on their bound; solving for them too would
    // bend the step of the others toward a move that clamping then undoes.
    const auto na = static_cast<Eigen::Index>(active.size());
    Eigen::MatrixXd normal_a(na, na);
    Eigen::VectorXd g_a(na);
    for (Eigen::Index a = 0; a < na; ++a) {
      g_a(a) = g(active[a]);
      for (Eigen::Index b = 0; b < na; ++b) normal_a(a, b) = normal(active[a], active[b]);
    }
    const double diag_floor = std::max(normal.diagonal().maxCoeff(), 1.0) * 1e-15;
    bool accepted = false;
    while (!accepted && lambda <= kMaxDamping) {
      Eigen::MatrixXd damped = normal_a;
      for (Eigen::Index a = 0; a < na; ++a) damped(a, a) += lambda * std::max(normal_a(a, a), diag_floor);
      const Eigen::VectorXd step = damped.ldlt().solve(g_a);
      std::vector<double> trial = p;
      for (Eigen::Index a = 0; a < na; ++a) {
        const std::size_t j = free[static_cast<std::size_t>(active[a])];
        trial[j] = std::clamp(p[j] + step(a), model.lower[j], model.upper[j]);
      }
      const double trial_objective = problem.objective(trial);
      if (std::isfinite(trial_objective) && trial_objective < objective) {
        accepted = true;
        const double decrease = objective - trial_objective;
        const bool near_gauss_newton = lambda < 1.0;
        p = std::move(trial);
        objective = trial_objective;
        result.objective_history.push_back(objective);
        lambda = std::max(lambda / 10.0, 1e-12);
        // A small decrease under heavy damping only means the step was short.
        if (near_gauss_newton && decrease <= options.relative_tolerance * (objective + decrease)) {
          result.converged = true;
          result.termination = Termination::kRelativeDecrease;
        }
      } else {
        lambda *= 10.0;
      }
    }
    if (!accepted) {
      // No step along any damped direction lowers the objective: the point
      // is stationary to working precision.
      result.converged = true;
      result.termination = Termination::kStalled;
    }
  }

  result.params = p;
  result.chi2 = objective;
  // Parameters resting on a bound carry no covariance.
  std::vector<std::size_t> interior;
  for (std::size_t j : free) {
    if (p[j] > model.lower[j] && p[j] < model.upper[j]) interior.push_back(j);
  }
  const auto dof = static_cast<std::ptrdiff_t>(xs.size()) - static_cast<std::ptrdiff_t>(free.size());
  result.chi2_reduced = dof > 0 ? objective / static_cast<double>(dof) : 0.0;
  result.covariance = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k));
  result.sigma.assign(k, 0.0);
  if (!interior.empty()) {
    const Eigen::MatrixXd jac = select_columns(problem.jacobian(p), interior);
    const Eigen::MatrixXd normal = jac.transpose() * w.asDiagonal() * jac;
    const Eigen::MatrixXd cov = scaled_inverse(normal, model.name) * result.chi2_reduced;
    for (std::size_t a = 0; a < interior.size(); ++a) {
      for (std::size_t b = 0; b < interior.size(); ++b) {
        result.covariance(static_cast<Eigen::Index>(interior[a]), static_cast<Eigen::Index>(interior[b])) =
            cov(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
      }
      result.sigma[interior[a]] = std::sqrt(std::max(cov(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(a)), 0.0));
    }
  }
  return result;
}

}  // namespace spsc
