#include "spsc/fit_recipes.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <stdexcept>

#include "spsc/errors.hpp"
#include "spsc/fit_models.hpp"

namespace spsc {

namespace {

struct Series {
  std::vector<double> x;
  std::vector<double> y;
  std::vector<double> w;
};

// Normalized g2 with Poisson weights: var(g2) = counts / norm^2.
Series histogram_series(const Histogram& h, double max_delay_ns) {
  if (!h.normalized()) throw std::invalid_argument("fit: histogram must be normalized");
  Series s;
  for (std::size_t k = 0; k < h.bins(); ++k) {
    const double tau = h.bin_center_ns(k);
    if (max_delay_ns > 0.0 && std::abs(tau) >= max_delay_ns) continue;
    const double c = static_cast<double>(h.counts[k]);
    s.x.push_back(tau);
    s.y.push_back(c / h.norm);
    s.w.push_back(h.norm * h.norm / std::max(c, 1.0));
  }
  return s;
}

Series point_series(std::span<const DataPoint> points) {
  Series s;
  const bool weighted = std::all_of(points.begin(), points.end(), [](const DataPoint& p) { return p.sigma > 0.0; });
  for (const DataPoint& p : points) {
    s.x.push_back(p.x);
    s.y.push_back(p.y);
    s.w.push_back(weighted ? 1.0 / (p.sigma * p.sigma) : 1.0);
  }
  return s;
}

FitResult run(const ModelSpec& m, const Series& s, std::span<const double> init) {
  return fit_nlls(m, s.x, s.y, s.w, init);
}

// Picks the candidate start with the lowest objective.
std::vector<double> best_start(const ModelSpec& m, const Series& s, const std::vector<std::vector<double>>& starts) {
  double best = std::numeric_limits<double>::infinity();
  std::vector<double> chosen = starts.front();
  for (const auto& q : starts) {
    double obj = 0.0;
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      const double r = s.y[i] - m.value(q, s.x[i]);
      obj += s.w[i] * r * r;
    }
    if (obj < best) {
      best = obj;
      chosen = q;
    }
  }
  return chosen;
}

// 1/e recovery time of the antibunching dip, averaged over both sides.
double one_over_e_delay(const Series& s, double g2_zero) {
  const double target = 1.0 - (1.0 - g2_zero) / std::exp(1.0);
  std::vector<std::size_t> order(s.x.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  double total = 0.0;
  int sides = 0;
  for (int sign : {-1, 1}) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i : order) {
      const double tau = s.x[i];
      if (sign * tau <= 0.0) continue;
      if (s.y[i] >= target) best = std::min(best, std::abs(tau));
    }
    if (std::isfinite(best)) {
      total += best;
      ++sides;
    }
  }
  return sides > 0 ? total / sides : 0.0;
}

}  // namespace

FitResult fit_g2_cw(const Histogram& h, double max_delay_ns) {
  const Series s = histogram_series(h, max_delay_ns);
  if (s.x.size() < 2) throw std::invalid_argument("fit_g2_cw: not enough bins");
  const double y_min = *std::min_element(s.y.begin(), s.y.end());
  const double g2_zero = std::clamp(y_min, 0.0, 0.95);
  const double delay = one_over_e_delay(s, g2_zero);
  const double span = std::max(std::abs(s.x.front()), std::abs(s.x.back()));
  const double gamma1 = delay > 0.0 ? 1.0 / delay : 4.0 / span;
  const std::vector<double> init{g2_zero, gamma1};
  return run(models::g2_two_level(), s, init);
}

FitResult fit_saturation(std::span<const DataPoint> points, bool fix_i0) {
  if (points.size() < 4) throw std::invalid_argument("fit_saturation: need at least 4 points");
  std::vector<DataPoint> sorted(points.begin(), points.end());
  std::sort(sorted.begin(), sorted.end(), [](const DataPoint& a, const DataPoint& b) { return a.x < b.x; });
  const double i_sat = std::max_element(sorted.begin(), sorted.end(), [](const DataPoint& a, const DataPoint& b) {
                         return a.y < b.y;
                       })->y;
  // First power where the rate crosses half of the maximum, interpolated.
  double p_half = sorted.back().x;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    if (sorted[i].y >= 0.5 * i_sat) {
      if (i == 0) {
        p_half = sorted[0].x;
      } else {
        const auto& a = sorted[i - 1];
        const auto& b = sorted[i];
        p_half = a.x + (0.5 * i_sat - a.y) * (b.x - a.x) / (b.y - a.y);
      }
      break;
    }
  }
  // Half-maximum of 1 - exp(-P/Psat) is reached at P = Psat ln 2.
  const double p_sat = std::max(p_half / std::log(2.0), 1e-6);
  ModelSpec m = models::saturation();
  if (fix_i0) m = m.with_fixed("i0", 0.0);
  const std::vector<double> init{0.0, std::max(i_sat, 1e-6), p_sat};
  return run(m, point_series(points), init);
}

FitResult fit_gamma1_linear(std::span<const DataPoint> points) {
  if (points.size() < 2) throw std::invalid_argument("fit_gamma1_linear: need at least 2 points");
  const auto distinct = std::adjacent_find(points.begin(), points.end(),
                                           [](const DataPoint& a, const DataPoint& b) { return a.x != b.x; });
  if (distinct == points.end()) throw std::invalid_argument("fit_gamma1_linear: need 2 distinct powers");
  const Series s = point_series(points);
  const FitResult line = run(models::linear(), s, std::vector<double>{s.y.front(), 0.0});
  const double a = line.params[0];
  const double b = line.params[1];
  if (!(a > 0.0)) throw ComputationError("fit_gamma1_linear: non-positive intercept (unphysical lifetime)");

  FitResult out = line;
  out.model = "gamma1_linear";
  out.names = {"tau_rad", "alpha"};
  out.params = {1.0 / a, b / a};
  Eigen::Matrix2d jac;
  jac << -1.0 / (a * a), 0.0, -b / (a * a), 1.0 / a;
  out.covariance = jac * line.covariance * jac.transpose();
  out.sigma = {std::sqrt(std::max(out.covariance(0, 0), 0.0)), std::sqrt(std::max(out.covariance(1, 1), 0.0))};
  return out;
}

HomFit fit_hom_joint(const Histogram& h_co, const Histogram& h_cross, const SplitterPair& splitters,
                     double dtau2_ns, double max_delay_ns) {
  splitters.validate();
  if (!h_co.same_binning(h_cross)) throw std::invalid_argument("fit_hom_joint: histograms differ in binning");
  const Series cross = histogram_series(h_cross, max_delay_ns);
  const Series co = histogram_series(h_co, max_delay_ns);

  HomFit out;
  const ModelSpec cross_model = models::hom_cross(splitters, dtau2_ns);
  std::vector<std::vector<double>> starts;
  for (double g0 : {0.0, 0.1, 0.3}) {
    for (double gamma : {0.25, 0.5, 1.0, 2.0, 4.0}) starts.push_back({g0, gamma});
  }
  out.cross_stage = run(cross_model, cross, best_start(cross_model, cross, starts));
  if (!out.cross_stage.converged) {
    throw ComputationError("fit_hom_joint: cross-polarized fit did not converge after " +
                           std::to_string(out.cross_stage.iterations) + " iterations");
  }

  auto delays = std::make_shared<std::vector<double>>();
  auto is_co = std::make_shared<std::vector<bool>>();
  Series joint;
  for (const Series* part : {&cross, &co}) {
    for (std::size_t i = 0; i < part->x.size(); ++i) {
      joint.x.push_back(static_cast<double>(delays->size()));
      joint.y.push_back(part->y[i]);
      joint.w.push_back(part->w[i]);
      delays->push_back(part->x[i]);
      is_co->push_back(part == &co);
    }
  }
  ModelSpec joint_model = models::hom_joint(splitters, dtau2_ns, delays, is_co);
  const double g0 = out.cross_stage.params[0];
  const double gamma1 = out.cross_stage.params[1];
  starts.clear();
  for (double v : {0.1, 0.5, 0.9}) {
    for (double tau_c : {50.0, 150.0, 450.0, 1500.0}) starts.push_back({g0, gamma1, v, tau_c});
  }
  const auto init = best_start(joint_model, joint, starts);
  try {
    out.joint = run(joint_model, joint, init);
  } catch (const ComputationError&) {
    // With the visibility pinned at zero tau_c has no influence on the data
    // and the normal matrix is singular. Hold tau_c and refit the rest.
    FitResult held = run(joint_model.with_fixed("tau_c", init[3]), joint, init);
    if (held.params[2] > 0.0) throw;
    held.sigma[3] = std::numeric_limits<double>::infinity();
    out.joint = std::move(held);
  }

  HOMParams p;
  p.splitters = splitters;
  p.dtau2_ns = dtau2_ns;
  p.base = {out.joint.params[0], out.joint.params[1]};
  p.visibility = out.joint.params[2];
  p.tau_c_ps = out.joint.params[3];
  out.g_co_zero = eval_g2_co(0.0, p);
  out.g_cross_zero = eval_g2_cross(0.0, p);
  out.v_hom_raw = visibility_raw(out.g_co_zero, out.g_cross_zero);
  out.m_s = visibility_corrected(out.v_hom_raw, p.base.g2_zero);
  return out;
}

FitResult fit_lorentzian(std::span<const DataPoint> spectrum) {
  if (spectrum.size() < 5) throw std::invalid_argument("fit_lorentzian: need at least 5 points");
  const auto peak = std::max_element(spectrum.begin(), spectrum.end(),
                                     [](const DataPoint& a, const DataPoint& b) { return a.y < b.y; });
  const double floor = std::min_element(spectrum.begin(), spectrum.end(), [](const DataPoint& a, const DataPoint& b) {
                         return a.y < b.y;
                       })->y;
  const double offset = std::max(floor, 0.0);
  const double amplitude = std::max(peak->y - offset, 1e-12);
  double lo = peak->x;
  double hi = peak->x;
  double min_spacing = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < spectrum.size(); ++i) {
    const DataPoint& p = spectrum[i];
    if (p.y >= offset + 0.5 * amplitude) {
      lo = std::min(lo, p.x);
      hi = std::max(hi, p.x);
    }
    if (i > 0 && spectrum[i].x != spectrum[i - 1].x) {
      min_spacing = std::min(min_spacing, std::abs(spectrum[i].x - spectrum[i - 1].x));
    }
  }
  double fwhm = hi - lo;
  if (!(fwhm > 0.0)) fwhm = std::isfinite(min_spacing) ? min_spacing : 1.0;
  const std::vector<double> init{peak->x, fwhm, amplitude, offset};
  return run(models::lorentzian(), point_series(spectrum), init);
}

}  // namespace spsc
