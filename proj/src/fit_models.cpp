#include "spsc/fit_models.hpp"

#include <cmath>
#include <limits>

namespace spsc::models {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kTiny = 1e-12;
constexpr double kMaxG2Zero = 1.0 - 1e-9;

// g(tau) of the two-level model and its derivatives in (g2_zero, gamma1).
struct G2Eval {
  double value;
  double d_g2_zero;
  double d_gamma1;
};

G2Eval g2_eval(double tau_ns, double g2_zero, double gamma1) {
  const double at = std::abs(tau_ns);
  const double e = std::exp(-gamma1 * at);
  return {1.0 - (1.0 - g2_zero) * e, e, (1.0 - g2_zero) * at * e};
}

struct HomEval {
  double same;       // same-arm term
  double different;  // different-arm bracket
  double d_same[2];
  double d_different[2];
};

HomEval hom_eval(double tau, double g2_zero, double gamma1, const SplitterPair& s, double dtau2) {
  const G2Eval c = g2_eval(tau, g2_zero, gamma1);
  const G2Eval m = g2_eval(tau - dtau2, g2_zero, gamma1);
  const G2Eval p = g2_eval(tau + dtau2, g2_zero, gamma1);
  const double a = 4.0 * (s.t1 * s.t1 + s.r1 * s.r1) * s.r2 * s.t2;
  const double b = 4.0 * s.r1 * s.t1;
  const double bm = b * s.t2 * s.t2;
  const double bp = b * s.r2 * s.r2;
  return {a * c.value,
          bm * m.value + bp * p.value,
          {a * c.d_g2_zero, a * c.d_gamma1},
          {bm * m.d_g2_zero + bp * p.d_g2_zero, bm * m.d_gamma1 + bp * p.d_gamma1}};
}

// Co-polarized value and gradient (g2_zero, gamma1, visibility, tau_c_ps).
double hom_co_eval(std::span<const double> q, double tau, const SplitterPair& s, double dtau2,
                   std::span<double> grad) {
  const HomEval h = hom_eval(tau, q[0], q[1], s, dtau2);
  const double a = 2.0 * std::abs(tau) * 1e3;  // ps
  const double e = std::exp(-a / q[3]);
  const double factor = 1.0 - q[2] * e;
  if (!grad.empty()) {
    grad[0] = h.d_same[0] + h.d_different[0] * factor;
    grad[1] = h.d_same[1] + h.d_different[1] * factor;
    grad[2] = -h.different * e;
    grad[3] = -h.different * q[2] * e * a / (q[3] * q[3]);
  }
  return h.same + h.different * factor;
}

double hom_cross_eval(std::span<const double> q, double tau, const SplitterPair& s, double dtau2,
                      std::span<double> grad) {
  const HomEval h = hom_eval(tau, q[0], q[1], s, dtau2);
  if (!grad.empty()) {
    grad[0] = h.d_same[0] + h.d_different[0];
    grad[1] = h.d_same[1] + h.d_different[1];
  }
  return h.same + h.different;
}

}  // namespace

ModelSpec g2_two_level() {
  ModelSpec m;
  m.name = "g2_two_level";
  m.param_names = {"g2_zero", "gamma1"};
  m.lower = {0.0, kTiny};
  m.upper = {kMaxG2Zero, kInf};
  m.value = [](std::span<const double> q, double x) { return g2_eval(x, q[0], q[1]).value; };
  m.gradient = [](std::span<const double> q, double x, std::span<double> g) {
    const G2Eval e = g2_eval(x, q[0], q[1]);
    g[0] = e.d_g2_zero;
    g[1] = e.d_gamma1;
  };
  return m;
}

ModelSpec saturation() {
  ModelSpec m;
  m.name = "saturation";
  m.param_names = {"i0", "i_sat", "p_sat"};
  m.lower = {0.0, kTiny, kTiny};
  m.upper = {kInf, kInf, kInf};
  m.value = [](std::span<const double> q, double x) { return q[0] - q[1] * std::expm1(-x / q[2]); };
  m.gradient = [](std::span<const double> q, double x, std::span<double> g) {
    const double e = std::exp(-x / q[2]);
    g[0] = 1.0;
    g[1] = -std::expm1(-x / q[2]);
    g[2] = -q[1] * e * x / (q[2] * q[2]);
  };
  return m;
}

ModelSpec linear() {
  ModelSpec m;
  m.name = "linear";
  m.param_names = {"intercept", "slope"};
  m.lower = {-kInf, -kInf};
  m.upper = {kInf, kInf};
  m.value = [](std::span<const double> q, double x) { return q[0] + q[1] * x; };
  m.gradient = [](std::span<const double>, double x, std::span<double> g) {
    g[0] = 1.0;
    g[1] = x;
  };
  return m;
}

ModelSpec lorentzian() {
  ModelSpec m;
  m.name = "lorentzian";
  m.param_names = {"center", "fwhm", "amplitude", "offset"};
  m.lower = {-kInf, kTiny, kTiny, 0.0};
  m.upper = {kInf, kInf, kInf, kInf};
  m.value = [](std::span<const double> q, double x) {
    const double h = 0.5 * q[1];
    const double d = x - q[0];
    return q[3] + q[2] * h * h / (d * d + h * h);
  };
  m.gradient = [](std::span<const double> q, double x, std::span<double> g) {
    const double h = 0.5 * q[1];
    const double d = x - q[0];
    const double den = d * d + h * h;
    g[0] = q[2] * h * h * 2.0 * d / (den * den);
    g[1] = q[2] * h * d * d / (den * den);
    g[2] = h * h / den;
    g[3] = 1.0;
  };
  return m;
}

ModelSpec gaussian_2d(std::shared_ptr<const std::vector<double>> xs,
                      std::shared_ptr<const std::vector<double>> ys) {
  ModelSpec m;
  m.name = "gaussian_2d";
  m.param_names = {"center_x", "center_y", "waist_x", "waist_y", "amplitude"};
  m.lower = {-kInf, -kInf, kTiny, kTiny, kTiny};
  m.upper = {kInf, kInf, kInf, kInf, kInf};
  m.value = [xs, ys](std::span<const double> q, double idx) {
    const auto i = static_cast<std::size_t>(idx);
    const double dx = (*xs)[i] - q[0];
    const double dy = (*ys)[i] - q[1];
    return q[4] * std::exp(-(dx * dx / (q[2] * q[2]) + dy * dy / (q[3] * q[3])));
  };
  m.gradient = [xs, ys](std::span<const double> q, double idx, std::span<double> g) {
    const auto i = static_cast<std::size_t>(idx);
    const double dx = (*xs)[i] - q[0];
    const double dy = (*ys)[i] - q[1];
    const double wx2 = q[2] * q[2];
    const double wy2 = q[3] * q[3];
    const double e = std::exp(-(dx * dx / wx2 + dy * dy / wy2));
    const double f = q[4] * e;
    g[0] = f * 2.0 * dx / wx2;
    g[1] = f * 2.0 * dy / wy2;
    g[2] = f * 2.0 * dx * dx / (wx2 * q[2]);
    g[3] = f * 2.0 * dy * dy / (wy2 * q[3]);
    g[4] = e;
  };
  return m;
}

ModelSpec hom_cross(const SplitterPair& s, double dtau2_ns) {
  ModelSpec m;
  m.name = "hom_cross";
  m.param_names = {"g2_zero", "gamma1"};
  m.lower = {0.0, kTiny};
  m.upper = {kMaxG2Zero, kInf};
  m.value = [s, dtau2_ns](std::span<const double> q, double x) { return hom_cross_eval(q, x, s, dtau2_ns, {}); };
  m.gradient = [s, dtau2_ns](std::span<const double> q, double x, std::span<double> g) {
    hom_cross_eval(q, x, s, dtau2_ns, g);
  };
  return m;
}

ModelSpec hom_co(const SplitterPair& s, double dtau2_ns) {
  ModelSpec m;
  m.name = "hom_co";
  m.param_names = {"g2_zero", "gamma1", "visibility", "tau_c"};
  m.lower = {0.0, kTiny, 0.0, 1.0};
  m.upper = {kMaxG2Zero, kInf, 1.0, 1e6};
  m.value = [s, dtau2_ns](std::span<const double> q, double x) { return hom_co_eval(q, x, s, dtau2_ns, {}); };
  m.gradient = [s, dtau2_ns](std::span<const double> q, double x, std::span<double> g) {
    hom_co_eval(q, x, s, dtau2_ns, g);
  };
  return m;
}

ModelSpec hom_joint(const SplitterPair& s, double dtau2_ns, std::shared_ptr<const std::vector<double>> delays_ns,
                    std::shared_ptr<const std::vector<bool>> is_co) {
  ModelSpec m = hom_co(s, dtau2_ns);
  m.name = "hom_joint";
  m.value = [s, dtau2_ns, delays_ns, is_co](std::span<const double> q, double idx) {
    const auto i = static_cast<std::size_t>(idx);
    const double tau = (*delays_ns)[i];
    return (*is_co)[i] ? hom_co_eval(q, tau, s, dtau2_ns, {}) : hom_cross_eval(q, tau, s, dtau2_ns, {});
  };
  m.gradient = [s, dtau2_ns, delays_ns, is_co](std::span<const double> q, double idx, std::span<double> g) {
    const auto i = static_cast<std::size_t>(idx);
    const double tau = (*delays_ns)[i];
    if ((*is_co)[i]) {
      hom_co_eval(q, tau, s, dtau2_ns, g);
    } else {
      hom_cross_eval(q, tau, s, dtau2_ns, g.first(2));
      g[2] = 0.0;
      g[3] = 0.0;
    }
  };
  return m;
}

}  // namespace spsc::models
