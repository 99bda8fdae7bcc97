#include "spsc/hom_models.hpp"

#include <cmath>
#include <stdexcept>

namespace spsc {

namespace {

constexpr double kSplitterTolerance = 1e-12;

void check_probability(double v, const char* name) {
  if (!(v >= 0.0 && v <= 1.0)) {
    throw std::invalid_argument(std::string("splitter ") + name + " must lie in [0, 1]");
  }
}

struct HomTerms {
  double same_arm;       // 4 (t1^2 + r1^2) r2 t2 g(tau)
  double different_arm;  // 4 r1 t1 [t2^2 g(tau - dtau2) + r2^2 g(tau + dtau2)]
};

HomTerms hom_terms(double tau_ns, const HOMParams& p) {
  const SplitterPair& s = p.splitters;
  const double g0 = eval_g2_two_level(tau_ns, p.base);
  const double g_minus = eval_g2_two_level(tau_ns - p.dtau2_ns, p.base);
  const double g_plus = eval_g2_two_level(tau_ns + p.dtau2_ns, p.base);
  return {4.0 * (s.t1 * s.t1 + s.r1 * s.r1) * s.r2 * s.t2 * g0,
          4.0 * s.r1 * s.t1 * (s.t2 * s.t2 * g_minus + s.r2 * s.r2 * g_plus)};
}

}  // namespace

void SplitterPair::validate() const {
  check_probability(r1, "r1");
  check_probability(t1, "t1");
  check_probability(r2, "r2");
  check_probability(t2, "t2");
  if (std::abs(r1 + t1 - 1.0) > kSplitterTolerance || std::abs(r2 + t2 - 1.0) > kSplitterTolerance) {
    throw std::invalid_argument("splitters must satisfy r + t = 1");
  }
}

void HOMParams::validate() const {
  splitters.validate();
  base.validate();
  if (!(dtau2_ns > 0.0)) throw std::invalid_argument("dtau2 must be positive");
  if (!(visibility >= 0.0 && visibility <= 1.0)) {
    throw std::invalid_argument("visibility must lie in [0, 1]");
  }
  if (!(tau_c_ps > 0.0)) throw std::invalid_argument("tau_c must be positive");
}

double eval_g2_cross(double tau_ns, const HOMParams& p) {
  const HomTerms t = hom_terms(tau_ns, p);
  return t.same_arm + t.different_arm;
}

double eval_g2_co(double tau_ns, const HOMParams& p) {
  const HomTerms t = hom_terms(tau_ns, p);
  const double tau_c_ns = p.tau_c_ps * 1e-3;
  const double interference = 1.0 - p.visibility * std::exp(-2.0 * std::abs(tau_ns) / tau_c_ns);
  return t.same_arm + t.different_arm * interference;
}

double hom_tail_level(const SplitterPair& s) {
  return 4.0 * s.r2 * s.t2 * (s.t1 * s.t1 + s.r1 * s.r1) +
         4.0 * s.r1 * s.t1 * (s.t2 * s.t2 + s.r2 * s.r2);
}

double visibility_raw(double g_co_zero, double g_cross_zero) {
  if (g_cross_zero == 0.0) {
    throw std::invalid_argument("visibility_raw: cross-polarized g2(0) is zero");
  }
  return 1.0 - g_co_zero / g_cross_zero;
}

double visibility_corrected(double v_hom, double g2_zero) {
  if (!(g2_zero < 1.0)) {
    throw std::invalid_argument("visibility_corrected: g2_zero must be below 1");
  }
  return (v_hom + g2_zero) / (1.0 - g2_zero);
}

double lifetime_limit_factor(double tau_rad_ns, double tau_c_ps) {
  if (!(tau_rad_ns > 0.0) || !(tau_c_ps > 0.0)) {
    throw std::invalid_argument("lifetime_limit_factor: inputs must be positive");
  }
  return 2.0 * tau_rad_ns * 1e3 / tau_c_ps;
}

}  // namespace spsc
