#include "spsc/analytic_models.hpp"

#include <cmath>
#include <stdexcept>

namespace spsc {

void G2TwoLevelParams::validate() const {
  if (!(g2_zero >= 0.0 && g2_zero <= 1.0)) {
    throw std::invalid_argument("g2_zero must lie in [0, 1]");
  }
  if (!(gamma1 > 0.0)) throw std::invalid_argument("gamma1 must be positive");
}

void PowerDecayParams::validate() const {
  if (!(tau_rad > 0.0)) throw std::invalid_argument("tau_rad must be positive");
  if (!(alpha >= 0.0)) throw std::invalid_argument("alpha must be non-negative");
}

void SaturationParams::validate() const {
  if (!(i0 >= 0.0)) throw std::invalid_argument("i0 must be non-negative");
  if (!(i_sat > 0.0)) throw std::invalid_argument("i_sat must be positive");
  if (!(p_sat > 0.0)) throw std::invalid_argument("p_sat must be positive");
}

void LorentzianParams::validate() const {
  if (!(fwhm > 0.0)) throw std::invalid_argument("fwhm must be positive");
  if (!(amplitude > 0.0)) throw std::invalid_argument("amplitude must be positive");
  if (!(offset >= 0.0)) throw std::invalid_argument("offset must be non-negative");
}

double eval_g2_two_level(double tau_ns, const G2TwoLevelParams& p) {
  return 1.0 - (1.0 - p.g2_zero) * std::exp(-p.gamma1 * std::abs(tau_ns));
}

double eval_gamma1(double power_uw, const PowerDecayParams& p) {
  return (1.0 + p.alpha * power_uw) / p.tau_rad;
}

double eval_saturation(double power_uw, const SaturationParams& p) {
  // expm1 keeps the low-power slope accurate.
  return p.i0 - p.i_sat * std::expm1(-power_uw / p.p_sat);
}

double corrected_rate(double i_raw, double g2_zero) {
  if (!(g2_zero >= 0.0 && g2_zero <= 1.0)) {
    throw std::invalid_argument("corrected_rate: g2_zero must lie in [0, 1]");
  }
  return i_raw * std::sqrt(1.0 - g2_zero);
}

double eval_lorentzian(double wavelength_nm, const LorentzianParams& p) {
  const double half = 0.5 * p.fwhm;
  const double d = wavelength_nm - p.center;
  return p.offset + p.amplitude * half * half / (d * d + half * half);
}

}  // namespace spsc
