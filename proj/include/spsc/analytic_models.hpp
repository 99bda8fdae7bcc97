#pragma once

// Closed-form emitter models. Delays are in nanoseconds, decay rates in
// ns^-1, pump powers in microwatts and count rates in counts per second.

namespace spsc {

/// Two-level emitter antibunching: g2(tau) = 1 - (1 - g2_zero) exp(-gamma1 |tau|).
struct G2TwoLevelParams {
  double g2_zero = 0.0;  ///< purity at zero delay, [0, 1)
  double gamma1 = 1.0;   ///< antibunching decay rate, ns^-1

  void validate() const;
};

/// Power dependence of the antibunching rate: gamma1 = (1 + alpha P) / tau_rad.
struct PowerDecayParams {
  double tau_rad = 1.0;  ///< radiative lifetime, ns
  double alpha = 0.0;    ///< pump-rate slope, uW^-1

  void validate() const;
};

/// I(P) = i0 + i_sat (1 - exp(-P / p_sat)).
struct SaturationParams {
  double i0 = 0.0;     ///< dark/background rate, cps
  double i_sat = 1.0;  ///< saturation rate, cps
  double p_sat = 1.0;  ///< saturation power, uW

  void validate() const;
};

struct LorentzianParams {
  double center = 0.0;     ///< nm
  double fwhm = 1.0;       ///< nm
  double amplitude = 1.0;  ///< counts above offset at the peak
  double offset = 0.0;     ///< counts

  void validate() const;
};

double eval_g2_two_level(double tau_ns, const G2TwoLevelParams& p);

double eval_gamma1(double power_uw, const PowerDecayParams& p);

double eval_saturation(double power_uw, const SaturationParams& p);

/// Emitter-only count rate i_raw * sqrt(1 - g2_zero). Throws
/// std::invalid_argument for g2_zero outside [0, 1].
double corrected_rate(double i_raw, double g2_zero);

double eval_lorentzian(double wavelength_nm, const LorentzianParams& p);

}  // namespace spsc
