#pragma once

#include "spsc/analytic_models.hpp"

// Hong-Ou-Mandel correlations behind an unbalanced Mach-Zehnder
// interferometer: splitter 1 sends a photon to the short arm (t1) or the
// long arm (r1, delayed by dtau2) and splitter 2 recombines the arms.

namespace spsc {

/// Reflection/transmission probabilities of both splitters. Each splitter
/// is lossless: r + t = 1.
struct SplitterPair {
  double r1 = 0.5;
  double t1 = 0.5;
  double r2 = 0.5;
  double t2 = 0.5;

  static SplitterPair balanced() { return {}; }
  static SplitterPair from_transmissions(double t1, double t2) {
    return {1.0 - t1, t1, 1.0 - t2, t2};
  }
  void validate() const;
};

struct HOMParams {
  SplitterPair splitters;
  double dtau2_ns = 4.36;    ///< interferometer delay
  double visibility = 1.0;   ///< wavefunction overlap at splitter 2
  double tau_c_ps = 450.0;   ///< coherence time
  G2TwoLevelParams base;     ///< source autocorrelation

  void validate() const;
};

/// Cross-polarized (distinguishable) correlation.
double eval_g2_cross(double tau_ns, const HOMParams& p);

/// Co-polarized correlation. The interference factor
/// (1 - V exp(-2|tau|/tau_c)) multiplies only the different-arm bracket.
double eval_g2_co(double tau_ns, const HOMParams& p);

/// Long-delay limit shared by both correlations.
double hom_tail_level(const SplitterPair& s);

/// 1 - g_co(0) / g_cross(0). Throws std::invalid_argument when
/// g_cross_zero is zero.
double visibility_raw(double g_co_zero, double g_cross_zero);

/// Upper bound on the two-photon overlap once multi-photon events are
/// removed: (v_hom + g2_zero) / (1 - g2_zero).
double visibility_corrected(double v_hom, double g2_zero);

/// Ratio of the Fourier-limited coherence time 2 tau_rad to a measured tau_c.
double lifetime_limit_factor(double tau_rad_ns, double tau_c_ps);

}  // namespace spsc
