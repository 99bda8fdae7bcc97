#pragma once

#include <span>

#include "spsc/correlator.hpp"
#include "spsc/fitter.hpp"
#include "spsc/hom_models.hpp"

namespace spsc {

/// (x, y) sample with an optional 1-sigma error. When every point of a
/// data set carries sigma > 0 the fit is weighted by 1/sigma^2, otherwise
/// it is unweighted.
struct DataPoint {
  double x = 0.0;
  double y = 0.0;
  double sigma = 0.0;
};

/// Antibunching fit of a normalized CW histogram with Poisson weights
/// (zero-count bins weighted as one count). Fits bins with |tau| below
/// max_delay_ns, or all bins when it is 0. Parameters: g2_zero, gamma1.
FitResult fit_g2_cw(const Histogram& h, double max_delay_ns = 0.0);

/// Saturation curve fit, rate (cps) against power (uW). Parameters: i0,
/// i_sat, p_sat. With fix_i0 the background is held at zero.
FitResult fit_saturation(std::span<const DataPoint> points, bool fix_i0 = false);

/// Linear fit of gamma1 (ns^-1) against power (uW), reported as tau_rad
/// (ns) = 1/intercept and alpha (uW^-1) = slope/intercept with first-order
/// error propagation. Throws ComputationError for a non-positive intercept.
FitResult fit_gamma1_linear(std::span<const DataPoint> points);

struct HomFit {
  FitResult cross_stage;  ///< cross-polarized fit of the base g2 parameters
  FitResult joint;        ///< g2_zero, gamma1, visibility, tau_c (ps)
  double g_co_zero = 0.0;
  double g_cross_zero = 0.0;
  double v_hom_raw = 0.0;
  double m_s = 0.0;
};

/// Two-stage HOM fit: the cross-polarized histogram fixes the source
/// parameters, then both histograms are fitted jointly for visibility and
/// coherence time. Raw and corrected visibilities use the fitted model at
/// zero delay. Throws ComputationError if the cross-polarized stage does
/// not converge. When the visibility settles at zero, tau_c cannot be
/// determined and is reported with infinite sigma.
HomFit fit_hom_joint(const Histogram& h_co, const Histogram& h_cross, const SplitterPair& splitters,
                     double dtau2_ns, double max_delay_ns = 0.0);

/// Lorentzian line fit of (wavelength nm, counts). Parameters: center,
/// fwhm, amplitude, offset.
FitResult fit_lorentzian(std::span<const DataPoint> spectrum);

}  // namespace spsc
