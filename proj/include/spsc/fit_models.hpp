#pragma once

#include <memory>
#include <vector>

#include "spsc/fitter.hpp"
#include "spsc/hom_models.hpp"

// ModelSpec factories for every fitted curve, each with an analytic gradient.

namespace spsc::models {

/// x = delay (ns); params g2_zero, gamma1.
ModelSpec g2_two_level();

/// x = power (uW); params i0, i_sat, p_sat.
ModelSpec saturation();

/// x = abscissa; params intercept, slope.
ModelSpec linear();

/// x = wavelength (nm); params center, fwhm, amplitude, offset.
ModelSpec lorentzian();

/// x = sample index into (xs, ys); params center_x, center_y, waist_x,
/// waist_y, amplitude of A exp(-((x-x0)^2/wx^2 + (y-y0)^2/wy^2)).
ModelSpec gaussian_2d(std::shared_ptr<const std::vector<double>> xs,
                      std::shared_ptr<const std::vector<double>> ys);

/// x = delay (ns); params g2_zero, gamma1 with splitters and delay fixed.
ModelSpec hom_cross(const SplitterPair& s, double dtau2_ns);

/// x = delay (ns); params g2_zero, gamma1, visibility, tau_c (ps).
ModelSpec hom_co(const SplitterPair& s, double dtau2_ns);

/// Joint co/cross model. x = index into `delays_ns`/`is_co`; params
/// g2_zero, gamma1, visibility, tau_c (ps).
ModelSpec hom_joint(const SplitterPair& s, double dtau2_ns,
                    std::shared_ptr<const std::vector<double>> delays_ns,
                    std::shared_ptr<const std::vector<bool>> is_co);

}  // namespace spsc::models
