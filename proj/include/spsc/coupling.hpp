#pragma once

#include <complex>
#include <string>
#include <vector>

#include "spsc/fitter.hpp"

namespace spsc {

/// Sampled scalar field on a regular grid, stored row-major (x fastest).
/// Sample (i, j) sits at x = (i - (nx-1)/2) dx, y = (j - (ny-1)/2) dy, so
/// the grid is centred on the origin. Lengths are in micrometres.
struct FieldMap {
  std::size_t nx = 0;
  std::size_t ny = 0;
  double dx_um = 1.0;
  double dy_um = 1.0;
  std::vector<std::complex<double>> amplitude;

  double x(std::size_t i) const { return (static_cast<double>(i) - 0.5 * static_cast<double>(nx - 1)) * dx_um; }
  double y(std::size_t j) const { return (static_cast<double>(j) - 0.5 * static_cast<double>(ny - 1)) * dy_um; }
  const std::complex<double>& at(std::size_t i, std::size_t j) const { return amplitude[j * nx + i]; }

  bool same_grid(const FieldMap& other) const;
  /// Throws std::invalid_argument unless nx, ny >= 2, dx, dy > 0, the sample
  /// count matches and some amplitude is nonzero.
  void validate() const;

  /// amplitude * exp(-((x-cx)^2/wx^2 + (y-cy)^2/wy^2)); waists are 1/e
  /// field radii.
  static FieldMap gaussian(std::size_t nx, std::size_t ny, double dx_um, double dy_um, double waist_x_um,
                           double waist_y_um, double center_x_um = 0.0, double center_y_um = 0.0,
                           double amplitude = 1.0);

  friend bool operator==(const FieldMap&, const FieldMap&) = default;
};

/// Normalized mode overlap |sum e1 conj(e2) dA|^2 / (sum |e1|^2 dA sum |e2|^2 dA).
/// Throws std::invalid_argument on differing grids or an all-zero field.
double overlap_efficiency(const FieldMap& e1, const FieldMap& e2);

/// Closed-form overlap of two concentric circular Gaussians with 1/e field
/// radii w1, w2: (2 w1 w2 / (w1^2 + w2^2))^2.
double gaussian_overlap_closed_form(double w1_um, double w2_um);

struct Gaussian2DFit {
  double center_x_um = 0.0;
  double center_y_um = 0.0;
  double waist_x_um = 0.0;
  double waist_y_um = 0.0;
  double amplitude = 0.0;
  FitResult fit;
};

/// Least-squares fit of |E| to A exp(-((x-x0)^2/wx^2 + (y-y0)^2/wy^2)).
Gaussian2DFit fit_gaussian_2d(const FieldMap& field);

/// Back-reflection measurement through a splitter of transmission t_bs.
struct ReflectanceMeasurement {
  double p_in_mw = 1.0;
  double p_out_mw = 0.0;
  double t_bs = 1.0;
};

/// Single-pass coupling sqrt(p_out / (t_bs p_in)), assuming equal in- and
/// out-coupling. Throws std::invalid_argument if p_out exceeds t_bs p_in.
double reflectance_coupling(const ReflectanceMeasurement& m);

struct EfficiencyStage {
  std::string name;
  double transmission = 1.0;
};

/// Transmission stages from source to detector. The photon budget needs
/// stages named "fiber" and "spectral_filter".
struct EfficiencyChain {
  std::vector<EfficiencyStage> stages;

  /// Stages named fiber, spectral_filter, beam_splitter, fiber_cable,
  /// detector in that order; extra values become stage_5, stage_6, ...
  static EfficiencyChain standard(const std::vector<double>& transmissions);
  void validate() const;
  const EfficiencyStage* find(const std::string& name) const;
  double product() const;
};

/// All values are fractions (multiply by 100 for percent).
struct PhotonBudget {
  double end_to_end = 0.0;  ///< detected rate per excitation pulse
  double b_fib = 0.0;       ///< end_to_end / (fiber * spectral_filter)
  double b_source = 0.0;    ///< end_to_end / product of all stages
};

PhotonBudget efficiency_chain(double i_sat_cps, double rep_rate_hz, const EfficiencyChain& chain);

}  // namespace spsc
