#include "spsc/coupling.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <stdexcept>

#include "spsc/fit_models.hpp"

namespace spsc {

bool FieldMap::same_grid(const FieldMap& other) const {
  return nx == other.nx && ny == other.ny && dx_um == other.dx_um && dy_um == other.dy_um;
}

void FieldMap::validate() const {
  if (nx < 2 || ny < 2) throw std::invalid_argument("field map: need at least 2x2 samples");
  if (!(dx_um > 0.0) || !(dy_um > 0.0)) throw std::invalid_argument("field map: pitch must be positive");
  if (amplitude.size() != nx * ny) throw std::invalid_argument("field map: sample count does not match nx*ny");
  if (std::all_of(amplitude.begin(), amplitude.end(), [](const auto& a) { return a == 0.0; })) {
    throw std::invalid_argument("field map: all amplitudes are zero");
  }
}

FieldMap FieldMap::gaussian(std::size_t nx, std::size_t ny, double dx_um, double dy_um, double waist_x_um,
                            double waist_y_um, double center_x_um, double center_y_um, double amplitude) {
  FieldMap f;
  f.nx = nx;
  f.ny = ny;
  f.dx_um = dx_um;
  f.dy_um = dy_um;
  f.amplitude.resize(nx * ny);
  for (std::size_t j = 0; j < ny; ++j) {
    const double v = (f.y(j) - center_y_um) / waist_y_um;
    for (std::size_t i = 0; i < nx; ++i) {
      const double u = (f.x(i) - center_x_um) / waist_x_um;
      f.amplitude[j * nx + i] = amplitude * std::exp(-(u * u + v * v));
    }
  }
  return f;
}

double overlap_efficiency(const FieldMap& e1, const FieldMap& e2) {
  e1.validate();
  e2.validate();
  if (!e1.same_grid(e2)) throw std::invalid_argument("overlap_efficiency: field grids differ");
  const double da = e1.dx_um * e1.dy_um;
  std::complex<double> inner = 0.0;
  double n1 = 0.0;
  double n2 = 0.0;
  for (std::size_t k = 0; k < e1.amplitude.size(); ++k) {
    inner += e1.amplitude[k] * std::conj(e2.amplitude[k]);
    n1 += std::norm(e1.amplitude[k]);
    n2 += std::norm(e2.amplitude[k]);
  }
  const double eta = std::norm(inner * da) / (n1 * da * n2 * da);
  // Cauchy-Schwarz bounds eta by 1; rounding may overshoot in the last ulp.
  return std::min(eta, 1.0);
}

double gaussian_overlap_closed_form(double w1_um, double w2_um) {
  const double r = 2.0 * w1_um * w2_um / (w1_um * w1_um + w2_um * w2_um);
  return r * r;
}

Gaussian2DFit fit_gaussian_2d(const FieldMap& field) {
  field.validate();
  const std::size_t n = field.nx * field.ny;
  auto xs = std::make_shared<std::vector<double>>(n);
  auto ys = std::make_shared<std::vector<double>>(n);
  std::vector<double> index(n);
  std::vector<double> mag(n);
  double peak = 0.0;
  double total = 0.0;
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t j = 0; j < field.ny; ++j) {
    for (std::size_t i = 0; i < field.nx; ++i) {
      const std::size_t k = j * field.nx + i;
      (*xs)[k] = field.x(i);
      (*ys)[k] = field.y(j);
      index[k] = static_cast<double>(k);
      mag[k] = std::abs(field.amplitude[k]);
      const double w = mag[k] * mag[k];
      peak = std::max(peak, mag[k]);
      total += w;
      mx += w * (*xs)[k];
      my += w * (*ys)[k];
    }
  }
  mx /= total;
  my /= total;
  double vx = 0.0;
  double vy = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double w = mag[k] * mag[k];
    vx += w * ((*xs)[k] - mx) * ((*xs)[k] - mx);
    vy += w * ((*ys)[k] - my) * ((*ys)[k] - my);
  }
  // |E|^2 of exp(-x^2/w^2) has variance w^2 / 4.
  const double wx = std::max(2.0 * std::sqrt(vx / total), field.dx_um);
  const double wy = std::max(2.0 * std::sqrt(vy / total), field.dy_um);

  const std::vector<double> weights(n, 1.0);
  const std::vector<double> init{mx, my, wx, wy, peak};
  Gaussian2DFit out;
  out.fit = fit_nlls(models::gaussian_2d(xs, ys), index, mag, weights, init);
  out.center_x_um = out.fit.params[0];
  out.center_y_um = out.fit.params[1];
  out.waist_x_um = out.fit.params[2];
  out.waist_y_um = out.fit.params[3];
  out.amplitude = out.fit.params[4];
  return out;
}

double reflectance_coupling(const ReflectanceMeasurement& m) {
  if (!(m.p_in_mw > 0.0) || !(m.t_bs > 0.0) || !(m.p_out_mw >= 0.0)) {
    throw std::invalid_argument("reflectance_coupling: powers and transmission must be positive");
  }
  const double ratio = m.p_out_mw / (m.t_bs * m.p_in_mw);
  if (ratio > 1.0) throw std::invalid_argument("reflectance_coupling: reflected power exceeds t_bs * p_in");
  return std::sqrt(ratio);
}

EfficiencyChain EfficiencyChain::standard(const std::vector<double>& transmissions) {
  static const char* const kNames[] = {"fiber", "spectral_filter", "beam_splitter", "fiber_cable", "detector"};
  EfficiencyChain chain;
  for (std::size_t i = 0; i < transmissions.size(); ++i) {
    chain.stages.push_back({i < std::size(kNames) ? kNames[i] : "stage_" + std::to_string(i), transmissions[i]});
  }
  return chain;
}

void EfficiencyChain::validate() const {
  for (const auto& s : stages) {
    if (!(s.transmission > 0.0 && s.transmission <= 1.0)) {
      throw std::invalid_argument("efficiency chain: stage " + s.name + " transmission must lie in (0, 1]");
    }
  }
}

const EfficiencyStage* EfficiencyChain::find(const std::string& name) const {
  const auto it = std::find_if(stages.begin(), stages.end(), [&](const auto& s) { return s.name == name; });
  return it == stages.end() ? nullptr : &*it;
}

double EfficiencyChain::product() const {
  double p = 1.0;
  for (const auto& s : stages) p *= s.transmission;
  return p;
}

PhotonBudget efficiency_chain(double i_sat_cps, double rep_rate_hz, const EfficiencyChain& chain) {
  chain.validate();
  if (!(rep_rate_hz > 0.0)) throw std::invalid_argument("efficiency_chain: repetition rate must be positive");
  const EfficiencyStage* fiber = chain.find("fiber");
  const EfficiencyStage* filter = chain.find("spectral_filter");
  if (fiber == nullptr || filter == nullptr) {
    throw std::invalid_argument("efficiency_chain: stages 'fiber' and 'spectral_filter' are required");
  }
  PhotonBudget b;
  b.end_to_end = i_sat_cps / rep_rate_hz;
  b.b_fib = b.end_to_end / (fiber->transmission * filter->transmission);
  b.b_source = b.end_to_end / chain.product();
  return b;
}

}  // namespace spsc
