#pragma once

// One representative configuration of every fit model, shared by the fitter
// unit tests and the acceptance run.

#include <algorithm>
#include <memory>
#include <random>
#include <vector>

#include "spsc/fit_models.hpp"
#include "spsc/fitter.hpp"
#include "spsc/hom_models.hpp"

namespace model_cases {

using spsc::ModelSpec;
using spsc::SplitterPair;
namespace models = spsc::models;

struct Case {
  ModelSpec model;
  std::vector<double> typical;
  std::vector<double> xs;
  std::vector<double> spread = {};  ///< relative jitter per parameter, 0.5 when empty
};

// Random point strictly inside the bounds, jittered around typical values.
inline std::vector<double> interior_point(const Case& c, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> p(c.model.size());
  for (std::size_t j = 0; j < p.size(); ++j) {
    const double spread = c.spread.empty() ? 0.5 : c.spread[j];
    p[j] = std::clamp(c.typical[j] * (1.0 + spread * u(rng)), c.model.lower[j] + 1e-6, c.model.upper[j] - 1e-6);
  }
  return p;
}

inline std::vector<Case> all_models() {
  std::vector<double> delays;
  for (double t = -12.0; t <= 12.0; t += 0.173) delays.push_back(t);
  auto gx = std::make_shared<std::vector<double>>();
  auto gy = std::make_shared<std::vector<double>>();
  std::vector<double> gidx;
  for (int j = 0; j < 12; ++j) {
    for (int i = 0; i < 12; ++i) {
      gx->push_back(-3.0 + 0.5 * i);
      gy->push_back(-3.0 + 0.5 * j);
      gidx.push_back(static_cast<double>(gidx.size()));
    }
  }
  auto jd = std::make_shared<std::vector<double>>();
  auto jc = std::make_shared<std::vector<bool>>();
  std::vector<double> jidx;
  for (int pass = 0; pass < 2; ++pass) {
    for (double t : delays) {
      jd->push_back(t);
      jc->push_back(pass == 0);
      jidx.push_back(static_cast<double>(jidx.size()));
    }
  }
  std::vector<double> powers, lines;
  for (double p = 0.05; p < 8.0; p += 0.31) powers.push_back(p);
  for (double l = 1553.8; l < 1554.3; l += 0.0071) lines.push_back(l);
  const auto s = SplitterPair::from_transmissions(0.45, 0.55);
  return {
      {models::g2_two_level(), {0.1, 0.7}, delays},
      {models::saturation(), {20.0, 5e5, 1.3}, powers},
      {models::linear(), {0.5, 0.1}, powers},
      {models::lorentzian(), {1554.05, 0.067, 800.0, 20.0}, lines, {2e-5, 0.5, 0.5, 0.5}},
      {models::gaussian_2d(gx, gy), {0.2, -0.1, 1.5, 1.1, 3.0}, gidx},
      {models::hom_cross(s, 4.36), {0.1, 0.6}, delays},
      {models::hom_co(s, 4.36), {0.1, 0.6, 0.7, 450.0}, delays},
      {models::hom_joint(s, 4.36, jd, jc), {0.1, 0.6, 0.7, 450.0}, jidx},
  };
}

}  // namespace model_cases
