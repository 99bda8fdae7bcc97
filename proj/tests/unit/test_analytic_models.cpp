#include <stdexcept>
#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "spsc/analytic_models.hpp"

using namespace spsc;

TEST_CASE("g2 two-level values") {
  CHECK(eval_g2_two_level(0.0, {0.015, 0.8}) == doctest::Approx(0.015).epsilon(1e-15));
  CHECK(eval_g2_two_level(1e6, {0.2, 0.8}) == 1.0);
  CHECK(eval_g2_two_level(-1e6, {0.2, 0.8}) == 1.0);
  CHECK(eval_g2_two_level(std::log(2.0), {0.0, 1.0}) == doctest::Approx(0.5).epsilon(1e-14));
}

TEST_CASE("g2 two-level is even and nondecreasing in |tau|") {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> g0(0.0, 0.999), gam(0.01, 5.0), tau(0.0, 20.0);
  for (int trial = 0; trial < 500; ++trial) {
    const G2TwoLevelParams p{g0(rng), gam(rng)};
    const double t1 = tau(rng);
    const double t2 = t1 + tau(rng);
    CHECK(eval_g2_two_level(t1, p) == eval_g2_two_level(-t1, p));
    CHECK(eval_g2_two_level(t2, p) >= eval_g2_two_level(t1, p));
  }
}

TEST_CASE("gamma1 from power") {
  CHECK(eval_gamma1(0.0, {1.87, 0.3}) == doctest::Approx(0.53476).epsilon(1e-5));
  CHECK(eval_gamma1(0.0, {1.0, 0.0}) == 1.0);
  CHECK(eval_gamma1(2.0, {2.0, 0.5}) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK_THROWS_AS((PowerDecayParams{0.0, 0.1}.validate()), std::invalid_argument);
}

TEST_CASE("saturation curve") {
  CHECK(eval_saturation(0.0, {12.0, 1000.0, 1.19}) == 12.0);
  CHECK(eval_saturation(1.19, {0.0, 1000.0, 1.19}) == doctest::Approx(632.1205588).epsilon(1e-9));
  const double high = eval_saturation(11.9, {0.0, 575000.0, 1.19});
  CHECK(std::abs(high - 575000.0) / 575000.0 < 5e-5);
  CHECK(high == doctest::Approx(574974).epsilon(1e-6));

  const SaturationParams p{30.0, 5000.0, 2.0};
  double prev = eval_saturation(0.0, p);
  for (double P = 0.05; P < 20.0; P += 0.05) {
    const double v = eval_saturation(P, p);
    CHECK(v >= prev);
    prev = v;
  }
  CHECK(std::abs(eval_saturation(50.0 * p.p_sat, p) - (p.i0 + p.i_sat)) / (p.i0 + p.i_sat) < 1e-12);
}

TEST_CASE("corrected count rate") {
  CHECK(corrected_rate(1234.5, 0.0) == 1234.5);
  CHECK(corrected_rate(100.0, 0.19) == doctest::Approx(90.0).epsilon(1e-14));
  CHECK(corrected_rate(1000.0, 1.0) == 0.0);
  for (double g = 0.01; g <= 1.0; g += 0.01) CHECK(corrected_rate(500.0, g) < 500.0);
  CHECK_THROWS_AS(corrected_rate(100.0, -0.1), std::invalid_argument);
  CHECK_THROWS_AS(corrected_rate(100.0, 1.1), std::invalid_argument);
}

TEST_CASE("lorentzian line shape") {
  const LorentzianParams p{1554.05, 0.067, 800.0, 20.0};
  CHECK(eval_lorentzian(p.center, p) == doctest::Approx(820.0).epsilon(1e-14));
  CHECK(eval_lorentzian(p.center + p.fwhm / 2, p) == doctest::Approx(420.0).epsilon(1e-12));
  CHECK(eval_lorentzian(p.center - p.fwhm / 2, p) == doctest::Approx(420.0).epsilon(1e-12));
  CHECK(eval_lorentzian(1554.0835, p) == doctest::Approx(420.0).epsilon(1e-9));
  // one full width from the centre the line is at a fifth of its height
  CHECK(eval_lorentzian(1554.117, p) == doctest::Approx(180.0).epsilon(1e-9));
}

TEST_CASE("lorentzian area") {
  const LorentzianParams p{1554.05, 0.067, 800.0, 20.0};
  const double half_span = 50.0 * p.fwhm;
  const double integral = oracle::simpson([&](double x) { return eval_lorentzian(x, p); }, p.center - half_span,
                                          p.center + half_span, 200000);
  // truncated antiderivative: 2 A (w/2) atan(L / (w/2))
  const double truncated = p.amplitude * p.fwhm * std::atan(half_span / (0.5 * p.fwhm)) + p.offset * 2 * half_span;
  CHECK(std::abs(integral - truncated) / truncated < 1e-9);
  // the untruncated peak area differs only by the tail mass beyond +-50 widths
  const double full = p.amplitude * std::numbers::pi * p.fwhm / 2.0 + p.offset * 2 * half_span;
  const double tail = p.amplitude * p.fwhm * (std::numbers::pi / 2 - std::atan(100.0));
  CHECK(std::abs(integral + tail - full) / full < 1e-9);
}
