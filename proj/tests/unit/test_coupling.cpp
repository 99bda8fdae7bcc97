#include <stdexcept>
#include <cmath>
#include <complex>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "spsc/coupling.hpp"

using namespace spsc;

namespace {

// 128^2 grid spanning +-4 of the larger waist.
FieldMap grid_gaussian(double w, double span_waist, std::size_t n = 128, double cx = 0.0) {
  const double d = 2.0 * 4.0 * span_waist / static_cast<double>(n);
  return FieldMap::gaussian(n, n, d, d, w, w, cx, 0.0);
}

}  // namespace

TEST_CASE("overlap of identical fields is one") {
  const auto e = grid_gaussian(1.3, 1.3);
  CHECK(std::abs(overlap_efficiency(e, e) - 1.0) < 1e-12);
  FieldMap odd = e;
  std::mt19937_64 rng(1);
  std::normal_distribution<double> n01;
  for (auto& a : odd.amplitude) a = {n01(rng), n01(rng)};
  CHECK(std::abs(overlap_efficiency(odd, odd) - 1.0) < 1e-12);
}

TEST_CASE("Gaussian overlap against the closed form") {
  CHECK(gaussian_overlap_closed_form(1.0, 2.0) == doctest::Approx(0.64).epsilon(1e-15));
  CHECK(oracle::gaussian_overlap_brute(1.0, 2.0, 10.0, 1200) == doctest::Approx(0.64).epsilon(1e-6));
  const double eta = overlap_efficiency(grid_gaussian(1.0, 2.0), grid_gaussian(2.0, 2.0));
  CHECK(std::abs(eta - 0.64) < 1e-4);
  for (double w2 : {0.7, 1.5, 3.0}) {
    const double span = std::max(1.0, w2);
    CHECK(std::abs(overlap_efficiency(grid_gaussian(1.0, span), grid_gaussian(w2, span)) -
                   gaussian_overlap_closed_form(1.0, w2)) < 1e-4);
  }
}

TEST_CASE("grid refinement barely moves the overlap") {
  const double coarse = overlap_efficiency(grid_gaussian(1.0, 2.0, 128), grid_gaussian(2.0, 2.0, 128));
  const double fine = overlap_efficiency(grid_gaussian(1.0, 2.0, 256), grid_gaussian(2.0, 2.0, 256));
  CHECK(std::abs(coarse - fine) < 1e-4);
}

TEST_CASE("displaced fields do not overlap") {
  const double d = 0.1;
  const auto e1 = FieldMap::gaussian(400, 64, d, d, 1.0, 1.0, -12.0, 0.0);
  const auto e2 = FieldMap::gaussian(400, 64, d, d, 1.0, 1.0, 12.0, 0.0);
  CHECK(overlap_efficiency(e1, e2) < 1e-6);
}

TEST_CASE("overlap is bounded, symmetric and scale invariant") {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> n01;
  for (int trial = 0; trial < 50; ++trial) {
    FieldMap a = FieldMap::gaussian(16, 12, 0.3, 0.4, 1.0, 1.0);
    FieldMap b = a;
    for (auto& v : a.amplitude) v = {n01(rng), n01(rng)};
    for (auto& v : b.amplitude) v = {n01(rng), n01(rng)};
    const double eta = overlap_efficiency(a, b);
    CHECK(eta >= 0.0);
    CHECK(eta <= 1.0);
    CHECK(std::abs(overlap_efficiency(b, a) - eta) < 1e-12);
    FieldMap scaled = b;
    for (auto& v : scaled.amplitude) v *= std::complex<double>(-2.5, 0.7);
    CHECK(std::abs(overlap_efficiency(a, scaled) - eta) < 1e-12);
  }
}

TEST_CASE("overlap input errors") {
  const auto a = FieldMap::gaussian(8, 8, 0.5, 0.5, 1.0, 1.0);
  const auto b = FieldMap::gaussian(8, 9, 0.5, 0.5, 1.0, 1.0);
  CHECK_THROWS_AS(overlap_efficiency(a, b), std::invalid_argument);
  FieldMap zero = a;
  for (auto& v : zero.amplitude) v = 0.0;
  CHECK_THROWS_AS(overlap_efficiency(a, zero), std::invalid_argument);
}

TEST_CASE("2D Gaussian fit") {
  SUBCASE("noiseless recovery") {
    const auto f = FieldMap::gaussian(48, 40, 0.125, 0.15, 1.1, 0.8, 0.3, -0.2, 2.5);
    const auto r = fit_gaussian_2d(f);
    CHECK(std::abs(r.center_x_um - 0.3) < 1e-8);
    CHECK(std::abs(r.center_y_um + 0.2) < 1e-8);
    CHECK(std::abs(r.waist_x_um - 1.1) < 1e-8);
    CHECK(std::abs(r.waist_y_um - 0.8) < 1e-8);
    CHECK(std::abs(r.amplitude - 2.5) < 1e-8);
  }
  SUBCASE("2% noise within 3 sigma") {
    std::mt19937_64 rng(3);
    std::normal_distribution<double> n01;
    auto f = FieldMap::gaussian(40, 40, 0.15, 0.15, 1.2, 1.0, 0.1, 0.05, 1.0);
    for (auto& v : f.amplitude) v += 0.02 * n01(rng);
    const auto r = fit_gaussian_2d(f);
    CHECK(std::abs(r.center_x_um - 0.1) < 3 * r.fit.error("center_x"));
    CHECK(std::abs(r.center_y_um - 0.05) < 3 * r.fit.error("center_y"));
    CHECK(std::abs(r.waist_x_um - 1.2) < 3 * r.fit.error("waist_x"));
    CHECK(std::abs(r.waist_y_um - 1.0) < 3 * r.fit.error("waist_y"));
  }
  SUBCASE("symmetric input gives equal waists") {
    const auto f = FieldMap::gaussian(32, 32, 0.2, 0.2, 1.4, 1.4);
    const auto r = fit_gaussian_2d(f);
    CHECK(std::abs(r.waist_x_um - r.waist_y_um) < 1e-9);
  }
}

TEST_CASE("reflectance coupling") {
  CHECK(reflectance_coupling({1.0, 0.350675, 0.83}) == doctest::Approx(0.65).epsilon(1e-12));
  CHECK(reflectance_coupling({2.0, 1.66, 0.83}) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(reflectance_coupling({1.0, 0.0, 0.83}) == 0.0);
  CHECK_THROWS_AS(reflectance_coupling({1.0, 0.9, 0.83}), std::invalid_argument);
  CHECK_THROWS_AS(reflectance_coupling({0.0, 0.0, 0.83}), std::invalid_argument);
}

TEST_CASE("photon budget") {
  const auto chain = EfficiencyChain::standard({0.6, 0.526, 0.44, 0.82, 0.8});
  const auto b = efficiency_chain(452000.0, 40e6, chain);
  CHECK(std::abs(100 * b.end_to_end - 1.13) < 0.01);
  CHECK(std::abs(100 * b.b_fib - 3.58) < 0.01);
  CHECK(std::abs(100 * b.b_source - 12.41) < 0.01);
  CHECK(b.b_source == doctest::Approx(0.0113 / (0.6 * 0.526 * 0.44 * 0.82 * 0.8)).epsilon(1e-12));

  const auto unity = EfficiencyChain::standard({1, 1, 1, 1, 1});
  const auto u = efficiency_chain(1234.0, 40e6, unity);
  CHECK(u.b_source == u.end_to_end);
  const auto full = efficiency_chain(40e6, 40e6, unity);
  CHECK(full.end_to_end == 1.0);
  CHECK(full.b_fib == 1.0);
  CHECK(full.b_source == 1.0);

  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> t(0.01, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    const auto c = EfficiencyChain::standard({t(rng), t(rng), t(rng), t(rng), t(rng), t(rng)});
    const auto r = efficiency_chain(1e5, 4e7, c);
    CHECK(r.b_source >= r.b_fib);
    CHECK(r.b_fib >= r.end_to_end);
  }

  CHECK_THROWS_AS(efficiency_chain(1e5, 0.0, chain), std::invalid_argument);
  EfficiencyChain missing{{{"fiber", 0.6}, {"detector", 0.8}}};
  CHECK_THROWS_AS(efficiency_chain(1e5, 4e7, missing), std::invalid_argument);
  CHECK(chain.find("stage_5") == nullptr);
  CHECK(EfficiencyChain::standard({1, 1, 1, 1, 1, 0.5}).find("stage_5")->transmission == 0.5);
}
