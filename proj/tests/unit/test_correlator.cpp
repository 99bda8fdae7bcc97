#include <stdexcept>
#include <cmath>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "spsc/correlator.hpp"
#include "spsc/errors.hpp"

using namespace spsc;

namespace {

TagStream stream_of(std::vector<TimePs> t, TimePs duration, Channel ch = 0) {
  return TagStream::from_times(t, ch, duration);
}

std::vector<TimePs> poisson_times(std::mt19937_64& rng, double rate_cps, double duration_s) {
  std::exponential_distribution<double> gap(rate_cps);
  std::vector<TimePs> out;
  double t = gap(rng);
  while (t < duration_s) {
    out.push_back(static_cast<TimePs>(t * 1e12));
    t += gap(rng);
  }
  return out;
}

}  // namespace

TEST_CASE("single pair lands in its half-open bin") {
  const auto h = cross_correlate(stream_of({0}, 1000), stream_of({100}, 1000), 10, 1000);
  REQUIRE(h.bins() == 200);
  for (std::size_t k = 0; k < h.bins(); ++k) {
    CHECK(h.counts[k] == (h.bin_start_ps(k) == 100 ? 1u : 0u));
  }
  CHECK(h.total_pairs == 1);

  // a delay equal to -tau_max is inside, +tau_max is outside
  CHECK(cross_correlate(stream_of({1000}, 2000), stream_of({0}, 2000), 10, 1000).counts.front() == 1);
  CHECK(cross_correlate(stream_of({0}, 2000), stream_of({1000}, 2000), 10, 1000).total_pairs == 0);
}

TEST_CASE("matches all-pairs brute force on random streams") {
  std::mt19937_64 rng(42);
  for (int trial = 0; trial < 40; ++trial) {
    const TimePs span = 2'000'000;
    const auto a = oracle::random_times(rng, 1000, span);
    const auto b = oracle::random_times(rng, 1000, span);
    const TimePs bw = std::array<TimePs, 4>{1, 7, 100, 250}[trial % 4];
    const TimePs tau_max = bw * (20 + trial * 13);
    const auto h = cross_correlate(stream_of(a, span), stream_of(b, span), bw, tau_max);
    CHECK(h.counts == oracle::brute_force_counts(a, b, bw, tau_max));
  }
}

TEST_CASE("duplicate and clustered timestamps") {
  const std::vector<TimePs> a{5, 5, 5, 40, 40, 41};
  const std::vector<TimePs> b{0, 5, 5, 39, 40, 80};
  const auto h = cross_correlate(stream_of(a, 100), stream_of(b, 100), 3, 60);
  CHECK(h.counts == oracle::brute_force_counts(a, b, 3, 60));
}

TEST_CASE("thread count does not change the result") {
  std::mt19937_64 rng(7);
  const auto a = oracle::random_times(rng, 20000, 50'000'000);
  const auto b = oracle::random_times(rng, 20000, 50'000'000);
  const auto one = cross_correlate(stream_of(a, 50'000'000), stream_of(b, 50'000'000), 100, 20000, 1);
  for (unsigned threads : {2u, 3u, 8u}) {
    CHECK(cross_correlate(stream_of(a, 50'000'000), stream_of(b, 50'000'000), 100, 20000, threads) == one);
  }
}

TEST_CASE("auto-correlation excludes self pairs and is symmetric") {
  std::mt19937_64 rng(9);
  const TimePs bw = 1000;
  // distinct residues modulo the bin width keep every delay off a bin edge
  std::vector<TimePs> residues(bw);
  for (TimePs i = 0; i < bw; ++i) residues[static_cast<std::size_t>(i)] = i;
  std::shuffle(residues.begin(), residues.end(), rng);
  std::vector<TimePs> t;
  std::uniform_int_distribution<TimePs> block(0, 400);
  for (int i = 0; i < 500; ++i) t.push_back(block(rng) * bw + residues[static_cast<std::size_t>(i)]);
  std::sort(t.begin(), t.end());

  const auto h = auto_correlate(stream_of(t, 500'000), bw, 50 * bw);
  CHECK(h.counts == oracle::brute_force_counts(t, t, bw, 50 * bw, true));
  const std::size_t n = h.bins();
  for (std::size_t k = 0; k < n; ++k) CHECK(h.counts[k] == h.counts[n - 1 - k]);
}

TEST_CASE("chunked accumulation equals a single pass") {
  std::mt19937_64 rng(11);
  const TimePs span = 10'000'000, tau_max = 30'000, bw = 250;
  const auto a = oracle::random_times(rng, 3000, span);
  const auto b = oracle::random_times(rng, 3000, span);
  const auto full = cross_correlate(stream_of(a, span), stream_of(b, span), bw, tau_max);

  Histogram merged = Histogram::zeros(bw, tau_max);
  for (TimePs start = 0; start < span; start += 1'234'567) {
    const TimePs end = std::min(span, start + 1'234'567);
    std::vector<TimePs> a_chunk, b_margin;
    for (TimePs t : a) if (t >= start && t < end) a_chunk.push_back(t);
    for (TimePs t : b) if (t >= start - tau_max && t < end + tau_max) b_margin.push_back(t);
    Histogram part = Histogram::zeros(bw, tau_max);
    accumulate_pairs(a_chunk, b_margin, part);
    merged += part;
  }
  CHECK(merged == full);
}

TEST_CASE("input validation") {
  CHECK_THROWS_AS(Histogram::zeros(0, 100), std::invalid_argument);
  CHECK_THROWS_AS(Histogram::zeros(30, 100), std::invalid_argument);
  CHECK_THROWS_AS(Histogram::zeros(200, 100), std::invalid_argument);
  Histogram h = Histogram::zeros(10, 100);
  const std::vector<TimePs> unsorted{5, 3};
  const std::vector<TimePs> sorted{1, 2};
  CHECK_THROWS_AS(accumulate_pairs(unsorted, sorted, h), std::invalid_argument);
  CHECK_THROWS_AS(accumulate_pairs(sorted, unsorted, h), std::invalid_argument);
  CHECK_THROWS_AS(h.g2(0), std::logic_error);
  Histogram other = Histogram::zeros(20, 100);
  CHECK_THROWS_AS(h += other, std::invalid_argument);
}

TEST_CASE("normalization of independent Poisson streams") {
  std::mt19937_64 rng(13);
  const double rate = 1e5, duration = 10.0;
  const auto a = poisson_times(rng, rate, duration);
  const auto b = poisson_times(rng, rate, duration);
  const TimePs dur_ps = static_cast<TimePs>(duration * 1e12);
  const auto sa = stream_of(a, dur_ps), sb = stream_of(b, dur_ps);
  const auto h = normalize_g2(cross_correlate(sa, sb, 100, 100'000), sa, sb);
  REQUIRE(h.normalized());
  double mean = 0.0;
  for (double g : h.g2_values()) mean += g;
  mean /= static_cast<double>(h.bins());
  const double sigma_bin = 1.0 / std::sqrt(h.norm);
  CHECK(std::abs(mean - 1.0) < 3.0 * sigma_bin / std::sqrt(static_cast<double>(h.bins())));
}

TEST_CASE("normalizing an empty histogram") {
  const auto h = normalize_g2(Histogram::zeros(100, 1000), 1e3, 1e3, 1.0);
  for (double g : h.g2_values()) CHECK(g == 0.0);
  CHECK_THROWS_AS(normalize_g2(Histogram::zeros(100, 1000), 0.0, 1e3, 1.0), std::invalid_argument);
}

TEST_CASE("count rate") {
  CHECK(count_rate(TagStream({}, 1'000'000'000'000)) == 0.0);
  std::vector<TimePs> t(1'000'000);
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = static_cast<TimePs>(i) * 2'000'000;
  CHECK(count_rate(stream_of(t, 2'000'000'000'000)) == doctest::Approx(5e5).epsilon(1e-15));
  CHECK_THROWS_AS(count_rate(TagStream({}, 0)), std::invalid_argument);
}

namespace {

// Pulsed histogram with one rectangular peak of `area` counts per period.
Histogram pulsed_histogram(double period_ns, const std::vector<std::uint64_t>& areas, int n_side) {
  const TimePs bw = 100;
  const auto period = static_cast<TimePs>(period_ns * 1000);
  Histogram h = Histogram::zeros(bw, period * (n_side + 1));
  for (int m = -n_side; m <= n_side; ++m) {
    const std::uint64_t area = areas[static_cast<std::size_t>(m + n_side)];
    // spread over 10 bins centred on m * period
    for (int j = 0; j < 10; ++j) {
      const TimePs t = m * period - 500 + j * bw;
      const auto k = static_cast<std::size_t>((t + h.tau_max_ps) / bw);
      h.counts[k] += area / 10 + (static_cast<std::uint64_t>(j) < area % 10 ? 1 : 0);
    }
  }
  h.norm = 1.0;
  return h;
}

}  // namespace

TEST_CASE("pulsed g2(0) from peak areas") {
  const double period = 25.0;
  auto r = pulsed_g2_zero(pulsed_histogram(period, {1000, 1000, 135, 1000, 1000}, 2), period, 12.5, 2);
  CHECK(r.g2_zero == doctest::Approx(0.135).epsilon(1e-12));
  CHECK(r.central_area == 135.0);
  CHECK(r.side_mean == 1000.0);
  const double expected_sigma = 0.135 * std::sqrt(1.0 / 135.0 + 1.0 / 4000.0);
  CHECK(r.uncertainty == doctest::Approx(expected_sigma).epsilon(1e-9));

  CHECK(pulsed_g2_zero(pulsed_histogram(period, {700, 700, 0, 700, 700}, 2), period, 12.5, 2).g2_zero == 0.0);
  CHECK(pulsed_g2_zero(pulsed_histogram(period, {700, 700, 700, 700, 700}, 2), period, 12.5, 2).g2_zero ==
        doctest::Approx(1.0).epsilon(1e-15));
  CHECK_THROWS_AS(pulsed_g2_zero(pulsed_histogram(period, {700, 0, 10, 700, 700}, 2), period, 12.5, 2),
                  ComputationError);
  CHECK_THROWS_AS(pulsed_g2_zero(pulsed_histogram(period, {700, 700, 10, 700, 700}, 2), period, 12.5, 3),
                  std::invalid_argument);
  CHECK_THROWS_AS(pulsed_g2_zero(pulsed_histogram(period, {700, 700, 10, 700, 700}, 2), period, 30.0, 1),
                  std::invalid_argument);
}
