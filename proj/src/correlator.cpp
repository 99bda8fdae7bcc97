#include "spsc/correlator.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "parallel.hpp"
#include "spsc/errors.hpp"

namespace spsc {

Histogram Histogram::zeros(TimePs bin_width_ps, TimePs tau_max_ps) {
  if (bin_width_ps <= 0 || bin_width_ps > tau_max_ps) {
    throw std::invalid_argument("histogram: need 0 < bin_width <= tau_max");
  }
  if (tau_max_ps % bin_width_ps != 0) {
    throw std::invalid_argument("histogram: tau_max must be a multiple of bin_width");
  }
  Histogram h;
  h.bin_width_ps = bin_width_ps;
  h.tau_max_ps = tau_max_ps;
  h.counts.assign(static_cast<std::size_t>(2 * tau_max_ps / bin_width_ps), 0);
  return h;
}

double Histogram::bin_center_ns(std::size_t k) const {
  return (static_cast<double>(bin_start_ps(k)) + 0.5 * static_cast<double>(bin_width_ps)) / kPsPerNs;
}

double Histogram::g2(std::size_t k) const {
  if (!normalized()) throw std::logic_error("histogram is not normalized");
  return static_cast<double>(counts[k]) / norm;
}

std::vector<double> Histogram::g2_values() const {
  std::vector<double> out(bins());
  for (std::size_t k = 0; k < bins(); ++k) out[k] = g2(k);
  return out;
}

std::vector<double> Histogram::bin_centers_ns() const {
  std::vector<double> out(bins());
  for (std::size_t k = 0; k < bins(); ++k) out[k] = bin_center_ns(k);
  return out;
}

bool Histogram::same_binning(const Histogram& other) const {
  return bin_width_ps == other.bin_width_ps && tau_max_ps == other.tau_max_ps &&
         counts.size() == other.counts.size();
}

Histogram& Histogram::operator+=(const Histogram& other) {
  if (!same_binning(other)) throw std::invalid_argument("histogram merge: binning differs");
  for (std::size_t k = 0; k < counts.size(); ++k) counts[k] += other.counts[k];
  total_pairs += other.total_pairs;
  return *this;
}

namespace {

void require_sorted(std::span<const TimePs> v) {
  if (!std::is_sorted(v.begin(), v.end())) {
    throw std::invalid_argument("correlator: input stream is not time-sorted");
  }
}

// Sweep over a[a_begin, a_end) against all of b. When `skip_self` is set,
// a and b are the same array and index pairs (i, i) are excluded.
void sweep(std::span<const TimePs> a, std::size_t a_begin, std::size_t a_end,
           std::span<const TimePs> b, bool skip_self, Histogram& h) {
  if (a_begin >= a_end || b.empty()) return;
  const TimePs tau_max = h.tau_max_ps;
  const TimePs width = h.bin_width_ps;
  std::uint64_t* counts = h.counts.data();
  std::uint64_t pairs = 0;
  // First b with t_b - t_a >= -tau_max for a[a_begin].
  std::size_t lo = static_cast<std::size_t>(
      std::lower_bound(b.begin(), b.end(), a[a_begin] - tau_max) - b.begin());
  const std::size_t nb = b.size();
  for (std::size_t i = a_begin; i < a_end; ++i) {
    const TimePs ta = a[i];
    while (lo < nb && b[lo] < ta - tau_max) ++lo;
    const TimePs upper = ta + tau_max;
    for (std::size_t j = lo; j < nb && b[j] < upper; ++j) {
      if (skip_self && j == i) continue;
      ++counts[static_cast<std::size_t>((b[j] - ta + tau_max) / width)];
      ++pairs;
    }
  }
  h.total_pairs += pairs;
}

Histogram correlate_spans(std::span<const TimePs> a, std::span<const TimePs> b, bool skip_self,
                          TimePs bin_width_ps, TimePs tau_max_ps, unsigned threads) {
  Histogram total = Histogram::zeros(bin_width_ps, tau_max_ps);
  std::vector<Histogram> parts(std::max<unsigned>(threads, 1), total);
  detail::parallel_chunks(a.size(), threads, [&](std::size_t c, std::size_t begin, std::size_t end) {
    sweep(a, begin, end, b, skip_self, parts[c]);
  });
  for (const auto& p : parts) total += p;
  return total;
}

}  // namespace

void accumulate_pairs(std::span<const TimePs> a, std::span<const TimePs> b, Histogram& h) {
  require_sorted(a);
  require_sorted(b);
  sweep(a, 0, a.size(), b, false, h);
}

Histogram cross_correlate(const TagStream& a, const TagStream& b, TimePs bin_width_ps,
                          TimePs tau_max_ps, unsigned threads) {
  const auto ta = a.times();
  const auto tb = b.times();
  return correlate_spans(ta, tb, false, bin_width_ps, tau_max_ps, threads);
}

Histogram auto_correlate(const TagStream& s, TimePs bin_width_ps, TimePs tau_max_ps, unsigned threads) {
  const auto t = s.times();
  return correlate_spans(t, t, true, bin_width_ps, tau_max_ps, threads);
}

Histogram normalize_g2(Histogram h, double rate_a_cps, double rate_b_cps, double duration_s) {
  if (!(rate_a_cps > 0.0) || !(rate_b_cps > 0.0) || !(duration_s > 0.0)) {
    throw std::invalid_argument("normalize_g2: rates and duration must be positive");
  }
  const double width_s = static_cast<double>(h.bin_width_ps) / kPsPerSecond;
  h.norm = rate_a_cps * rate_b_cps * width_s * duration_s;
  return h;
}

Histogram normalize_g2(Histogram h, const TagStream& a, const TagStream& b) {
  return normalize_g2(std::move(h), count_rate(a), count_rate(b), a.duration_s());
}

std::uint64_t window_area(const Histogram& h, double center_ns, double window_ns) {
  const double lo = center_ns - 0.5 * window_ns;
  const double hi = center_ns + 0.5 * window_ns;
  std::uint64_t area = 0;
  for (std::size_t k = 0; k < h.bins(); ++k) {
    const double c = h.bin_center_ns(k);
    if (c >= lo && c < hi) area += h.counts[k];
  }
  return area;
}

PulsedG2 pulsed_g2_zero(const Histogram& h, double rep_period_ns, double window_ns, int n_side_peaks) {
  if (!(rep_period_ns > 0.0) || !(window_ns > 0.0) || !(window_ns < rep_period_ns)) {
    throw std::invalid_argument("pulsed_g2_zero: need 0 < window < rep_period");
  }
  if (n_side_peaks < 1) throw std::invalid_argument("pulsed_g2_zero: need at least one side peak");
  const double reach_ns = n_side_peaks * rep_period_ns + 0.5 * window_ns;
  if (reach_ns > static_cast<double>(h.tau_max_ps) / kPsPerNs) {
    throw std::invalid_argument("pulsed_g2_zero: histogram does not span the requested side peaks");
  }
  double side_total = 0.0;
  for (int k = 1; k <= n_side_peaks; ++k) {
    for (int sign : {-1, 1}) {
      const auto area = window_area(h, sign * k * rep_period_ns, window_ns);
      if (area == 0) throw ComputationError("pulsed_g2_zero: empty side-peak window");
      side_total += static_cast<double>(area);
    }
  }
  const double n_windows = 2.0 * n_side_peaks;
  PulsedG2 r;
  r.central_area = static_cast<double>(window_area(h, 0.0, window_ns));
  r.side_mean = side_total / n_windows;
  r.g2_zero = r.central_area / r.side_mean;
  // var(C) = C, var(side_mean) = side_total / n^2.
  const double var = r.central_area / (r.side_mean * r.side_mean) +
                     r.g2_zero * r.g2_zero * side_total / (n_windows * n_windows * r.side_mean * r.side_mean);
  r.uncertainty = std::sqrt(var);
  return r;
}

}  // namespace spsc
