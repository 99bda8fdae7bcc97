#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "spsc/tag_stream.hpp"

namespace spsc {

/// Coincidence counts over the signed delay tau = t_b - t_a, binned on
/// [-tau_max, +tau_max) with half-open bins [k w, (k+1) w).
struct Histogram {
  TimePs bin_width_ps = 100;
  TimePs tau_max_ps = 50'000;
  std::vector<std::uint64_t> counts;
  std::uint64_t total_pairs = 0;
  /// Expected pairs per bin for uncorrelated light; 0 until normalized.
  double norm = 0.0;

  /// Zero-filled histogram. Throws std::invalid_argument unless
  /// 0 < bin_width <= tau_max and tau_max is a multiple of bin_width.
  static Histogram zeros(TimePs bin_width_ps, TimePs tau_max_ps);

  std::size_t bins() const { return counts.size(); }
  TimePs bin_start_ps(std::size_t k) const { return -tau_max_ps + static_cast<TimePs>(k) * bin_width_ps; }
  TimePs bin_end_ps(std::size_t k) const { return bin_start_ps(k) + bin_width_ps; }
  double bin_center_ns(std::size_t k) const;

  bool normalized() const { return norm > 0.0; }
  /// counts[k] / norm; throws std::logic_error before normalization.
  double g2(std::size_t k) const;
  std::vector<double> g2_values() const;
  std::vector<double> bin_centers_ns() const;

  bool same_binning(const Histogram& other) const;
  /// Adds counts of a histogram with identical binning.
  Histogram& operator+=(const Histogram& other);

  friend bool operator==(const Histogram&, const Histogram&) = default;
};

/// Multi-start multi-stop correlation of two sorted streams: every pair
/// with -tau_max <= t_b - t_a < tau_max is counted. Runs in O(n + m + pairs);
/// `threads` workers split stream a and their histograms are summed.
Histogram cross_correlate(const TagStream& a, const TagStream& b, TimePs bin_width_ps,
                          TimePs tau_max_ps, unsigned threads = 1);

/// Correlation of one stream with itself, excluding each tag's self-pair.
Histogram auto_correlate(const TagStream& s, TimePs bin_width_ps, TimePs tau_max_ps, unsigned threads = 1);

/// Accumulates the pairs between two sorted time spans into h. Throws
/// std::invalid_argument on unsorted input.
void accumulate_pairs(std::span<const TimePs> a, std::span<const TimePs> b, Histogram& h);

/// Sets norm = rate_a rate_b bin_width duration so that g2 -> 1 for
/// uncorrelated light. Rates in cps, duration in seconds.
Histogram normalize_g2(Histogram h, double rate_a_cps, double rate_b_cps, double duration_s);

/// Normalizes with the rates and duration of the two streams the
/// histogram was built from.
Histogram normalize_g2(Histogram h, const TagStream& a, const TagStream& b);

struct PulsedG2 {
  double g2_zero = 0.0;
  double uncertainty = 0.0;
  double central_area = 0.0;
  double side_mean = 0.0;
};

/// g2(0) of a pulsed-excitation histogram: the area in a window around
/// zero delay divided by the mean area of the n_side_peaks windows on each
/// side (at multiples of the repetition period). Uncertainty propagates
/// sqrt(N) on each area. Throws ComputationError if a side window is empty.
PulsedG2 pulsed_g2_zero(const Histogram& h, double rep_period_ns, double window_ns, int n_side_peaks);

/// Area (counts) of bins whose centres fall in [center - window/2, center + window/2).
std::uint64_t window_area(const Histogram& h, double center_ns, double window_ns);

}  // namespace spsc
