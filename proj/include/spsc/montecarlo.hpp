#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <variant>
#include <vector>

#include "spsc/analytic_models.hpp"
#include "spsc/hom_models.hpp"
#include "spsc/tag_stream.hpp"

namespace spsc {

struct CwExcitation {};

struct PulsedExcitation {
  double rep_rate_mhz = 40.0;
  double pulse_width_ps = 300.0;
  double excitation_prob = 1.0;
};

/// Two-level emitter plus uncorrelated background light.
struct EmitterConfig {
  double tau_rad_ns = 1.87;
  double pump_rate_per_ns = 0.0;  ///< CW excitation rate, alpha P / tau_rad
  double background_rate_cps = 0.0;
  std::variant<CwExcitation, PulsedExcitation> excitation = CwExcitation{};
  double duration_s = 1e-3;

  bool pulsed() const { return std::holds_alternative<PulsedExcitation>(excitation); }
  TimePs duration_ps() const;
  void validate() const;
};

/// Single-photon detector: efficiency thinning, Gaussian timing jitter,
/// Poissonian dark counts and a non-paralyzable dead time.
struct DetectorConfig {
  double efficiency = 1.0;
  double jitter_sigma_ps = 0.0;
  double dead_time_ns = 0.0;
  double dark_rate_cps = 0.0;

  static DetectorConfig ideal() { return {}; }
  void validate() const;
};

/// Lossless beam splitter: t sends a photon to detector A, r to B.
struct BeamSplit {
  double r = 0.5;
  double t = 0.5;
};

/// Arrival at the second interferometer splitter.
struct SplitterArrival {
  TimePs time_ps = 0;
  bool long_arm = false;
};

/// Photon arrival times at the two output ports, before detection.
struct PortTimes {
  std::vector<TimePs> a;
  std::vector<TimePs> b;
};

/// Pump rate (ns^-1) that yields gamma1 = (1 + alpha P) / tau_rad.
double pump_rate_for_power(double power_uw, const PowerDecayParams& p);

/// Mean emission rate of the CW renewal cycle, 1 / (1/pump + tau_rad), in cps.
double cw_emission_rate_cps(const EmitterConfig& cfg);

/// Generates the emitter's photon stream (channel 0), deterministic in
/// (cfg, seed). CW photons follow an excitation/emission renewal cycle with
/// g2(tau) = 1 - exp(-(pump + 1/tau_rad)|tau|); pulsed excitation emits at
/// most one photon per pulse. Background light is added as a homogeneous
/// Poisson process.
TagStream simulate_emission(const EmitterConfig& cfg, std::uint64_t seed, unsigned threads = 1);

/// Hanbury Brown-Twiss arm: independent routing to A (probability t) or
/// B (r), then the detector models. Output channels are 0 (A) and 1 (B).
std::pair<TagStream, TagStream> route_hbt(const TagStream& stream, BeamSplit split,
                                          const DetectorConfig& det_a, const DetectorConfig& det_b,
                                          std::uint64_t seed, unsigned threads = 1);

/// Unbalanced Mach-Zehnder with two-photon interference at the second
/// splitter, then the detector models.
std::pair<TagStream, TagStream> route_hom(const TagStream& stream, const HOMParams& p,
                                          const DetectorConfig& det_a, const DetectorConfig& det_b,
                                          std::uint64_t seed, unsigned threads = 1);

/// Second-splitter routing for time-sorted arrivals. Consecutive arrivals
/// from different arms closer than 5 tau_c are routed jointly with
///   P(A,B) = 2 r2 t2 (1 - x),  P(A,A) = t2^2 + r2 t2 x,  P(B,B) = r2^2 + r2 t2 x,
/// x = V exp(-2 delta / tau_c); each arrival interferes at most once.
PortTimes interfere_at_second_splitter(std::span<const SplitterArrival> arrivals,
                                       const HOMParams& p, std::uint64_t seed);

/// Detector model applied to one port. Tags leaving [0, duration) after
/// jitter are dropped. Returns sorted times.
std::vector<TimePs> apply_detector(std::vector<TimePs> times, const DetectorConfig& det,
                                   TimePs duration_ps, std::uint64_t seed, unsigned detector_index,
                                   unsigned threads = 1);

/// Removes tags closer than dead_time to the previous accepted tag.
std::vector<TimePs> apply_dead_time(std::span<const TimePs> sorted_times, double dead_time_ns);

}  // namespace spsc
