#include "spsc/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "parallel.hpp"
#include "spsc/rng.hpp"

namespace spsc {

namespace {

// Background and dark counts are generated per block; memorylessness makes
// the concatenation an exact homogeneous Poisson process.
constexpr TimePs kPoissonBlockPs = 1'000'000'000;

std::vector<TimePs> poisson_process(double rate_cps, TimePs duration_ps, std::uint64_t seed,
                                    std::uint64_t stage, unsigned threads) {
  if (rate_cps <= 0.0 || duration_ps <= 0) return {};
  const double rate_per_ps = rate_cps / kPsPerSecond;
  const auto blocks = static_cast<std::size_t>((duration_ps + kPoissonBlockPs - 1) / kPoissonBlockPs);
  std::vector<std::vector<TimePs>> parts(blocks);
  detail::parallel_chunks(blocks, threads, [&](std::size_t, std::size_t begin, std::size_t end) {
    for (std::size_t b = begin; b < end; ++b) {
      CounterRng rng(seed, stage, b);
      const double start = static_cast<double>(b) * kPoissonBlockPs;
      const double stop = std::min(start + kPoissonBlockPs, static_cast<double>(duration_ps));
      auto& out = parts[b];
      for (double t = start + rng.exponential(rate_per_ps); t < stop; t += rng.exponential(rate_per_ps)) {
        out.push_back(static_cast<TimePs>(std::floor(t)));
      }
    }
  });
  return detail::concat(parts);
}

std::vector<TimePs> cw_emission(const EmitterConfig& cfg, std::uint64_t seed) {
  std::vector<TimePs> out;
  if (cfg.pump_rate_per_ns <= 0.0) return out;
  const double duration = static_cast<double>(cfg.duration_ps());
  const double pump_per_ps = cfg.pump_rate_per_ns / kPsPerNs;
  const double decay_per_ps = 1.0 / (cfg.tau_rad_ns * kPsPerNs);
  out.reserve(static_cast<std::size_t>(duration / (1.0 / pump_per_ps + 1.0 / decay_per_ps) * 1.05) + 16);
  double t = 0.0;
  for (std::uint64_t cycle = 0;; ++cycle) {
    CounterRng rng(seed, RngStage::kEmission, cycle);
    t += rng.exponential(pump_per_ps);
    t += rng.exponential(decay_per_ps);
    if (t >= duration) break;
    out.push_back(static_cast<TimePs>(std::floor(t)));
  }
  return out;
}

std::vector<TimePs> pulsed_emission(const EmitterConfig& cfg, const PulsedExcitation& pulse,
                                    std::uint64_t seed, unsigned threads) {
  const double period_ps = 1e6 / pulse.rep_rate_mhz;
  const double duration = static_cast<double>(cfg.duration_ps());
  const auto pulses = static_cast<std::size_t>(std::ceil(duration / period_ps));
  const double decay_per_ps = 1.0 / (cfg.tau_rad_ns * kPsPerNs);
  std::vector<std::vector<TimePs>> parts(std::max<unsigned>(threads, 1));
  detail::parallel_chunks(pulses, threads, [&](std::size_t chunk, std::size_t begin, std::size_t end) {
    auto& out = parts[chunk];
    for (std::size_t k = begin; k < end; ++k) {
      CounterRng rng(seed, RngStage::kEmission, k);
      if (!rng.bernoulli(pulse.excitation_prob)) continue;
      const double excited = static_cast<double>(k) * period_ps + rng.uniform() * pulse.pulse_width_ps;
      const double t = excited + rng.exponential(decay_per_ps);
      if (t < duration) out.push_back(static_cast<TimePs>(std::floor(t)));
    }
  });
  auto out = detail::concat(parts);
  std::sort(out.begin(), out.end());
  return out;
}

std::pair<TagStream, TagStream> detect_ports(PortTimes ports, const DetectorConfig& det_a,
                                             const DetectorConfig& det_b, TimePs duration_ps,
                                             std::uint64_t seed, unsigned threads) {
  auto a = apply_detector(std::move(ports.a), det_a, duration_ps, seed, 0, threads);
  auto b = apply_detector(std::move(ports.b), det_b, duration_ps, seed, 1, threads);
  return {TagStream::from_times(a, 0, duration_ps), TagStream::from_times(b, 1, duration_ps)};
}

}  // namespace

TimePs EmitterConfig::duration_ps() const {
  return static_cast<TimePs>(std::llround(duration_s * kPsPerSecond));
}

void EmitterConfig::validate() const {
  if (!(duration_s > 0.0)) throw std::invalid_argument("emitter: duration must be positive");
  if (!(tau_rad_ns > 0.0)) throw std::invalid_argument("emitter: tau_rad must be positive");
  if (!(pump_rate_per_ns >= 0.0)) throw std::invalid_argument("emitter: pump rate must be non-negative");
  if (!(background_rate_cps >= 0.0)) {
    throw std::invalid_argument("emitter: background rate must be non-negative");
  }
  if (const auto* p = std::get_if<PulsedExcitation>(&excitation)) {
    if (!(p->rep_rate_mhz > 0.0)) throw std::invalid_argument("emitter: repetition rate must be positive");
    if (!(p->pulse_width_ps >= 0.0)) throw std::invalid_argument("emitter: pulse width must be non-negative");
    if (!(p->excitation_prob >= 0.0 && p->excitation_prob <= 1.0)) {
      throw std::invalid_argument("emitter: excitation probability must lie in [0, 1]");
    }
  }
}

void DetectorConfig::validate() const {
  if (!(efficiency >= 0.0 && efficiency <= 1.0)) {
    throw std::invalid_argument("detector: efficiency must lie in [0, 1]");
  }
  if (!(jitter_sigma_ps >= 0.0) || !(dead_time_ns >= 0.0) || !(dark_rate_cps >= 0.0)) {
    throw std::invalid_argument("detector: jitter, dead time and dark rate must be non-negative");
  }
}

double pump_rate_for_power(double power_uw, const PowerDecayParams& p) {
  return p.alpha * power_uw / p.tau_rad;
}

double cw_emission_rate_cps(const EmitterConfig& cfg) {
  if (cfg.pump_rate_per_ns <= 0.0) return 0.0;
  return 1.0 / (1.0 / cfg.pump_rate_per_ns + cfg.tau_rad_ns) * 1e9;
}

TagStream simulate_emission(const EmitterConfig& cfg, std::uint64_t seed, unsigned threads) {
  cfg.validate();
  const TimePs duration = cfg.duration_ps();
  std::vector<TimePs> times;
  if (const auto* pulse = std::get_if<PulsedExcitation>(&cfg.excitation)) {
    times = pulsed_emission(cfg, *pulse, seed, threads);
  } else {
    times = cw_emission(cfg, seed);
  }
  const auto background = poisson_process(cfg.background_rate_cps, duration, seed,
                                          static_cast<std::uint64_t>(RngStage::kBackground), threads);
  if (!background.empty()) {
    std::vector<TimePs> merged(times.size() + background.size());
    std::merge(times.begin(), times.end(), background.begin(), background.end(), merged.begin());
    times = std::move(merged);
  }
  return TagStream::from_times(times, 0, duration);
}

std::vector<TimePs> apply_dead_time(std::span<const TimePs> sorted_times, double dead_time_ns) {
  std::vector<TimePs> out;
  out.reserve(sorted_times.size());
  const double dead_ps = dead_time_ns * kPsPerNs;
  for (TimePs t : sorted_times) {
    if (!out.empty() && static_cast<double>(t - out.back()) < dead_ps) continue;
    out.push_back(t);
  }
  return out;
}

std::vector<TimePs> apply_detector(std::vector<TimePs> times, const DetectorConfig& det,
                                   TimePs duration_ps, std::uint64_t seed, unsigned detector_index,
                                   unsigned threads) {
  det.validate();
  const std::uint64_t stage = static_cast<std::uint64_t>(RngStage::kDetector) + detector_index;
  std::vector<std::vector<TimePs>> parts(std::max<unsigned>(threads, 1));
  detail::parallel_chunks(times.size(), threads, [&](std::size_t chunk, std::size_t begin, std::size_t end) {
    auto& out = parts[chunk];
    out.reserve(end - begin);
    for (std::size_t i = begin; i < end; ++i) {
      CounterRng rng(seed, stage, i);
      if (!rng.bernoulli(det.efficiency)) continue;
      TimePs t = times[i];
      if (det.jitter_sigma_ps > 0.0) t += std::llround(rng.normal() * det.jitter_sigma_ps);
      out.push_back(t);
    }
  });
  auto detected = detail::concat(parts);
  const auto dark = poisson_process(det.dark_rate_cps, duration_ps, seed,
                                    static_cast<std::uint64_t>(RngStage::kDarkCounts) + detector_index,
                                    threads);
  detected.insert(detected.end(), dark.begin(), dark.end());
  std::erase_if(detected, [duration_ps](TimePs t) { return t < 0 || t >= duration_ps; });
  std::sort(detected.begin(), detected.end());
  if (det.dead_time_ns > 0.0) return apply_dead_time(detected, det.dead_time_ns);
  return detected;
}

std::pair<TagStream, TagStream> route_hbt(const TagStream& stream, BeamSplit split,
                                          const DetectorConfig& det_a, const DetectorConfig& det_b,
                                          std::uint64_t seed, unsigned threads) {
  if (!(split.r >= 0.0 && split.t >= 0.0) || std::abs(split.r + split.t - 1.0) > 1e-12) {
    throw std::invalid_argument("route_hbt: splitter must satisfy r + t = 1");
  }
  PortTimes ports;
  const auto& tags = stream.tags();
  for (std::size_t i = 0; i < tags.size(); ++i) {
    CounterRng rng(seed, RngStage::kHbtRouting, i);
    (rng.bernoulli(split.t) ? ports.a : ports.b).push_back(tags[i].time_ps);
  }
  return detect_ports(std::move(ports), det_a, det_b, stream.duration_ps(), seed, threads);
}

PortTimes interfere_at_second_splitter(std::span<const SplitterArrival> arrivals, const HOMParams& p,
                                       std::uint64_t seed) {
  const double r2 = p.splitters.r2;
  const double t2 = p.splitters.t2;
  const double window_ps = 5.0 * p.tau_c_ps;
  PortTimes ports;
  std::size_t i = 0;
  while (i < arrivals.size()) {
    CounterRng rng(seed, RngStage::kHomSplit, i);
    if (i + 1 < arrivals.size() && arrivals[i].long_arm != arrivals[i + 1].long_arm) {
      const double delta = static_cast<double>(arrivals[i + 1].time_ps - arrivals[i].time_ps);
      if (delta < window_ps) {
        const double x = p.visibility * std::exp(-2.0 * delta / p.tau_c_ps);
        const double p_ab = 2.0 * r2 * t2 * (1.0 - x);
        const double p_aa = t2 * t2 + r2 * t2 * x;
        const double u = rng.uniform();
        const TimePs first = arrivals[i].time_ps;
        const TimePs second = arrivals[i + 1].time_ps;
        if (u < p_ab) {
          if (rng.bernoulli(0.5)) {
            ports.a.push_back(first);
            ports.b.push_back(second);
          } else {
            ports.b.push_back(first);
            ports.a.push_back(second);
          }
        } else if (u < p_ab + p_aa) {
          ports.a.push_back(first);
          ports.a.push_back(second);
        } else {
          ports.b.push_back(first);
          ports.b.push_back(second);
        }
        i += 2;
        continue;
      }
    }
    (rng.bernoulli(t2) ? ports.a : ports.b).push_back(arrivals[i].time_ps);
    ++i;
  }
  return ports;
}

std::pair<TagStream, TagStream> route_hom(const TagStream& stream, const HOMParams& p,
                                          const DetectorConfig& det_a, const DetectorConfig& det_b,
                                          std::uint64_t seed, unsigned threads) {
  p.validate();
  const TimePs delay_ps = std::llround(p.dtau2_ns * kPsPerNs);
  const auto& tags = stream.tags();
  std::vector<SplitterArrival> arrivals;
  arrivals.reserve(tags.size());
  for (std::size_t i = 0; i < tags.size(); ++i) {
    CounterRng rng(seed, RngStage::kHomPath, i);
    const bool long_arm = rng.bernoulli(p.splitters.r1);
    arrivals.push_back({tags[i].time_ps + (long_arm ? delay_ps : 0), long_arm});
  }
  std::stable_sort(arrivals.begin(), arrivals.end(),
                   [](const SplitterArrival& a, const SplitterArrival& b) { return a.time_ps < b.time_ps; });
  return detect_ports(interfere_at_second_splitter(arrivals, p, seed), det_a, det_b,
                      stream.duration_ps(), seed, threads);
}

}  // namespace spsc
