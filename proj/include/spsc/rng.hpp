#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace spsc {

/// Independent random streams used by the simulator. Every draw is keyed by
/// (seed, stage, index) so results never depend on evaluation order.
enum class RngStage : std::uint64_t {
  kEmission = 1,
  kBackground = 2,
  kHbtRouting = 3,
  kHomPath = 4,
  kHomSplit = 5,
  kDetector = 16,  // + detector index
  kDarkCounts = 32,  // + detector index
};

inline constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Counter-based generator: output k is splitmix64(key + k * golden) where
/// the key hashes (seed, stage, index).
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, RngStage stage, std::uint64_t index)
      : CounterRng(seed, static_cast<std::uint64_t>(stage), index) {}

  CounterRng(std::uint64_t seed, std::uint64_t stage, std::uint64_t index)
      : key_(splitmix64(seed ^ splitmix64(stage ^ splitmix64(index ^ 0xD1B54A32D192ED03ULL)))) {}

  std::uint64_t next_u64() {
    ++counter_;
    return splitmix64(key_ + counter_ * 0x9E3779B97F4A7C15ULL);
  }

  /// Uniform on the open interval (0, 1).
  double uniform() { return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53; }

  bool bernoulli(double p) { return uniform() < p; }

  /// Exponential waiting time with the given rate; infinity for rate 0.
  double exponential(double rate) {
    if (rate <= 0.0) return INFINITY;
    return -std::log(uniform()) / rate;
  }

  /// Standard normal by Box-Muller (one variate per call).
  double normal() {
    const double u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace spsc
