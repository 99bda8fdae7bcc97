#pragma once

#include <cstdint>
#include <iosfwd>

namespace spsc::cli {

/// Seed used when --seed is not given.
inline constexpr std::uint64_t kDefaultSeed = 1554;

enum ExitCode : int {
  kOk = 0,
  kUsage = 2,        ///< malformed arguments
  kFormat = 3,       ///< unreadable or malformed input file
  kComputation = 4,  ///< non-convergence or invariant breach
};

/// Runs one subcommand: simulate, correlate, fit-g2, fit-sat, fit-hom,
/// fit-spectrum, overlap, budget or report.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace spsc::cli
