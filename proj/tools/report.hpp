#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace spsc::cli {

struct ReportRow {
  std::string quantity;
  std::string target;
  std::string computed;
  bool ok = false;
};

struct ReportOptions {
  std::uint64_t seed = 0;
  unsigned threads = 1;
  bool quick = false;  ///< shorter Monte Carlo runs
};

/// Recomputes every headline number of the source characterisation.
std::vector<ReportRow> build_report(const ReportOptions& opt);

void print_report(std::ostream& os, const std::vector<ReportRow>& rows);

}  // namespace spsc::cli
