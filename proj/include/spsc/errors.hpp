#pragma once

#include <stdexcept>
#include <string>

namespace spsc {

// Precondition violations raise std::invalid_argument. The two types below
// cover failures that only show up while reading data or computing.

/// Malformed or inconsistent input file.
class FormatError : public std::runtime_error {
 public:
  explicit FormatError(const std::string& what) : std::runtime_error(what) {}
};

/// Numerical failure: singular normal matrix, non-convergence the caller
/// asked to treat as fatal, or an invariant breached at run time.
class ComputationError : public std::runtime_error {
 public:
  explicit ComputationError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace spsc
