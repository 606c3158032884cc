#pragma once

#include <stdexcept>
#include <string>

namespace ddet {

/// Numerical failure: non-SPD matrix, degenerate data, solver non-convergence.
struct NumericError : std::runtime_error {
  explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Invalid configuration file, option value, or parameter combination.
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Filesystem or stream failure.
struct IoError : std::runtime_error {
  explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace ddet
