#pragma once

#include <stdexcept>
#include <string>

namespace landcover {

// Unreadable or malformed files, and shape mismatches between inputs.
// The CLI maps these to exit code 2.
class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

// Invalid parameter values and degenerate numeric situations.
// The CLI maps these to exit code 3.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace landcover
