#pragma once

#include <stdexcept>
#include <string>

namespace fedra {

// Raised on contract violations: bad dimensions, invalid parameters,
// insufficient clients, malformed files.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Configuration/usage problems; the CLI maps these to exit code 2.
class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error(what) {}
};

}  // namespace fedra
