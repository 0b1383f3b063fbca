#pragma once

#include <stdexcept>
#include <string>

namespace wprep {

// Operator/state built on one layout used with another.
class LayoutMismatch : public std::invalid_argument {
 public:
  explicit LayoutMismatch(const std::string& what) : std::invalid_argument(what) {}
};

// Integrator could not meet its tolerance or detected a conservation failure.
class IntegrationError : public std::runtime_error {
 public:
  explicit IntegrationError(const std::string& what) : std::runtime_error(what) {}
};

// Malformed parameter file or flag value.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace wprep
