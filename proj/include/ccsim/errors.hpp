#pragma once

#include <stdexcept>
#include <string>

namespace ccsim {

/// Malformed model, grid, spec or configuration input.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// No certificate exists within the searched parameter range.
class InfeasibleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace ccsim
