#pragma once

#include <stdexcept>
#include <string>

namespace stefan {

// Rejected configuration: a precondition or one of the model hypotheses
// ((Ip1)-(Ip3), monotonicity of the constitutive functions, ...) failed.
// Maps to process exit code 1.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Runtime failure: blow-up of an explicit step, missing replay data, I/O.
// Maps to process exit code 2.
class RuntimeError : public std::runtime_error {
 public:
  explicit RuntimeError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace stefan
