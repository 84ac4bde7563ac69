#pragma once

#include <stdexcept>
#include <string>

namespace mtnls {

// Exit codes used by the CLI: 0 ok, 2 validation, 3 numerical overflow,
// 4 property-check failure.

struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

struct UsageError : std::runtime_error {
  explicit UsageError(const std::string& msg) : std::runtime_error(msg) {}
};

struct OverflowError : std::runtime_error {
  double offending_value;
  explicit OverflowError(const std::string& msg, double value = 0.0)
      : std::runtime_error(msg), offending_value(value) {}
};

struct NumericalError : std::runtime_error {
  explicit NumericalError(const std::string& msg) : std::runtime_error(msg) {}
};

// Internal-consistency or property violation (exit code 4).
struct CheckError : std::runtime_error {
  explicit CheckError(const std::string& msg) : std::runtime_error(msg) {}
};

constexpr int kExitOk = 0;
constexpr int kExitValidation = 2;
constexpr int kExitOverflow = 3;
constexpr int kExitCheckFailure = 4;

}  // namespace mtnls
