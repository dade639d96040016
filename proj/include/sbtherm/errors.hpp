#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace sbtherm {

// Exit codes used by the CLI front end.
enum ExitCode : int {
  kExitOk = 0,
  kExitConfigError = 2,
  kExitDataError = 3,
  kExitNumericalError = 4,
};

struct DomainError : std::runtime_error {
  explicit DomainError(const std::string& msg) : std::runtime_error(msg) {}
};

struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// Raised by readers on malformed on-disk data; carries the byte offset of the
// first inconsistency so the CLI can report it.
struct DataError : std::runtime_error {
  DataError(const std::string& msg, std::uint64_t offset_)
      : std::runtime_error(msg + " (offset " + std::to_string(offset_) + ")"),
        offset(offset_) {}
  std::uint64_t offset = 0;
};

struct NumericalError : std::runtime_error {
  explicit NumericalError(const std::string& msg) : std::runtime_error(msg) {}
};

// Blue-detuned drive at or beyond the point where the total linewidth closes.
// The closed-form sideband expressions stop being valid there.
struct SelfOscillationError : DomainError {
  explicit SelfOscillationError(const std::string& msg) : DomainError(msg) {}
};

}  // namespace sbtherm
