#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace mkv {

enum class ErrorKind {
  InvalidArgument,
  UnsupportedFamily,
  DegenerateDiffusion,
  DegenerateNoise,
  InconsistentConstants,
  PreconditionViolated,
  Diverged,
  SizeLimit,
  NoDecayWindow,
  Config,
};

std::string_view to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// Raised when a particle position stops being finite. Carries the simulation
/// time of the offending step.
class DivergedError : public Error {
 public:
  DivergedError(double time, const std::string& message)
      : Error(ErrorKind::Diverged, message + " at t=" + std::to_string(time)), time_(time) {}

  double time() const noexcept { return time_; }

 private:
  double time_;
};

inline void require(bool condition, ErrorKind kind, const std::string& message) {
  if (!condition) throw Error(kind, message);
}

}  // namespace mkv
