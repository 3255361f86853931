#include "mkv/error.hpp"

namespace mkv {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::InvalidArgument:
      return "invalid-argument";
    case ErrorKind::UnsupportedFamily:
      return "unsupported-family";
    case ErrorKind::DegenerateDiffusion:
      return "degenerate-diffusion";
    case ErrorKind::DegenerateNoise:
      return "degenerate-noise";
    case ErrorKind::InconsistentConstants:
      return "inconsistent-constants";
    case ErrorKind::PreconditionViolated:
      return "precondition-violated";
    case ErrorKind::Diverged:
      return "diverged";
    case ErrorKind::SizeLimit:
      return "size-limit";
    case ErrorKind::NoDecayWindow:
      return "no-decay-window";
    case ErrorKind::Config:
      return "config";
  }
  return "unknown";
}

}  // namespace mkv
