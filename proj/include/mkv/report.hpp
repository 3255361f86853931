#pragma once

namespace mkv {

/// Outcome of a grid or randomized assumption check. `max_violation` is the
/// largest value of (checked quantity - allowed bound) seen; `arg_x`/`arg_y`
/// locate it (arg_y is unused by one-dimensional checks and left at 0).
struct VerificationReport {
  bool pass = true;
  double max_violation = 0.0;
  double arg_x = 0.0;
  double arg_y = 0.0;
};

}  // namespace mkv
