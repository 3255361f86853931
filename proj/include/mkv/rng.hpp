#pragma once

#include <array>
#include <cstdint>
#include <utility>

namespace mkv {

/// Philox4x32-10 counter-based generator (Salmon et al., SC'11). Stateless:
/// the output is a pure function of (counter, key).
class Philox4x32 {
 public:
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static Counter generate(Counter counter, Key key) noexcept;
};

/// Logical noise sources. Each role owns a disjoint slice of the counter space.
enum class StreamRole : std::uint32_t {
  Initial = 1,
  Idiosyncratic = 2,
  Common = 3,
  Resample = 4,
  Verification = 5,
};

/// Deterministic normal/uniform draws addressed by
/// (master seed, replica, role, step, index).
class NormalStream {
 public:
  NormalStream(std::uint64_t master_seed, std::uint32_t replica, StreamRole role) noexcept
      : key_{static_cast<std::uint32_t>(master_seed), static_cast<std::uint32_t>(master_seed >> 32)},
        replica_(replica),
        role_(role) {}

  /// Two independent standard normals (Box-Muller on one Philox block).
  std::pair<double, double> normal_pair(std::uint64_t step, std::uint32_t index) const noexcept;

  double normal(std::uint64_t step, std::uint32_t index) const noexcept {
    return normal_pair(step, index).first;
  }

  /// Two independent uniforms on the open interval (0, 1).
  std::pair<double, double> uniform_pair(std::uint64_t step, std::uint32_t index) const noexcept;

  std::uint32_t replica() const noexcept { return replica_; }
  StreamRole role() const noexcept { return role_; }

 private:
  Philox4x32::Counter counter(std::uint64_t step, std::uint32_t index) const noexcept;

  Philox4x32::Key key_;
  std::uint32_t replica_;
  StreamRole role_;
};

/// Independent master seed for a sub-experiment (splitmix64 finalizer over seed and tag).
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag) noexcept {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (tag + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

}  // namespace mkv
