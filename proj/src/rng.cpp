#include "mkv/rng.hpp"

#include <cmath>
#include <numbers>

namespace mkv {

namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53u;
constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) noexcept {
  const std::uint64_t product = static_cast<std::uint64_t>(a) * b;
  hi = static_cast<std::uint32_t>(product >> 32);
  lo = static_cast<std::uint32_t>(product);
}

// 53 random bits mapped into (0, 1]; never returns 0 so log() stays finite.
inline double to_unit(std::uint32_t hi, std::uint32_t lo) noexcept {
  const std::uint64_t bits = ((static_cast<std::uint64_t>(hi) << 32) | lo) >> 11;
  return (static_cast<double>(bits) + 1.0) * 0x1.0p-53;
}

}  // namespace

Philox4x32::Counter Philox4x32::generate(Counter c, Key k) noexcept {
  for (int round = 0; round < 10; ++round) {
    if (round > 0) {
      k[0] += kWeyl0;
      k[1] += kWeyl1;
    }
    std::uint32_t hi0, lo0, hi1, lo1;
    mulhilo(kMul0, c[0], hi0, lo0);
    mulhilo(kMul1, c[2], hi1, lo1);
    c = {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
  }
  return c;
}

Philox4x32::Counter NormalStream::counter(std::uint64_t step, std::uint32_t index) const noexcept {
  return {static_cast<std::uint32_t>(step), index, replica_,
          (static_cast<std::uint32_t>(role_) << 24) ^ static_cast<std::uint32_t>(step >> 32)};
}

std::pair<double, double> NormalStream::uniform_pair(std::uint64_t step, std::uint32_t index) const noexcept {
  const auto block = Philox4x32::generate(counter(step, index), key_);
  return {to_unit(block[0], block[1]), to_unit(block[2], block[3])};
}

std::pair<double, double> NormalStream::normal_pair(std::uint64_t step, std::uint32_t index) const noexcept {
  const auto [u1, u2] = uniform_pair(step, index);
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  return {radius * std::cos(angle), radius * std::sin(angle)};
}

}  // namespace mkv
