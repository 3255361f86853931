#include <catch_amalgamated.hpp>

#include <cmath>
#include <set>

#include "mkv/rng.hpp"

using namespace mkv;

TEST_CASE("philox matches the published known-answer vectors", "[rng]") {
  using C = Philox4x32::Counter;
  using K = Philox4x32::Key;
  CHECK(Philox4x32::generate(C{0, 0, 0, 0}, K{0, 0}) == C{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});
  CHECK(Philox4x32::generate(C{0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, K{0xffffffff, 0xffffffff}) ==
        C{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd});
  CHECK(Philox4x32::generate(C{0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, K{0xa4093822, 0x299f31d0}) ==
        C{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1});
}

TEST_CASE("normal streams are pure functions of their address", "[rng]") {
  const NormalStream a(42, 3, StreamRole::Idiosyncratic);
  const NormalStream b(42, 3, StreamRole::Idiosyncratic);
  CHECK(a.normal_pair(17, 5) == b.normal_pair(17, 5));
  CHECK(a.normal_pair(17, 5) != a.normal_pair(17, 6));
  CHECK(a.normal_pair(17, 5) != a.normal_pair(18, 5));
  CHECK(a.normal_pair(17, 5) != NormalStream(42, 4, StreamRole::Idiosyncratic).normal_pair(17, 5));
  CHECK(a.normal_pair(17, 5) != NormalStream(42, 3, StreamRole::Common).normal_pair(17, 5));
  CHECK(a.normal_pair(17, 5) != NormalStream(43, 3, StreamRole::Idiosyncratic).normal_pair(17, 5));
  // the high word of the step lands in the role word without colliding with the low word
  CHECK(a.normal_pair(1ull << 32, 5) != a.normal_pair(0, 5));
}

TEST_CASE("uniforms stay in (0, 1] and normals have unit moments", "[rng]") {
  const NormalStream s(7, 0, StreamRole::Verification);
  constexpr int kDraws = 200000;
  double sum = 0.0, sq = 0.0, quad = 0.0;
  for (int i = 0; i < kDraws; ++i) {
    const auto [u1, u2] = s.uniform_pair(0, static_cast<std::uint32_t>(i));
    REQUIRE(u1 > 0.0);
    REQUIRE(u1 <= 1.0);
    REQUIRE(u2 > 0.0);
    REQUIRE(u2 <= 1.0);
    const auto [z1, z2] = s.normal_pair(1, static_cast<std::uint32_t>(i));
    for (double z : {z1, z2}) {
      sum += z;
      sq += z * z;
      quad += z * z * z * z;
    }
  }
  const double n = 2.0 * kDraws;
  // 5 sigma bands for the mean, variance and fourth moment of N(0,1)
  CHECK(std::abs(sum / n) < 5.0 / std::sqrt(n));
  CHECK(std::abs(sq / n - 1.0) < 5.0 * std::sqrt(2.0 / n));
  CHECK(std::abs(quad / n - 3.0) < 5.0 * std::sqrt(96.0 / n));
}

TEST_CASE("derived seeds are distinct and reproducible", "[rng]") {
  std::set<std::uint64_t> seen;
  for (std::uint64_t tag = 0; tag < 1000; ++tag) seen.insert(derive_seed(1, tag));
  CHECK(seen.size() == 1000);
  CHECK(derive_seed(5, 9) == derive_seed(5, 9));
  CHECK(derive_seed(5, 9) != derive_seed(6, 9));
}
