#include <catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <vector>

#include "mkv/coupling.hpp"
#include "mkv/error.hpp"

using namespace mkv;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("cutoff takes its three regimes", "[coupling]") {
  const CutoffParam p(0.1);
  CHECK(cutoff(p, 0.0) == 0.0);
  CHECK(cutoff(p, 0.1) == 0.0);
  CHECK(cutoff(p, 0.2) == 1.0);
  CHECK(cutoff(p, 5.0) == 1.0);
  CHECK_THAT(cutoff(p, 0.15), WithinAbs(1.0 - std::exp(-1.0), 1e-15));
  CHECK_THROWS_AS(cutoff(p, -1e-9), Error);
  CHECK_THROWS_AS(CutoffParam(0.0), Error);
  CHECK_THROWS_AS(CutoffParam(-1.0), Error);
}

TEST_CASE("cutoff is continuous and nondecreasing", "[coupling]") {
  const CutoffParam p(0.5);
  double prev = 0.0;
  for (int k = 0; k <= 4000; ++k) {
    const double h = cutoff(p, 1.5 * k / 4000.0);
    REQUIRE(h >= prev);
    REQUIRE(h <= 1.0);
    prev = h;
  }
  CHECK(cutoff(p, 0.5 + 1e-6) < 1e-5);
  CHECK(cutoff(p, 1.0 - 1e-6) > 1.0 - 1e-12);
}

TEST_CASE("reflection factor follows the mean absolute difference", "[coupling]") {
  const CutoffParam p(0.1);
  const std::vector<double> x{0.0, 1.0, 2.0};
  const std::vector<double> close{0.05, 1.05, 2.05};
  const std::vector<double> far{1.0, 2.0, 3.0};
  CHECK(reflection_factor(p, x, close) == 1.0);
  CHECK(reflection_factor(p, x, far) == -1.0);

  const std::vector<double> mid{0.15, 1.15, 1.85};
  std::vector<double> z(3);
  for (int i = 0; i < 3; ++i) z[i] = x[i] - mid[i];
  CHECK(reflection_factor(p, x, mid) == reflection_factor(p, z));
  CHECK_THAT(reflection_factor(p, z), WithinAbs(1.0 - 2.0 * (1.0 - std::exp(-1.0)), 1e-14));
  CHECK_THROWS_AS(reflection_factor(p, x, std::vector<double>{1.0}), Error);
}

TEST_CASE("concave distance derivatives agree with finite differences", "[coupling]") {
  const ConcaveDistance d{0.25, 0.25 * std::exp(-0.25)};
  CHECK(d.eval(0.0).f == 0.0);
  for (double r : {0.1, 0.5, 1.0, 3.0, 10.0}) {
    const double h = 1e-5;
    const auto e = d.eval(r);
    CHECK_THAT(e.f, WithinAbs(1.0 - std::exp(-0.25 * r) + d.c2 * r, 1e-15));
    CHECK_THAT(e.df, WithinRel((d.eval(r + h).f - d.eval(r - h).f) / (2 * h), 1e-8));
    CHECK_THAT(e.d2f, WithinRel((d.eval(r + h).df - d.eval(r - h).df) / (2 * h), 1e-6));
    CHECK(e.df > 0.0);
    CHECK(e.d2f < 0.0);
  }
}

TEST_CASE("canonical psi bound holds and is tight at ell0", "[coupling]") {
  const DissipativityParams p{1.0, 2.0, 0.0, 1.0};
  const auto d = ConcaveDistance::from_rates(p, 4.0);
  CHECK(d.c1 == 0.25);
  const double rate = lambda0_dstar(d, p, 4.0);
  const auto report = verify_psi_bound(d, p, 4.0);
  CHECK(report.pass);
  CHECK(report.max_violation <= 1e-10);
  CHECK_THAT(psi(d, p, 4.0, 1.0) + rate * d.eval(1.0).f, WithinAbs(0.0, 1e-15));
  CHECK_FALSE(verify_psi_bound(d, p, 4.0, {}, rate * 1.001).pass);
}

TEST_CASE("psi bound holds across random parameter sets", "[coupling][property]") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    const DissipativityParams p{0.1 + 2.0 * u(rng), 0.1 + 4.0 * u(rng), 0.0, 1.0 + 2.0 * u(rng)};
    const double noise_sq = 0.5 + 10.0 * u(rng);
    const auto d = ConcaveDistance::from_rates(p, noise_sq);
    INFO("lambda1=" << p.lambda1 << " lambda2=" << p.lambda2 << " ell0=" << p.ell0 << " noise=" << noise_sq);
    CHECK(verify_psi_bound(d, p, noise_sq, PsiGrid{0.0, 20000}).pass);
  }
}

TEST_CASE("psi helpers reject inconsistent or degenerate inputs", "[coupling]") {
  const DissipativityParams p{1.0, 2.0, 0.0, 1.0};
  try {
    lambda0_dstar(ConcaveDistance{0.25, 0.3}, p, 4.0);
    FAIL("expected inconsistent-constants");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::InconsistentConstants);
  }
  try {
    ConcaveDistance::from_rates(p, 0.0);
    FAIL("expected degenerate-noise");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::DegenerateNoise);
  }
}
