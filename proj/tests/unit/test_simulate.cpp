#include <catch_amalgamated.hpp>

#include <cmath>
#include <limits>
#include <vector>

#include "mkv/error.hpp"
#include "mkv/metrics.hpp"
#include "mkv/simulate.hpp"

using namespace mkv;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

ModelSpec kernel_model(KernelKind kind, double kappa, double weight) {
  ModelSpec m;
  m.drift = DriftSpec::with_kernel({0.1, -1.0}, Kernel{kind, kappa}, weight);
  m.diffusion.sigma = ConstantSigma{1.0};
  m.diffusion.sigma0 = 0.5;
  m.split = split_noise(m.diffusion, 0.9);
  return m;
}

ModelSpec deterministic_linear(double theta) {
  ModelSpec m;
  m.drift = DriftSpec::linear(theta);
  m.diffusion.sigma = ConstantSigma{0.0};
  return m;
}

}  // namespace

TEST_CASE("initial sampling is nested across ensemble sizes", "[simulate]") {
  const InitialLaw law = GaussianInit{1.0, 2.0};
  const auto small = sample_initial(law, 16, 9, 2);
  const auto large = sample_initial(law, 64, 9, 2);
  for (std::size_t i = 0; i < small.size(); ++i) CHECK(small.positions[i] == large.positions[i]);
  CHECK(sample_initial(law, 16, 9, 3).positions != small.positions);

  const auto uniform = sample_initial(UniformInit{-1.0, 3.0}, 1000, 1, 0);
  for (double x : uniform.positions) {
    CHECK(x > -1.0);
    CHECK(x <= 3.0);
  }
  for (double x : sample_initial(DiracInit{2.5}, 5, 1, 0).positions) CHECK(x == 2.5);
  CHECK_THROWS_AS(sample_initial(law, 0, 1, 0), Error);
}

TEST_CASE("interaction field shortcuts agree with direct summation", "[simulate]") {
  const std::vector<double> atoms{-2.0, -0.3, 0.4, 1.7, 3.1};
  for (auto kind : {KernelKind::ScaledSine, KernelKind::Saturated, KernelKind::LinearMean}) {
    const auto drift = DriftSpec::with_kernel({0.1, -1.0, 0.0, -0.05}, Kernel{kind, 1.3}, 0.7);
    const InteractionField field(drift, atoms);
    for (double x : {-1.0, 0.0, 0.25, 2.0}) CHECK_THAT(field(x), WithinAbs(drift(x, atoms), 1e-13));
  }
}

TEST_CASE("zero-noise linear drift follows the explicit Euler recursion", "[simulate]") {
  const auto model = deterministic_linear(-1.0);
  SimConfig sim;
  sim.dt = 0.01;
  sim.t_end = 1.0;
  sim.save_every = 10;
  const auto run = simulate_trajectory(model, sim, DiracInit{2.0}, 0);
  REQUIRE(run.snapshots.size() == 11);
  CHECK(run.snapshots.front().time == 0.0);
  CHECK_THAT(run.snapshots.back().time, WithinAbs(1.0, 1e-12));
  CHECK_THAT(run.snapshots.back().positions[0], WithinRel(2.0 * std::pow(0.99, 100), 1e-12));
}

TEST_CASE("horizon rounds up to whole steps", "[simulate]") {
  SimConfig sim;
  sim.dt = 0.3;
  sim.t_end = 1.0;
  CHECK(sim.steps() == 4);
  CHECK_THAT(sim.horizon(), WithinAbs(1.2, 1e-12));
  sim.dt = 0.1;
  CHECK(sim.steps() == 10);
  sim.dt = 0.0;
  CHECK_THROWS_AS(sim.validate(), Error);
}

TEST_CASE("trajectories are reproducible from the seed", "[simulate]") {
  const auto model = kernel_model(KernelKind::ScaledSine, 1.0, 0.3);
  SimConfig sim;
  sim.dt = 1e-2;
  sim.t_end = 1.0;
  sim.particles = 32;
  sim.master_seed = 77;
  const auto a = simulate_trajectory(model, sim, GaussianInit{0.0, 1.0}, 4);
  const auto b = simulate_trajectory(model, sim, GaussianInit{0.0, 1.0}, 4);
  CHECK(a.snapshots.back().positions == b.snapshots.back().positions);
  sim.master_seed = 78;
  CHECK(simulate_trajectory(model, sim, GaussianInit{0.0, 1.0}, 4).snapshots.back().positions !=
        a.snapshots.back().positions);
}

TEST_CASE("coupled system with equal starts stays synchronous", "[simulate]") {
  const auto model = kernel_model(KernelKind::Saturated, 1.0, 0.5);
  SimConfig sim;
  sim.dt = 1e-2;
  sim.t_end = 2.0;
  sim.particles = 8;
  int observed = 0;
  const auto end = simulate_coupled(model, sim, GaussianInit{0.0, 1.0}, GaussianInit{0.0, 1.0}, CutoffParam(0.1), 0,
                                    [&](const CoupledState& s) {
                                      ++observed;
                                      CHECK(s.x.positions == s.y.positions);
                                    });
  CHECK(observed == 3);
  CHECK(end.x.positions == end.y.positions);

  // and the x-system is exactly the plain interacting system
  const auto plain = simulate_trajectory(model, sim, GaussianInit{0.0, 1.0}, 0);
  CHECK(plain.snapshots.back().positions == end.x.positions);
}

TEST_CASE("coupled y-system with synchronous reflection equals the plain system", "[simulate]") {
  // epsilon large enough that the reflection factor stays +1 throughout
  const auto model = kernel_model(KernelKind::LinearMean, -1.0, 1.0);
  SimConfig sim;
  sim.dt = 1e-2;
  sim.t_end = 1.0;
  sim.particles = 4;
  const auto end = simulate_coupled(model, sim, DiracInit{0.0}, DiracInit{0.5}, CutoffParam(1e6), 0);
  const auto plain = simulate_trajectory(model, sim, DiracInit{0.5}, 0);
  CHECK(end.y.positions == plain.snapshots.back().positions);
}

TEST_CASE("full reflection mirrors the reflected noise", "[simulate]") {
  ModelSpec model;
  model.drift = DriftSpec::linear(0.0);
  model.diffusion.sigma = ConstantSigma{1.0};
  model.diffusion.sigma0 = 1.0;
  model.split = split_noise(model.diffusion, 0.5);
  const NoiseStreams streams(5, 0);
  CoupledState s{sample_initial(DiracInit{-10.0}, 3, 5, 0), sample_initial(DiracInit{10.0}, 3, 5, 0),
                 CutoffParam(0.1)};
  const auto next = step_coupled(model, s, 0.01, streams);
  const auto draws = StepDraws::generate(streams, 0, 3);
  const double sq = std::sqrt(0.01);
  for (std::size_t i = 0; i < 3; ++i) {
    const double reflected = model.sigma1() * sq * draws.xi1[i] + sq * draws.zeta;
    const double synchronous = model.bar_sigma(0.0) * sq * draws.xi2[i];
    CHECK_THAT(next.x.positions[i], WithinAbs(-10.0 + reflected + synchronous, 1e-14));
    CHECK_THAT(next.y.positions[i], WithinAbs(10.0 - reflected + synchronous, 1e-14));
  }
}

TEST_CASE("reference-measure mutation changes the y drift", "[simulate]") {
  const auto model = kernel_model(KernelKind::LinearMean, -1.0, 1.0);
  const NoiseStreams streams(1, 0);
  CoupledState s{sample_initial(DiracInit{-1.0}, 2, 1, 0), sample_initial(DiracInit{1.0}, 2, 1, 0),
                 CutoffParam(0.1)};
  const auto faithful = step_coupled(model, s, 0.1, streams);
  const auto broken = step_coupled(model, s, 0.1, streams, CouplingVariant::ReferenceMeasure);
  CHECK(faithful.x.positions == broken.x.positions);
  // the y drift sees mean -1 instead of +1, a drift change of -2 over dt = 0.1
  for (std::size_t i = 0; i < 2; ++i) CHECK_THAT(broken.y.positions[i] - faithful.y.positions[i], WithinAbs(-0.2, 1e-12));
}

TEST_CASE("non-finite positions raise diverged with the step time", "[simulate]") {
  auto model = deterministic_linear(1.0);
  SimConfig sim;
  sim.dt = 0.5;
  sim.t_end = 10.0;
  try {
    simulate_trajectory(model, sim, DiracInit{std::numeric_limits<double>::max()}, 0);
    FAIL("expected diverged");
  } catch (const DivergedError& e) {
    CHECK(e.kind() == ErrorKind::Diverged);
    CHECK(e.time() == 0.5);
  }
}

TEST_CASE("moment track of a frozen system is constant", "[simulate][metrics]") {
  const auto model = deterministic_linear(0.0);
  SimConfig sim;
  sim.dt = 0.1;
  sim.t_end = 1.0;
  sim.save_every = 2;
  sim.particles = 3;
  const auto track = moment_track(simulate_trajectory(model, sim, DiracInit{3.0}, 0));
  REQUIRE(track.size() == 6);
  for (const auto& m : track) {
    CHECK(m.mean_abs == 3.0);
    CHECK(m.max_abs == 3.0);
  }
}
