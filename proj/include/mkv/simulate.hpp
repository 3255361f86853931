#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <variant>
#include <vector>

#include "mkv/coupling.hpp"
#include "mkv/model.hpp"
#include "mkv/rng.hpp"

namespace mkv {

struct SeedLineage {
  std::uint64_t master_seed = 0;
  std::uint32_t replica = 0;
  StreamRole role = StreamRole::Initial;
};

/// Particle positions at one time point. `steps` is the number of Euler steps
/// taken so far and doubles as the noise counter for the next step.
struct Ensemble {
  std::vector<double> positions;
  double time = 0.0;
  std::uint64_t steps = 0;
  SeedLineage lineage;

  std::size_t size() const noexcept { return positions.size(); }
};

struct DiracInit {
  double x0 = 0.0;
};
struct UniformInit {
  double a = 0.0;
  double b = 1.0;
};
struct GaussianInit {
  double mean = 0.0;
  double stddev = 1.0;
};
using InitialLaw = std::variant<DiracInit, UniformInit, GaussianInit>;

/// Particle i's initial draw depends only on (seed, replica, i), so ensembles
/// of different sizes share their leading particles.
Ensemble sample_initial(const InitialLaw& law, std::size_t n, std::uint64_t master_seed, std::uint32_t replica);

/// b(., mu) for a fixed empirical measure, with O(1) evaluation for the
/// linear and sine kernels (moment shortcuts) and O(n) otherwise.
class InteractionField {
 public:
  InteractionField(const DriftSpec& drift, std::span<const double> atoms);

  double operator()(double x) const;

 private:
  const DriftSpec* drift_;
  const ConfinementPlusKernel* conv_;
  std::span<const double> atoms_;
  double mean_ = 0.0;
  double mean_cos_ = 0.0;
  double mean_sin_ = 0.0;
};

double drift_eval(const DriftSpec& drift, double x, const Ensemble& ensemble);

struct NoiseStreams {
  NormalStream idiosyncratic;
  NormalStream common;

  NoiseStreams(std::uint64_t master_seed, std::uint32_t replica)
      : idiosyncratic(master_seed, replica, StreamRole::Idiosyncratic),
        common(master_seed, replica, StreamRole::Common) {}
};

/// Standard normal increments for one step: xi1/xi2 per particle, zeta shared.
struct StepDraws {
  std::vector<double> xi1;
  std::vector<double> xi2;
  double zeta = 0.0;

  static StepDraws generate(const NoiseStreams& streams, std::uint64_t step, std::size_t n);
  void regenerate(const NoiseStreams& streams, std::uint64_t step, std::size_t n);
};

/// One Euler-Maruyama step with explicit draws:
///   X_i += b(X_i, field) dt + reflection (sigma1 xi1_i + sigma0 zeta) sqrt(dt) + bar_sigma(X_i) xi2_i sqrt(dt)
/// Throws DivergedError when a position becomes non-finite.
void apply_step(const ModelSpec& model, std::span<double> positions, const InteractionField& field, double dt,
                const StepDraws& draws, double reflection, double time_after);

Ensemble step_interacting(const ModelSpec& model, const Ensemble& e, double dt, const NoiseStreams& streams);

/// Which empirical measure feeds the y-system drift. `ReferenceMeasure` is a
/// deliberately broken coupling used only for mutation testing.
enum class CouplingVariant { Faithful, ReferenceMeasure };

struct CoupledState {
  Ensemble x;
  Ensemble y;
  CutoffParam epsilon;
};

/// x takes a plain step; y reuses the same xi1, xi2, zeta with its sigma1 and
/// sigma0 increments scaled by the reflection factor of x - y at step start.
CoupledState step_coupled(const ModelSpec& model, const CoupledState& s, double dt, const NoiseStreams& streams,
                          CouplingVariant variant = CouplingVariant::Faithful);

struct SimConfig {
  double dt = 1e-3;
  double t_end = 1.0;
  int save_every = 100;
  int replicas = 1;
  std::uint64_t master_seed = 1;
  std::size_t particles = 1;

  void validate() const;
  /// ceil(t_end / dt); the horizon is rounded up to a whole number of steps.
  std::uint64_t steps() const;
  double horizon() const { return static_cast<double>(steps()) * dt; }
};

struct RunRecord {
  std::uint32_t replica = 0;
  double horizon = 0.0;
  std::vector<Ensemble> snapshots;
};

using Recorder = std::function<void(const Ensemble&)>;

/// Steps from t = 0 to the rounded-up horizon; snapshots the initial state and
/// every `save_every` steps (plus the final state).
RunRecord simulate_trajectory(const ModelSpec& model, const SimConfig& config, const InitialLaw& init,
                              std::uint32_t replica, const Recorder& recorder = {});

using CoupledObserver = std::function<void(const CoupledState&)>;

/// Coupled pair from (initA, initB). Both systems consume the same initial
/// uniforms, so equal laws produce equal starting points.
CoupledState simulate_coupled(const ModelSpec& model, const SimConfig& config, const InitialLaw& init_a,
                              const InitialLaw& init_b, const CutoffParam& epsilon, std::uint32_t replica,
                              const CoupledObserver& observer = {},
                              CouplingVariant variant = CouplingVariant::Faithful);

}  // namespace mkv
