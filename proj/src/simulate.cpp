#include "mkv/simulate.hpp"

#include <cmath>

#include "mkv/error.hpp"

namespace mkv {

Ensemble sample_initial(const InitialLaw& law, std::size_t n, std::uint64_t master_seed, std::uint32_t replica) {
  require(n >= 1, ErrorKind::InvalidArgument, "ensemble needs at least one particle");
  const NormalStream stream(master_seed, replica, StreamRole::Initial);
  Ensemble e;
  e.lineage = {master_seed, replica, StreamRole::Initial};
  e.positions.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto index = static_cast<std::uint32_t>(i);
    if (const auto* dirac = std::get_if<DiracInit>(&law)) {
      e.positions[i] = dirac->x0;
    } else if (const auto* uniform = std::get_if<UniformInit>(&law)) {
      e.positions[i] = uniform->a + (uniform->b - uniform->a) * stream.uniform_pair(0, index).first;
    } else {
      const auto& gaussian = std::get<GaussianInit>(law);
      e.positions[i] = gaussian.mean + gaussian.stddev * stream.normal(0, index);
    }
  }
  return e;
}

InteractionField::InteractionField(const DriftSpec& drift, std::span<const double> atoms)
    : drift_(&drift), conv_(drift.convolution()), atoms_(atoms) {
  if (conv_ == nullptr || conv_->weight == 0.0) {
    conv_ = nullptr;
    return;
  }
  require(!atoms.empty(), ErrorKind::InvalidArgument, "empirical measure has no atoms");
  const double inv_n = 1.0 / static_cast<double>(atoms.size());
  switch (conv_->kernel.kind) {
    case KernelKind::LinearMean:
      for (double y : atoms) mean_ += y;
      mean_ *= inv_n;
      break;
    case KernelKind::ScaledSine: {
      const double kappa = conv_->kernel.kappa;
      for (double y : atoms) {
        mean_cos_ += std::cos(kappa * y);
        mean_sin_ += std::sin(kappa * y);
      }
      mean_cos_ *= inv_n;
      mean_sin_ *= inv_n;
      break;
    }
    case KernelKind::Saturated:
      break;
  }
}

double InteractionField::operator()(double x) const {
  const double base = drift_->confinement(x);
  if (conv_ == nullptr) return base;
  const double kappa = conv_->kernel.kappa;
  double interaction = 0.0;
  switch (conv_->kernel.kind) {
    case KernelKind::LinearMean:
      interaction = kappa * (x - mean_);
      break;
    case KernelKind::ScaledSine:
      // sin(k(x-y)) = sin(kx)cos(ky) - cos(kx)sin(ky)
      interaction = std::sin(kappa * x) * mean_cos_ - std::cos(kappa * x) * mean_sin_;
      break;
    case KernelKind::Saturated: {
      for (double y : atoms_) interaction += std::tanh(kappa * (x - y));
      interaction /= static_cast<double>(atoms_.size());
      break;
    }
  }
  return base + conv_->weight * interaction;
}

double drift_eval(const DriftSpec& drift, double x, const Ensemble& ensemble) {
  require(ensemble.size() >= 1, ErrorKind::InvalidArgument, "ensemble is empty");
  return InteractionField(drift, ensemble.positions)(x);
}

StepDraws StepDraws::generate(const NoiseStreams& streams, std::uint64_t step, std::size_t n) {
  StepDraws draws;
  draws.regenerate(streams, step, n);
  return draws;
}

void StepDraws::regenerate(const NoiseStreams& streams, std::uint64_t step, std::size_t n) {
  xi1.resize(n);
  xi2.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto [a, b] = streams.idiosyncratic.normal_pair(step, static_cast<std::uint32_t>(i));
    xi1[i] = a;
    xi2[i] = b;
  }
  zeta = streams.common.normal(step, 0);
}

void apply_step(const ModelSpec& model, std::span<double> positions, const InteractionField& field, double dt,
                const StepDraws& draws, double reflection, double time_after) {
  require(draws.xi1.size() >= positions.size() && draws.xi2.size() >= positions.size(),
          ErrorKind::InvalidArgument, "not enough draws for the ensemble");
  const double sqrt_dt = std::sqrt(dt);
  const double sigma1 = model.sigma1();
  const double common = reflection * model.sigma0() * sqrt_dt * draws.zeta;
  bool finite = true;
  for (std::size_t i = 0; i < positions.size(); ++i) {
    const double x = positions[i];
    const double next = x + field(x) * dt + reflection * sigma1 * sqrt_dt * draws.xi1[i] +
                        model.bar_sigma(x) * sqrt_dt * draws.xi2[i] + common;
    finite = finite && std::isfinite(next);
    positions[i] = next;
  }
  if (!finite) throw DivergedError(time_after, "particle position became non-finite");
}

namespace {

// Saturated kernels read atoms during the update, so they need a frozen copy.
std::span<const double> frozen_atoms(const ModelSpec& model, const std::vector<double>& positions,
                                     std::vector<double>& scratch) {
  const auto* conv = model.drift.convolution();
  if (conv != nullptr && conv->kernel.kind == KernelKind::Saturated) {
    scratch = positions;
    return scratch;
  }
  return positions;
}

void advance_interacting(const ModelSpec& model, Ensemble& e, double dt, const NoiseStreams& streams,
                         StepDraws& draws, std::vector<double>& scratch) {
  draws.regenerate(streams, e.steps, e.size());
  const InteractionField field(model.drift, frozen_atoms(model, e.positions, scratch));
  ++e.steps;
  e.time = static_cast<double>(e.steps) * dt;
  apply_step(model, e.positions, field, dt, draws, 1.0, e.time);
}

void advance_coupled(const ModelSpec& model, CoupledState& s, double dt, const NoiseStreams& streams,
                     CouplingVariant variant, StepDraws& draws, std::vector<double>& scratch_x,
                     std::vector<double>& scratch_y) {
  require(s.x.size() == s.y.size(), ErrorKind::InvalidArgument, "coupled systems differ in size");
  draws.regenerate(streams, s.x.steps, s.x.size());
  const double reflection = reflection_factor(s.epsilon, s.x.positions, s.y.positions);

  // Both fields are built before either system moves; shortcut kernels cache
  // their moments at construction and Saturated kernels read a frozen copy.
  const auto x_atoms = frozen_atoms(model, s.x.positions, scratch_x);
  const auto y_atoms =
      variant == CouplingVariant::ReferenceMeasure ? x_atoms : frozen_atoms(model, s.y.positions, scratch_y);
  const InteractionField x_field(model.drift, x_atoms);
  const InteractionField y_field(model.drift, y_atoms);

  ++s.x.steps;
  ++s.y.steps;
  s.x.time = s.y.time = static_cast<double>(s.x.steps) * dt;
  apply_step(model, s.x.positions, x_field, dt, draws, 1.0, s.x.time);
  apply_step(model, s.y.positions, y_field, dt, draws, reflection, s.y.time);
}

}  // namespace

Ensemble step_interacting(const ModelSpec& model, const Ensemble& e, double dt, const NoiseStreams& streams) {
  require(dt > 0.0, ErrorKind::InvalidArgument, "dt must be positive");
  Ensemble next = e;
  StepDraws draws;
  std::vector<double> scratch;
  advance_interacting(model, next, dt, streams, draws, scratch);
  return next;
}

CoupledState step_coupled(const ModelSpec& model, const CoupledState& s, double dt, const NoiseStreams& streams,
                          CouplingVariant variant) {
  require(dt > 0.0, ErrorKind::InvalidArgument, "dt must be positive");
  CoupledState next = s;
  StepDraws draws;
  std::vector<double> scratch_x, scratch_y;
  advance_coupled(model, next, dt, streams, variant, draws, scratch_x, scratch_y);
  return next;
}

void SimConfig::validate() const {
  require(dt > 0.0 && dt < 1.0, ErrorKind::InvalidArgument, "sim.dt must lie in (0, 1)");
  require(t_end >= 0.0 && std::isfinite(t_end), ErrorKind::InvalidArgument, "sim.t_end must be nonnegative");
  require(save_every >= 1, ErrorKind::InvalidArgument, "sim.save_every must be positive");
  require(replicas >= 1, ErrorKind::InvalidArgument, "sim.replicas must be positive");
  require(particles >= 1, ErrorKind::InvalidArgument, "sim.particles must be positive");
}

std::uint64_t SimConfig::steps() const {
  // Tolerate representation error in t_end / dt before rounding up.
  return static_cast<std::uint64_t>(std::ceil(t_end / dt - 1e-9));
}

RunRecord simulate_trajectory(const ModelSpec& model, const SimConfig& config, const InitialLaw& init,
                              std::uint32_t replica, const Recorder& recorder) {
  config.validate();
  RunRecord record;
  record.replica = replica;
  record.horizon = config.horizon();

  Ensemble e = sample_initial(init, config.particles, config.master_seed, replica);
  const NoiseStreams streams(config.master_seed, replica);
  auto snapshot = [&] {
    record.snapshots.push_back(e);
    if (recorder) recorder(e);
  };
  snapshot();
  const auto total = config.steps();
  StepDraws draws;
  std::vector<double> scratch;
  for (std::uint64_t k = 1; k <= total; ++k) {
    advance_interacting(model, e, config.dt, streams, draws, scratch);
    if (k % static_cast<std::uint64_t>(config.save_every) == 0 || k == total) snapshot();
  }
  return record;
}

CoupledState simulate_coupled(const ModelSpec& model, const SimConfig& config, const InitialLaw& init_a,
                              const InitialLaw& init_b, const CutoffParam& epsilon, std::uint32_t replica,
                              const CoupledObserver& observer, CouplingVariant variant) {
  config.validate();
  CoupledState s{sample_initial(init_a, config.particles, config.master_seed, replica),
                 sample_initial(init_b, config.particles, config.master_seed, replica), epsilon};
  const NoiseStreams streams(config.master_seed, replica);
  if (observer) observer(s);
  const auto total = config.steps();
  StepDraws draws;
  std::vector<double> scratch_x, scratch_y;
  for (std::uint64_t k = 1; k <= total; ++k) {
    advance_coupled(model, s, config.dt, streams, variant, draws, scratch_x, scratch_y);
    if (observer && (k % static_cast<std::uint64_t>(config.save_every) == 0 || k == total)) observer(s);
  }
  return s;
}

}  // namespace mkv
