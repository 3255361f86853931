#include "mkv/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "mkv/error.hpp"
#include "mkv/wasserstein.hpp"

namespace mkv {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

double polynomial(const std::vector<double>& coefficients, double x) noexcept {
  double value = 0.0;
  for (auto it = coefficients.rbegin(); it != coefficients.rend(); ++it) value = value * x + *it;
  return value;
}

// (p(x) - p(y)) / (x - y) = sum_k a_k sum_{j<k} x^j y^{k-1-j}
double polynomial_slope(const std::vector<double>& coefficients, double x, double y) noexcept {
  double slope = 0.0;
  for (std::size_t k = 1; k < coefficients.size(); ++k) {
    double homogeneous = 0.0;
    double x_pow = 1.0;
    for (std::size_t j = 0; j < k; ++j) {
      homogeneous += x_pow * std::pow(y, static_cast<double>(k - 1 - j));
      x_pow *= x;
    }
    slope += coefficients[k] * homogeneous;
  }
  return slope;
}

}  // namespace

void DissipativityParams::validate() const {
  require(lambda1 > 0.0, ErrorKind::InvalidArgument, "lambda1 must be positive");
  require(lambda2 > 0.0, ErrorKind::InvalidArgument, "lambda2 must be positive");
  require(lambda3 >= 0.0, ErrorKind::InvalidArgument, "lambda3 must be nonnegative");
  require(ell0 >= 1.0, ErrorKind::InvalidArgument, "ell0 must be at least 1");
}

double Kernel::operator()(double z) const noexcept {
  switch (kind) {
    case KernelKind::ScaledSine:
      return std::sin(kappa * z);
    case KernelKind::Saturated:
      return std::tanh(kappa * z);
    case KernelKind::LinearMean:
      return kappa * z;
  }
  return 0.0;
}

double Kernel::lipschitz() const noexcept { return std::abs(kappa); }

DriftSpec::DriftSpec(Family family) : family_(std::move(family)) {
  if (const auto* conv = convolution()) {
    require(conv->weight >= 0.0, ErrorKind::InvalidArgument, "kernel weight must be nonnegative");
    require(std::isfinite(conv->kernel.kappa), ErrorKind::InvalidArgument, "kernel kappa must be finite");
  }
}

double DriftSpec::confinement(double x) const noexcept {
  return std::visit(overloaded{
                        [x](const LinearDrift& d) { return d.theta * x; },
                        [x](const DoubleWellDrift& d) { return d.a * x - d.b * x * x * x; },
                        [x](const ConfinementPlusKernel& d) { return polynomial(d.confinement, x); },
                    },
                    family_);
}

double DriftSpec::confinement_slope(double x, double y) const noexcept {
  return std::visit(overloaded{
                        [](const LinearDrift& d) { return d.theta; },
                        [x, y](const DoubleWellDrift& d) { return d.a - d.b * (x * x + x * y + y * y); },
                        [x, y](const ConfinementPlusKernel& d) { return polynomial_slope(d.confinement, x, y); },
                    },
                    family_);
}

double DriftSpec::interaction_slope_bound() const noexcept {
  const auto* conv = convolution();
  if (conv == nullptr) return 0.0;
  // The linear kernel shifts b(x,mu)-b(y,mu) by exactly weight*kappa*(x-y).
  if (conv->kernel.kind == KernelKind::LinearMean) return conv->weight * conv->kernel.kappa;
  return conv->weight * conv->kernel.lipschitz();
}

bool DriftSpec::measure_dependent() const noexcept {
  const auto* conv = convolution();
  return conv != nullptr && conv->weight != 0.0 && conv->kernel.kappa != 0.0;
}

double DriftSpec::measure_lipschitz() const noexcept {
  const auto* conv = convolution();
  return conv == nullptr ? 0.0 : conv->weight * conv->kernel.lipschitz();
}

double DriftSpec::operator()(double x, std::span<const double> atoms) const {
  const double base = confinement(x);
  const auto* conv = convolution();
  if (conv == nullptr || conv->weight == 0.0) return base;
  require(!atoms.empty(), ErrorKind::InvalidArgument, "empirical measure has no atoms");
  double sum = 0.0;
  for (double y : atoms) sum += conv->kernel(x - y);
  return base + conv->weight * sum / static_cast<double>(atoms.size());
}

double sigma_value(const SigmaFamily& family, double x) noexcept {
  return std::visit(overloaded{
                        [](const ConstantSigma& s) { return s.c; },
                        [x](const BoundedWaveSigma& s) { return s.a + s.b * std::sin(x); },
                    },
                    family);
}

void DiffusionSpec::validate() const {
  require(kappa1 > 0.0 && kappa1 <= kappa2, ErrorKind::InvalidArgument, "need 0 < kappa1 <= kappa2");
  require(lsigma >= 0.0, ErrorKind::InvalidArgument, "Lsigma must be nonnegative");
  require(std::isfinite(sigma0), ErrorKind::InvalidArgument, "sigma0 must be finite");
}

double NoiseSplit::bar_sigma_sq(double x) const noexcept {
  const double s = sigma_value(sigma, x);
  return s * s - alpha * kappa1;
}

double NoiseSplit::bar_sigma(double x) const noexcept { return std::sqrt(std::max(0.0, bar_sigma_sq(x))); }

double ModelSpec::bar_sigma(double x) const noexcept {
  return split ? split->bar_sigma(x) : std::abs(diffusion(x));
}

std::vector<double> Grid::points() const {
  require(std::isfinite(lo) && std::isfinite(hi) && step > 0.0 && hi >= lo, ErrorKind::InvalidArgument,
          "grid must be finite with step > 0 and hi >= lo");
  const auto count = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9)) + 1;
  std::vector<double> xs(count);
  for (std::size_t k = 0; k < count; ++k) xs[k] = lo + static_cast<double>(k) * step;
  return xs;
}

VerificationReport verify_dissipativity(const DriftSpec& drift, const DissipativityParams& params,
                                        const Grid& grid) {
  const auto xs = grid.points();
  const double interaction = drift.interaction_slope_bound();
  VerificationReport report;
  report.max_violation = -std::numeric_limits<double>::infinity();
  // LHS - RHS = z^2 (2 g(x,y) - (lambda1+lambda2) 1{|z|<=ell0} + lambda2), g the divided difference.
  for (double x : xs) {
    for (double y : xs) {
      const double z = x - y;
      const double slope = drift.confinement_slope(x, y) + interaction;
      const double allowed = (std::abs(z) <= params.ell0 ? params.lambda1 + params.lambda2 : 0.0) - params.lambda2;
      const double violation = z * z * (2.0 * slope - allowed);
      if (violation > report.max_violation) {
        report.max_violation = violation;
        report.arg_x = x;
        report.arg_y = y;
      }
    }
  }
  report.pass = report.max_violation <= kIdentityTolerance;
  return report;
}

std::optional<double> w1_lipschitz_ratio(const DriftSpec& drift, double x, std::span<const double> mu,
                                         std::span<const double> nu) {
  const double distance = w1_sorted(mu, nu);
  if (distance == 0.0) return std::nullopt;
  return std::abs(drift(x, mu) - drift(x, nu)) / distance;
}

VerificationReport verify_w1_lipschitz(const DriftSpec& drift, double lambda3, const MeasurePairSampler& sampler) {
  require(sampler.max_atoms >= 1 && sampler.max_atoms <= 8, ErrorKind::InvalidArgument,
          "measure sampler supports 1..8 atoms");
  std::mt19937_64 engine(sampler.seed);
  std::uniform_int_distribution<int> atoms_dist(1, sampler.max_atoms);
  std::uniform_real_distribution<double> position(-sampler.spread, sampler.spread);

  VerificationReport report;
  double max_ratio = 0.0;
  std::vector<double> mu, nu;
  for (int trial = 0; trial < sampler.trials; ++trial) {
    const int n = atoms_dist(engine);
    mu.resize(n);
    nu.resize(n);
    for (auto& a : mu) a = position(engine);
    for (auto& a : nu) a = position(engine);
    const double x = position(engine);
    if (const auto ratio = w1_lipschitz_ratio(drift, x, mu, nu); ratio && *ratio > max_ratio) {
      max_ratio = *ratio;
      report.arg_x = x;
    }
  }
  report.max_violation = max_ratio - lambda3;
  report.pass = max_ratio <= lambda3 * (1.0 + 1e-9);
  return report;
}

VerificationReport verify_sigma_bounds(const DiffusionSpec& diffusion, const Grid& grid) {
  const auto xs = grid.points();
  std::vector<double> sigmas(xs.size());
  std::transform(xs.begin(), xs.end(), sigmas.begin(), [&](double x) { return diffusion(x); });

  VerificationReport report;
  report.max_violation = -std::numeric_limits<double>::infinity();
  auto consider = [&](double violation, double x, double y) {
    if (violation > report.max_violation) {
      report.max_violation = violation;
      report.arg_x = x;
      report.arg_y = y;
    }
  };
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double sq = sigmas[i] * sigmas[i];
    consider(std::max(diffusion.kappa1 - sq, sq - diffusion.kappa2), xs[i], xs[i]);
  }
  for (std::size_t i = 0; i < xs.size(); ++i) {
    for (std::size_t j = i + 1; j < xs.size(); ++j) {
      consider(std::abs(sigmas[i] - sigmas[j]) - diffusion.lsigma * std::abs(xs[i] - xs[j]), xs[i], xs[j]);
    }
  }
  report.pass = report.max_violation <= kIdentityTolerance;
  return report;
}

NoiseSplit split_noise(const DiffusionSpec& diffusion, double eta, const Grid& grid) {
  require(eta > 0.0 && eta < 1.0, ErrorKind::InvalidArgument, "eta must lie in (0, 1)");
  require(diffusion.kappa1 > 0.0, ErrorKind::InvalidArgument, "kappa1 must be positive");
  double inf_sq = std::numeric_limits<double>::infinity();
  for (double x : grid.points()) {
    const double s = diffusion(x);
    inf_sq = std::min(inf_sq, s * s);
  }
  require(inf_sq > 0.0, ErrorKind::DegenerateDiffusion, "inf of sigma^2 over the grid is not positive");

  NoiseSplit split;
  split.alpha = eta * inf_sq / diffusion.kappa1;
  split.kappa1 = diffusion.kappa1;
  split.sigma1 = std::sqrt(split.alpha * diffusion.kappa1);
  split.sigma = diffusion.sigma;
  return split;
}

VerificationReport verify_split(const DiffusionSpec& diffusion, const NoiseSplit& split, const Grid& grid) {
  VerificationReport report;
  double inf_bar = std::numeric_limits<double>::infinity();
  for (double x : grid.points()) {
    const double s = diffusion(x);
    const double bar = split.bar_sigma(x);
    const double residual = std::abs(split.sigma1 * split.sigma1 + bar * bar - s * s);
    if (residual > report.max_violation) {
      report.max_violation = residual;
      report.arg_x = x;
    }
    inf_bar = std::min(inf_bar, split.bar_sigma_sq(x));
  }
  report.pass = report.max_violation <= kIdentityTolerance && inf_bar > 0.0;
  return report;
}

}  // namespace mkv
