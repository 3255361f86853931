#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <variant>
#include <vector>

#include "mkv/report.hpp"

namespace mkv {

/// Constants of the long-distance dissipativity condition
///   2(x-y)(b(x,mu)-b(y,mu)) <= (lambda1+lambda2)|x-y|^2 1{|x-y|<=ell0} - lambda2|x-y|^2
/// together with the measure-Lipschitz constant lambda3.
struct DissipativityParams {
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  double lambda3 = 0.0;
  double ell0 = 1.0;

  void validate() const;
  /// lambda2 > 2 lambda3, needed for uniform moment bounds.
  bool moments_admissible() const noexcept { return lambda2 > 2.0 * lambda3; }
};

enum class KernelKind { ScaledSine, Saturated, LinearMean };

/// Interaction kernel K with Lipschitz constant |kappa|:
///   ScaledSine  K(z) = sin(kappa z)
///   Saturated   K(z) = tanh(kappa z)
///   LinearMean  K(z) = kappa z
struct Kernel {
  KernelKind kind = KernelKind::ScaledSine;
  double kappa = 1.0;

  double operator()(double z) const noexcept;
  double lipschitz() const noexcept;
};

struct LinearDrift {
  double theta = -1.0;
};

/// b(x) = a x - b x^3
struct DoubleWellDrift {
  double a = 1.0;
  double b = 1.0;
};

/// b(x, mu) = sum_k confinement[k] x^k + weight * int K(x - y) mu(dy)
struct ConfinementPlusKernel {
  std::vector<double> confinement;
  Kernel kernel;
  double weight = 0.0;
};

class DriftSpec {
 public:
  using Family = std::variant<LinearDrift, DoubleWellDrift, ConfinementPlusKernel>;

  DriftSpec() : family_(LinearDrift{}) {}
  explicit DriftSpec(Family family);

  static DriftSpec linear(double theta) { return DriftSpec(LinearDrift{theta}); }
  static DriftSpec double_well(double a, double b) { return DriftSpec(DoubleWellDrift{a, b}); }
  static DriftSpec with_kernel(std::vector<double> confinement, Kernel kernel, double weight) {
    return DriftSpec(ConfinementPlusKernel{std::move(confinement), kernel, weight});
  }

  const Family& family() const noexcept { return family_; }
  /// Non-null iff the drift has convolution form.
  const ConfinementPlusKernel* convolution() const noexcept {
    return std::get_if<ConfinementPlusKernel>(&family_);
  }

  /// Measure-free part of the drift.
  double confinement(double x) const noexcept;
  /// (c(x) - c(y)) / (x - y) for the measure-free part c; c'(x) when x == y.
  double confinement_slope(double x, double y) const noexcept;
  /// Upper bound on ((b(x,mu)-b(y,mu))/(x-y)) - confinement_slope(x,y), uniform in mu.
  double interaction_slope_bound() const noexcept;
  bool measure_dependent() const noexcept;
  /// Constant L with |b(x,mu)-b(x,nu)| <= L W1(mu,nu).
  double measure_lipschitz() const noexcept;

  /// b(x, (1/n) sum delta_{atoms}) by direct summation.
  double operator()(double x, std::span<const double> atoms) const;

 private:
  Family family_;
};

struct ConstantSigma {
  double c = 1.0;
};

/// sigma(x) = a + b sin(x)
struct BoundedWaveSigma {
  double a = 2.0;
  double b = 1.0;
};

using SigmaFamily = std::variant<ConstantSigma, BoundedWaveSigma>;

double sigma_value(const SigmaFamily& family, double x) noexcept;

struct DiffusionSpec {
  SigmaFamily sigma = ConstantSigma{};
  double kappa1 = 1.0;  // lower bound on sigma^2
  double kappa2 = 1.0;  // upper bound on sigma^2
  double lsigma = 0.0;  // Lipschitz constant of sigma
  double sigma0 = 0.0;  // common-noise intensity

  double operator()(double x) const noexcept { return sigma_value(sigma, x); }
  void validate() const;
};

/// sigma(x)^2 = sigma1^2 + bar_sigma(x)^2 with sigma1^2 = alpha * kappa1.
struct NoiseSplit {
  double alpha = 0.0;
  double sigma1 = 0.0;
  double kappa1 = 0.0;
  SigmaFamily sigma = ConstantSigma{0.0};

  double bar_sigma_sq(double x) const noexcept;
  double bar_sigma(double x) const noexcept;
};

struct ModelSpec {
  DriftSpec drift;
  DiffusionSpec diffusion;
  DissipativityParams dissipativity;
  std::optional<NoiseSplit> split;

  /// Without a split the whole of sigma is treated as the unreflected part.
  double sigma1() const noexcept { return split ? split->sigma1 : 0.0; }
  double bar_sigma(double x) const noexcept;
  double sigma0() const noexcept { return diffusion.sigma0; }
  /// sigma0^2 + sigma1^2, the noise that drives the contraction rate.
  double noise_sq() const noexcept { return sigma0() * sigma0() + sigma1() * sigma1(); }
};

/// Closed uniform grid lo, lo+step, ..., <= hi.
struct Grid {
  double lo = -20.0;
  double hi = 20.0;
  double step = 0.05;

  std::vector<double> points() const;
};

constexpr double kIdentityTolerance = 1e-12;

VerificationReport verify_dissipativity(const DriftSpec& drift, const DissipativityParams& params,
                                        const Grid& grid = {});

/// |b(x,mu) - b(x,nu)| / W1(mu,nu) for equal-size atom sets; nullopt when W1 = 0.
std::optional<double> w1_lipschitz_ratio(const DriftSpec& drift, double x, std::span<const double> mu,
                                         std::span<const double> nu);

struct MeasurePairSampler {
  std::uint64_t seed = 20240917;
  int trials = 4000;
  int max_atoms = 8;
  double spread = 5.0;
};

VerificationReport verify_w1_lipschitz(const DriftSpec& drift, double lambda3,
                                       const MeasurePairSampler& sampler = {});

VerificationReport verify_sigma_bounds(const DiffusionSpec& diffusion, const Grid& grid = {});

constexpr double kDefaultEta = 0.9;

/// Chooses alpha = eta * inf_grid(sigma^2) / kappa1 so that inf bar_sigma^2 = (1-eta) inf sigma^2.
NoiseSplit split_noise(const DiffusionSpec& diffusion, double eta = kDefaultEta, const Grid& grid = {});

/// max over grid of |sigma1^2 + bar_sigma(x)^2 - sigma(x)^2|.
VerificationReport verify_split(const DiffusionSpec& diffusion, const NoiseSplit& split, const Grid& grid = {});

}  // namespace mkv
