#pragma once

#include <optional>
#include <span>

#include "mkv/model.hpp"
#include "mkv/report.hpp"

namespace mkv {

struct CutoffParam {
  double epsilon = 0.01;

  explicit CutoffParam(double eps);
};

/// h_eps(r): 0 on [0, eps], 1 - exp((r-eps)/(r-2eps)) on (eps, 2eps), 1 on [2eps, inf).
double cutoff(const CutoffParam& param, double r);

/// 1 - 2 h_eps(mean |z_j|). +1 means synchronous increments, -1 full reflection.
double reflection_factor(const CutoffParam& param, std::span<const double> z);

/// Same as reflection_factor(param, x - y) without materializing the difference.
double reflection_factor(const CutoffParam& param, std::span<const double> x, std::span<const double> y);

struct DistanceDerivatives {
  double f;
  double df;
  double d2f;
};

/// f(r) = 1 - exp(-c1 r) + c2 r, concave and increasing.
struct ConcaveDistance {
  double c1 = 1.0;
  double c2 = 1.0;

  /// Canonical constants: c1 = lambda1 ell0 / noise_sq, c2 = c1 exp(-c1 ell0).
  static ConcaveDistance from_rates(const DissipativityParams& params, double noise_sq);

  DistanceDerivatives eval(double r) const noexcept;
};

inline DistanceDerivatives concave_distance_eval(const ConcaveDistance& d, double r) { return d.eval(r); }

/// psi(r) = 1/2 f'(r) ((lambda1+lambda2) 1{r<=ell0} - lambda2) r + 2 noise_sq f''(r)
double psi(const ConcaveDistance& d, const DissipativityParams& params, double noise_sq, double r);

/// Largest lambda with psi(r) <= -lambda f(r) delivered by the canonical constants.
double lambda0_dstar(const ConcaveDistance& d, const DissipativityParams& params, double noise_sq);

struct PsiGrid {
  double r_max = 0.0;  // 0 selects 20 * ell0
  int points = 100000;
};

/// max over r of psi(r) + rate * f(r), with rate = lambda0_dstar unless overridden.
/// The grid always contains ell0 and its two one-ulp neighbours.
VerificationReport verify_psi_bound(const ConcaveDistance& d, const DissipativityParams& params, double noise_sq,
                                    const PsiGrid& grid = {}, std::optional<double> rate_override = std::nullopt);

}  // namespace mkv
