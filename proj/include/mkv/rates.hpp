#pragma once

#include <vector>

#include "mkv/model.hpp"
#include "mkv/report.hpp"

namespace mkv {

/// Closed-form contraction and moment constants for one parameter set.
struct RateBundle {
  double c1 = 0.0;
  double c2 = 0.0;
  double lambda0_star = 0.0;   // contraction rate; may be <= 0 when lambda3 is too large
  double lambda0_dstar = 0.0;  // rate of the Lyapunov inequality psi <= -lambda f
  double lambda_star = 0.0;    // moment decay rate (lambda2 - 2 lambda3) / 2
  double lambda3_star = 0.0;   // admissible lambda3 form the open interval [0, lambda3_star)
  double noise_sq = 0.0;       // sigma0^2 + sigma1^2
};

RateBundle rate_constants(const DissipativityParams& params, double sigma0, double sigma1);

/// c2 ell0 / (1 - exp(-c1 ell0) + c2 ell0) (lambda1 ^ lambda2/2) - (1 + c1/c2) lambda3
double lambda0_star_from_constants(double c1, double c2, const DissipativityParams& params);

/// ell0 (ell0 + (exp(c1 ell0) - 1)/c1)^{-1} (lambda1 ^ lambda2/2) - (1 + exp(c1 ell0)) lambda3
double lambda0_star_closed_form(double c1, const DissipativityParams& params);

/// Recomputes lambda0* from the bundle's c1, c2 and from the c1-only closed form;
/// passes iff both agree with each other and with the stored value to 1e-12.
VerificationReport remark_identity_check(const RateBundle& bundle, const DissipativityParams& params);

struct RateSample {
  double noise_sq;
  double c1;
  double lambda0_star;
};

std::vector<RateSample> rate_noise_sweep(const DissipativityParams& params, const std::vector<double>& noise_sq_list);

/// (lambda2 - 2 lambda3) / 2; requires lambda2 > 2 lambda3.
double moment_rate(const DissipativityParams& params);

}  // namespace mkv
