#include "mkv/rates.hpp"

#include <algorithm>
#include <cmath>

#include "mkv/coupling.hpp"
#include "mkv/error.hpp"

namespace mkv {

namespace {

double dissipation_cap(const DissipativityParams& p) { return std::min(p.lambda1, p.lambda2 / 2.0); }

}  // namespace

double lambda0_star_from_constants(double c1, double c2, const DissipativityParams& params) {
  const double ell0 = params.ell0;
  return c2 * ell0 / (1.0 - std::exp(-c1 * ell0) + c2 * ell0) * dissipation_cap(params) -
         (1.0 + c1 / c2) * params.lambda3;
}

double lambda0_star_closed_form(double c1, const DissipativityParams& params) {
  const double ell0 = params.ell0;
  return ell0 / (ell0 + std::expm1(c1 * ell0) / c1) * dissipation_cap(params) -
         (1.0 + std::exp(c1 * ell0)) * params.lambda3;
}

RateBundle rate_constants(const DissipativityParams& params, double sigma0, double sigma1) {
  params.validate();
  RateBundle bundle;
  bundle.noise_sq = sigma0 * sigma0 + sigma1 * sigma1;
  require(bundle.noise_sq > 0.0, ErrorKind::DegenerateNoise, "sigma0^2 + sigma1^2 = 0 leaves c1 undefined");

  const auto distance = ConcaveDistance::from_rates(params, bundle.noise_sq);
  bundle.c1 = distance.c1;
  bundle.c2 = distance.c2;
  bundle.lambda0_dstar = lambda0_dstar(distance, params, bundle.noise_sq);
  bundle.lambda0_star = bundle.lambda0_dstar - (1.0 + bundle.c1 / bundle.c2) * params.lambda3;
  bundle.lambda_star = (params.lambda2 - 2.0 * params.lambda3) / 2.0;
  bundle.lambda3_star =
      std::min(bundle.lambda0_dstar / (1.0 + std::exp(bundle.c1 * params.ell0)), params.lambda2 / 2.0);
  return bundle;
}

VerificationReport remark_identity_check(const RateBundle& bundle, const DissipativityParams& params) {
  const double from_constants = lambda0_star_from_constants(bundle.c1, bundle.c2, params);
  const double closed = lambda0_star_closed_form(bundle.c1, params);
  VerificationReport report;
  report.max_violation = std::max(std::abs(from_constants - closed), std::abs(bundle.lambda0_star - closed));
  report.arg_x = from_constants;
  report.arg_y = closed;
  report.pass = report.max_violation <= 1e-12;
  return report;
}

std::vector<RateSample> rate_noise_sweep(const DissipativityParams& params, const std::vector<double>& noise_sq_list) {
  require(!noise_sq_list.empty(), ErrorKind::InvalidArgument, "noise sweep needs at least one value");
  for (std::size_t k = 0; k < noise_sq_list.size(); ++k) {
    require(noise_sq_list[k] > 0.0, ErrorKind::InvalidArgument, "noise values must be positive");
    require(k == 0 || noise_sq_list[k] > noise_sq_list[k - 1], ErrorKind::InvalidArgument,
            "noise values must be strictly increasing");
  }
  std::vector<RateSample> samples;
  samples.reserve(noise_sq_list.size());
  for (double noise_sq : noise_sq_list) {
    const auto bundle = rate_constants(params, std::sqrt(noise_sq), 0.0);
    samples.push_back({noise_sq, bundle.c1, bundle.lambda0_star});
  }
  return samples;
}

double moment_rate(const DissipativityParams& params) {
  require(params.lambda2 > 2.0 * params.lambda3, ErrorKind::PreconditionViolated,
          "uniform moment bounds need lambda2 > 2 lambda3");
  return (params.lambda2 - 2.0 * params.lambda3) / 2.0;
}

}  // namespace mkv
