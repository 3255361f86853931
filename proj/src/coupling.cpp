#include "mkv/coupling.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "mkv/error.hpp"

namespace mkv {

CutoffParam::CutoffParam(double eps) : epsilon(eps) {
  require(eps > 0.0 && std::isfinite(eps), ErrorKind::InvalidArgument, "epsilon must be positive");
}

double cutoff(const CutoffParam& param, double r) {
  require(r >= 0.0, ErrorKind::InvalidArgument, "cutoff needs r >= 0");
  const double eps = param.epsilon;
  if (r <= eps) return 0.0;
  if (r >= 2.0 * eps) return 1.0;
  return 1.0 - std::exp((r - eps) / (r - 2.0 * eps));
}

double reflection_factor(const CutoffParam& param, std::span<const double> z) {
  require(!z.empty(), ErrorKind::InvalidArgument, "reflection factor needs at least one coordinate");
  double sum = 0.0;
  for (double v : z) sum += std::abs(v);
  return 1.0 - 2.0 * cutoff(param, sum / static_cast<double>(z.size()));
}

double reflection_factor(const CutoffParam& param, std::span<const double> x, std::span<const double> y) {
  require(!x.empty() && x.size() == y.size(), ErrorKind::InvalidArgument,
          "reflection factor needs two nonempty systems of equal size");
  double sum = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) sum += std::abs(x[i] - y[i]);
  return 1.0 - 2.0 * cutoff(param, sum / static_cast<double>(x.size()));
}

ConcaveDistance ConcaveDistance::from_rates(const DissipativityParams& params, double noise_sq) {
  require(noise_sq > 0.0, ErrorKind::DegenerateNoise, "sigma0^2 + sigma1^2 must be positive");
  const double c1 = params.lambda1 * params.ell0 / noise_sq;
  return {c1, c1 * std::exp(-c1 * params.ell0)};
}

DistanceDerivatives ConcaveDistance::eval(double r) const noexcept {
  const double decay = std::exp(-c1 * r);
  return {1.0 - decay + c2 * r, c1 * decay + c2, -c1 * c1 * decay};
}

double psi(const ConcaveDistance& d, const DissipativityParams& params, double noise_sq, double r) {
  const auto [f, df, d2f] = d.eval(r);
  const double window = r <= params.ell0 ? params.lambda1 + params.lambda2 : 0.0;
  return 0.5 * df * (window - params.lambda2) * r + 2.0 * noise_sq * d2f;
}

double lambda0_dstar(const ConcaveDistance& d, const DissipativityParams& params, double noise_sq) {
  require(noise_sq > 0.0, ErrorKind::DegenerateNoise, "sigma0^2 + sigma1^2 must be positive");
  require(std::abs(d.c2 - d.c1 * std::exp(-d.c1 * params.ell0)) <= 1e-12, ErrorKind::InconsistentConstants,
          "c2 must equal c1 exp(-c1 ell0)");
  const double denominator = d.eval(params.ell0).f;
  const double short_range = d.c1 * d.c2 * noise_sq / denominator;
  const double long_range = d.c2 * params.lambda2 * params.ell0 / (2.0 * denominator);
  return std::min(short_range, long_range);
}

VerificationReport verify_psi_bound(const ConcaveDistance& d, const DissipativityParams& params, double noise_sq,
                                    const PsiGrid& grid, std::optional<double> rate_override) {
  const double r_max = grid.r_max > 0.0 ? grid.r_max : 20.0 * params.ell0;
  require(r_max >= 10.0 * params.ell0, ErrorKind::InvalidArgument, "psi grid must reach at least 10 ell0");
  require(grid.points >= 2, ErrorKind::InvalidArgument, "psi grid needs at least two points");
  const double rate = rate_override.value_or(lambda0_dstar(d, params, noise_sq));

  std::vector<double> rs;
  rs.reserve(static_cast<std::size_t>(grid.points) + 3);
  for (int k = 0; k < grid.points; ++k) rs.push_back(r_max * k / (grid.points - 1));
  rs.push_back(params.ell0);
  rs.push_back(std::nextafter(params.ell0, 0.0));
  rs.push_back(std::nextafter(params.ell0, std::numeric_limits<double>::infinity()));

  VerificationReport report;
  report.max_violation = -std::numeric_limits<double>::infinity();
  for (double r : rs) {
    const double value = psi(d, params, noise_sq, r) + rate * d.eval(r).f;
    if (value > report.max_violation) {
      report.max_violation = value;
      report.arg_x = r;
    }
  }
  report.pass = report.max_violation <= 1e-10;
  return report;
}

}  // namespace mkv
