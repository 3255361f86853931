#include "mkv/metrics.hpp"

#include <algorithm>
#include <boost/math/tools/minima.hpp>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "mkv/error.hpp"
#include "mkv/parallel.hpp"

namespace mkv {

double w1_sorted(std::span<const double> a, std::span<const double> b) {
  require(!a.empty(), ErrorKind::InvalidArgument, "W1 needs at least one atom");
  require(a.size() == b.size(), ErrorKind::InvalidArgument, "W1 is only defined here for equal sample sizes");
  std::vector<double> sa(a.begin(), a.end());
  std::vector<double> sb(b.begin(), b.end());
  std::sort(sa.begin(), sa.end());
  std::sort(sb.begin(), sb.end());
  double sum = 0.0;
  for (std::size_t i = 0; i < sa.size(); ++i) sum += std::abs(sa[i] - sb[i]);
  return sum / static_cast<double>(sa.size());
}

double w1_bruteforce(std::span<const double> a, std::span<const double> b) {
  require(!a.empty() && a.size() == b.size(), ErrorKind::InvalidArgument, "need equal nonempty samples");
  require(a.size() <= 8, ErrorKind::SizeLimit, "brute-force W1 is limited to 8 atoms");
  std::vector<std::size_t> perm(a.size());
  std::iota(perm.begin(), perm.end(), 0);
  double best = std::numeric_limits<double>::infinity();
  do {
    double sum = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) sum += std::abs(a[i] - b[perm[i]]);
    best = std::min(best, sum);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best / static_cast<double>(a.size());
}

void DistanceSeries::validate() const {
  require(times.size() == values.size() && times.size() == std_error.size(), ErrorKind::InvalidArgument,
          "series columns differ in length");
  for (std::size_t k = 1; k < times.size(); ++k) {
    require(times[k] > times[k - 1], ErrorKind::InvalidArgument, "series times must be strictly increasing");
  }
}

DistanceSeries ReplicaSeries::summarize() const {
  DistanceSeries out;
  out.times = times;
  out.values.assign(times.size(), 0.0);
  out.std_error.assign(times.size(), 0.0);
  const auto replicas = static_cast<double>(values.size());
  for (std::size_t k = 0; k < times.size(); ++k) {
    double sum = 0.0;
    for (const auto& path : values) sum += path[k];
    const double mean = sum / replicas;
    double sq = 0.0;
    for (const auto& path : values) sq += (path[k] - mean) * (path[k] - mean);
    out.values[k] = mean;
    out.std_error[k] = values.size() > 1 ? std::sqrt(sq / (replicas - 1.0) / replicas) : 0.0;
  }
  return out;
}

ReplicaSeries coupled_w1_paths(const ModelSpec& model, const SimConfig& config, const InitialLaw& init_a,
                               const InitialLaw& init_b, const CutoffParam& epsilon, unsigned threads,
                               CouplingVariant variant) {
  config.validate();
  struct Path {
    std::vector<double> times;
    std::vector<double> values;
  };
  auto paths = parallel_map(static_cast<std::size_t>(config.replicas), threads, [&](std::size_t r) {
    Path path;
    simulate_coupled(
        model, config, init_a, init_b, epsilon, static_cast<std::uint32_t>(r),
        [&](const CoupledState& s) {
          path.times.push_back(s.x.time);
          path.values.push_back(w1_sorted(s.x.positions, s.y.positions));
        },
        variant);
    return path;
  });
  ReplicaSeries out;
  out.times = paths.front().times;
  out.values.reserve(paths.size());
  for (auto& p : paths) out.values.push_back(std::move(p.values));
  return out;
}

DistanceSeries cal_w1_estimate(const ModelSpec& model, const SimConfig& config, const InitialLaw& init_a,
                               const InitialLaw& init_b, const CutoffParam& epsilon, unsigned threads) {
  require(config.replicas >= 2, ErrorKind::InvalidArgument, "W1 estimation needs at least two replicas");
  return coupled_w1_paths(model, config, init_a, init_b, epsilon, threads).summarize();
}

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  require(x.size() == y.size() && x.size() >= 2, ErrorKind::InvalidArgument, "line fit needs two points");
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  require(sxx > 0.0, ErrorKind::InvalidArgument, "line fit needs distinct abscissae");
  LineFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  fit.r2 = syy > 0.0 ? (sxy * sxy) / (sxx * syy) : 1.0;
  return fit;
}

namespace {

struct PlateauModel {
  double amplitude = 0.0;
  double plateau = 0.0;
  double sse = std::numeric_limits<double>::infinity();
};

// For a fixed rate the model A exp(-rate (t - t0)) + F is linear in (A, F);
// solve it by least squares with F >= 0.
PlateauModel solve_linear_part(const DistanceSeries& s, double rate) {
  const double t0 = s.times.front();
  double see = 0.0, se = 0.0, sed = 0.0, sd = 0.0;
  const double n = static_cast<double>(s.times.size());
  std::vector<double> basis(s.times.size());
  for (std::size_t k = 0; k < s.times.size(); ++k) {
    basis[k] = std::exp(-rate * (s.times[k] - t0));
    see += basis[k] * basis[k];
    se += basis[k];
    sed += basis[k] * s.values[k];
    sd += s.values[k];
  }
  PlateauModel m;
  const double det = see * n - se * se;
  if (det > 1e-300) {
    m.amplitude = (sed * n - se * sd) / det;
    m.plateau = (see * sd - se * sed) / det;
  }
  if (!(det > 1e-300) || m.plateau < 0.0) {
    m.plateau = 0.0;
    m.amplitude = sed / see;
  }
  m.sse = 0.0;
  for (std::size_t k = 0; k < s.times.size(); ++k) {
    const double r = s.values[k] - m.amplitude * basis[k] - m.plateau;
    m.sse += r * r;
  }
  return m;
}

}  // namespace

DecayFit fit_decay(const DistanceSeries& series) {
  series.validate();
  require(series.times.size() >= 8, ErrorKind::InvalidArgument, "decay fit needs at least 8 snapshots");
  for (double v : series.values) {
    require(std::isfinite(v) && v >= 0.0, ErrorKind::InvalidArgument, "decay fit needs nonnegative values");
  }
  const std::size_t n = series.times.size();
  const double span = series.times.back() - series.times.front();

  // Coarse log-spaced scan of the rate, then Brent refinement around the best cell.
  const double lo = 1e-3 / span, hi = 1e3 / span;
  constexpr int kScan = 241;
  std::vector<double> rates(kScan);
  int best = 0;
  double best_sse = std::numeric_limits<double>::infinity();
  for (int k = 0; k < kScan; ++k) {
    rates[k] = lo * std::pow(hi / lo, static_cast<double>(k) / (kScan - 1));
    const double sse = solve_linear_part(series, rates[k]).sse;
    if (sse < best_sse) {
      best_sse = sse;
      best = k;
    }
  }
  const double a = rates[std::max(best - 1, 0)];
  const double b = rates[std::min(best + 1, kScan - 1)];
  const auto [rate_nls, sse] = boost::math::tools::brent_find_minima(
      [&](double log_rate) { return solve_linear_part(series, std::exp(log_rate)).sse; }, std::log(a), std::log(b),
      50);
  (void)sse;
  const auto model = solve_linear_part(series, std::exp(rate_nls));

  DecayFit fit;
  fit.plateau = model.plateau;
  const std::size_t tail = std::max<std::size_t>(1, (n + 4) / 5);
  double tail_se = 0.0;
  for (std::size_t k = n - tail; k < n; ++k) tail_se += series.std_error[k];
  fit.plateau_stderr = tail_se / static_cast<double>(tail);

  // Leading samples above twice the plateau whose excess is resolved by the
  // Monte Carlo error (excess > 2 stderr).
  std::size_t window = 0;
  while (window < n && series.values[window] > 2.0 * fit.plateau &&
         series.values[window] - fit.plateau > 2.0 * series.std_error[window]) {
    ++window;
  }
  if (model.amplitude <= 0.0 || window < 4) {
    throw Error(ErrorKind::NoDecayWindow,
                "no samples above twice the plateau; increase the particle count or lower epsilon");
  }

  std::vector<double> t(series.times.begin(), series.times.begin() + static_cast<std::ptrdiff_t>(window));
  std::vector<double> y(window);
  for (std::size_t k = 0; k < window; ++k) y[k] = std::log(std::max(series.values[k] - fit.plateau, 1e-12));
  const auto line = fit_line(t, y);
  fit.rate = -line.slope;
  fit.intercept = line.intercept;
  fit.r2 = line.r2;
  fit.window_lo = t.front();
  fit.window_hi = t.back();
  fit.window_samples = window;
  return fit;
}

DecayFit fit_decay(const ReplicaSeries& replicas, int bootstrap, std::uint64_t seed) {
  require(replicas.values.size() >= 2, ErrorKind::InvalidArgument, "bootstrap needs at least two replicas");
  auto fit = fit_decay(replicas.summarize());
  if (bootstrap < 2) return fit;

  std::mt19937_64 engine(seed);
  std::uniform_int_distribution<std::size_t> pick(0, replicas.values.size() - 1);
  ReplicaSeries resampled;
  resampled.times = replicas.times;
  resampled.values.resize(replicas.values.size());
  std::vector<double> plateaus;
  plateaus.reserve(static_cast<std::size_t>(bootstrap));
  for (int b = 0; b < bootstrap; ++b) {
    for (auto& path : resampled.values) path = replicas.values[pick(engine)];
    try {
      plateaus.push_back(fit_decay(resampled.summarize()).plateau);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::NoDecayWindow) throw;
    }
  }
  if (plateaus.size() >= 2) {
    const double m = std::accumulate(plateaus.begin(), plateaus.end(), 0.0) / static_cast<double>(plateaus.size());
    double var = 0.0;
    for (double p : plateaus) var += (p - m) * (p - m);
    fit.plateau_stderr = std::sqrt(var / static_cast<double>(plateaus.size() - 1));
  }
  return fit;
}

namespace {

Ensemble final_state(const ModelSpec& model, const SimConfig& base, const InitialLaw& init, std::size_t n,
                     double t_end, std::uint32_t replica) {
  SimConfig config = base;
  config.particles = n;
  config.t_end = t_end;
  config.save_every = std::numeric_limits<int>::max();
  return simulate_trajectory(model, config, init, replica).snapshots.back();
}

}  // namespace

std::vector<double> chaos_replica_errors(const ModelSpec& model, const SimConfig& config, const InitialLaw& init,
                                         const std::vector<std::size_t>& n_list, std::size_t n_ref, double t_probe,
                                         std::uint32_t replica) {
  const auto reference = final_state(model, config, init, n_ref, t_probe, replica);
  std::vector<double> errors;
  errors.reserve(n_list.size());
  for (std::size_t n : n_list) {
    require(n <= n_ref, ErrorKind::InvalidArgument, "particle count exceeds the reference size");
    const auto system = final_state(model, config, init, n, t_probe, replica);
    errors.push_back(
        w1_sorted(std::span<const double>(reference.positions).first(n), std::span<const double>(system.positions)));
  }
  return errors;
}

std::vector<ChaosPoint> chaos_error(const ModelSpec& model, const SimConfig& config, const InitialLaw& init,
                                    const std::vector<std::size_t>& n_list, std::size_t n_ref, double t_probe,
                                    unsigned threads) {
  config.validate();
  require(!n_list.empty(), ErrorKind::InvalidArgument, "chaos needs at least one particle count");
  for (std::size_t k = 0; k < n_list.size(); ++k) {
    require(n_list[k] >= 1 && (k == 0 || n_list[k] > n_list[k - 1]), ErrorKind::InvalidArgument,
            "particle counts must be strictly increasing");
  }
  require(n_ref >= 4 * n_list.back(), ErrorKind::InvalidArgument, "reference size must be at least 4 max(n)");
  require(t_probe >= 0.0, ErrorKind::InvalidArgument, "probe time must be nonnegative");

  const auto per_replica = parallel_map(static_cast<std::size_t>(config.replicas), threads, [&](std::size_t r) {
    return chaos_replica_errors(model, config, init, n_list, n_ref, t_probe, static_cast<std::uint32_t>(r));
  });
  ReplicaSeries table;
  table.times.resize(n_list.size());
  std::iota(table.times.begin(), table.times.end(), 0.0);
  table.values = per_replica;
  const auto summary = table.summarize();

  std::vector<ChaosPoint> points;
  for (std::size_t k = 0; k < n_list.size(); ++k) points.push_back({n_list[k], summary.values[k], summary.std_error[k]});
  return points;
}

LeaveOneOutScaling leave_one_out_scaling(const ModelSpec& model, const SimConfig& config, const InitialLaw& init,
                                         const std::vector<std::size_t>& n_list, const LeaveOneOutOptions& options) {
  const auto* conv = model.drift.convolution();
  require(conv != nullptr, ErrorKind::UnsupportedFamily, "leave-one-out scaling needs a convolution drift");
  require(!n_list.empty(), ErrorKind::InvalidArgument, "need at least one particle count");
  for (std::size_t n : n_list) require(n >= 2, ErrorKind::InvalidArgument, "leave-one-out needs n >= 2");
  require(options.repeats >= 2, ErrorKind::InvalidArgument, "need at least two repeats");

  const auto reference = final_state(model, config, init, options.reference_size, options.probe_time, 0);
  const std::span<const double> atoms(reference.positions);
  const InteractionField reference_field(model.drift, atoms);

  double ref_mean = 0.0, ref_var = 0.0;
  for (double v : atoms) ref_mean += v;
  ref_mean /= static_cast<double>(atoms.size());
  for (double v : atoms) ref_var += (v - ref_mean) * (v - ref_mean);
  ref_var /= static_cast<double>(atoms.size());

  const Kernel& kernel = conv->kernel;
  const bool linear = kernel.kind == KernelKind::LinearMean;
  const NormalStream resample(config.master_seed, 0, StreamRole::Resample);
  const auto pick = [&](double u) {
    return std::min(static_cast<std::size_t>(u * static_cast<double>(atoms.size())), atoms.size() - 1);
  };

  LeaveOneOutScaling result;
  std::vector<double> sample, loo;
  for (std::size_t n : n_list) {
    sample.resize(n);
    loo.resize(n);
    std::vector<double> per_repeat(static_cast<std::size_t>(options.repeats));
    for (int rep = 0; rep < options.repeats; ++rep) {
      const std::uint64_t counter = (static_cast<std::uint64_t>(n) << 24) | static_cast<std::uint64_t>(rep);
      for (std::size_t j = 0; j < n; j += 2) {
        const auto [u, v] = resample.uniform_pair(counter, static_cast<std::uint32_t>(j / 2));
        sample[j] = atoms[pick(u)];
        if (j + 1 < n) sample[j + 1] = atoms[pick(v)];
      }
      // K(0) = 0 for every kernel, so the full sum equals the sum over j != i.
      const double inv = 1.0 / static_cast<double>(n - 1);
      switch (kernel.kind) {
        case KernelKind::LinearMean: {
          const double total = std::accumulate(sample.begin(), sample.end(), 0.0);
          for (std::size_t i = 0; i < n; ++i) {
            loo[i] = kernel.kappa * (sample[i] - (total - sample[i]) * inv);
          }
          break;
        }
        case KernelKind::ScaledSine: {
          double sum_cos = 0.0, sum_sin = 0.0;
          for (double x : sample) {
            sum_cos += std::cos(kernel.kappa * x);
            sum_sin += std::sin(kernel.kappa * x);
          }
          for (std::size_t i = 0; i < n; ++i) {
            const double c = std::cos(kernel.kappa * sample[i]);
            const double s = std::sin(kernel.kappa * sample[i]);
            loo[i] = (s * (sum_cos - c) - c * (sum_sin - s)) * inv;
          }
          break;
        }
        case KernelKind::Saturated:
          for (std::size_t i = 0; i < n; ++i) {
            double sum = 0.0;
            for (double y : sample) sum += kernel(sample[i] - y);
            loo[i] = sum * inv;
          }
          break;
      }
      double sq = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const double full = reference_field(sample[i]) - model.drift.confinement(sample[i]);
        const double diff = conv->weight * loo[i] - full;
        sq += diff * diff;
      }
      per_repeat[static_cast<std::size_t>(rep)] = sq / static_cast<double>(n);
    }
    const double reps = static_cast<double>(options.repeats);
    const double mean = std::accumulate(per_repeat.begin(), per_repeat.end(), 0.0) / reps;
    double var = 0.0;
    for (double v : per_repeat) var += (v - mean) * (v - mean);
    LeaveOneOutPoint point;
    point.n = n;
    point.mean_sq_error = mean;
    point.std_error = std::sqrt(var / (reps - 1.0) / reps);
    point.closed_form = linear ? conv->weight * conv->weight * kernel.kappa * kernel.kappa * ref_var /
                                     static_cast<double>(n - 1)
                               : std::numeric_limits<double>::quiet_NaN();
    result.points.push_back(point);
  }

  const double nan = std::numeric_limits<double>::quiet_NaN();
  result.slope = nan;
  result.closed_form_slope = nan;
  if (result.points.size() >= 2) {
    std::vector<double> log_n, log_err, log_closed;
    bool positive = true;
    for (const auto& p : result.points) {
      log_n.push_back(std::log(static_cast<double>(p.n)));
      positive = positive && p.mean_sq_error > 0.0;
      log_err.push_back(std::log(p.mean_sq_error));
      log_closed.push_back(std::log(p.closed_form));
    }
    if (positive) result.slope = fit_line(log_n, log_err).slope;
    if (linear && ref_var > 0.0) result.closed_form_slope = fit_line(log_n, log_closed).slope;
  }
  return result;
}

std::vector<MomentSample> moment_track(const RunRecord& run) {
  require(!run.snapshots.empty(), ErrorKind::InvalidArgument, "run record has no snapshots");
  std::vector<MomentSample> out;
  out.reserve(run.snapshots.size());
  for (const auto& e : run.snapshots) {
    MomentSample m;
    m.t = e.time;
    for (double x : e.positions) {
      m.mean_abs += std::abs(x);
      m.max_abs = std::max(m.max_abs, std::abs(x));
    }
    m.mean_abs /= static_cast<double>(e.size());
    out.push_back(m);
  }
  return out;
}

}  // namespace mkv
