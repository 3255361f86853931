#pragma once

#include <cstddef>
#include <vector>

#include "mkv/simulate.hpp"
#include "mkv/wasserstein.hpp"

namespace mkv {

struct DistanceSeries {
  std::vector<double> times;
  std::vector<double> values;
  std::vector<double> std_error;

  void validate() const;
};

/// Per-replica series sharing one time axis; values[replica][snapshot].
struct ReplicaSeries {
  std::vector<double> times;
  std::vector<std::vector<double>> values;

  /// Mean and standard error across replicas, accumulated in replica order.
  DistanceSeries summarize() const;
};

/// W1 between the x and y empirical measures of the coupled system, per replica.
ReplicaSeries coupled_w1_paths(const ModelSpec& model, const SimConfig& config, const InitialLaw& init_a,
                               const InitialLaw& init_b, const CutoffParam& epsilon, unsigned threads = 0,
                               CouplingVariant variant = CouplingVariant::Faithful);

/// Replica average of W1(x-empirical, y-empirical): an upper-bound estimator
/// of the distance between the laws of the two conditional measures.
DistanceSeries cal_w1_estimate(const ModelSpec& model, const SimConfig& config, const InitialLaw& init_a,
                               const InitialLaw& init_b, const CutoffParam& epsilon, unsigned threads = 0);

/// d(t) ~ A exp(-rate t) + plateau. `intercept` is log A of the windowed
/// log-linear fit; window_lo/hi bound the samples with d > 2 plateau.
struct DecayFit {
  double rate = 0.0;
  double intercept = 0.0;
  double plateau = 0.0;
  double plateau_stderr = 0.0;
  double window_lo = 0.0;
  double window_hi = 0.0;
  double r2 = 0.0;
  std::size_t window_samples = 0;
};

/// Fits the replica mean. The plateau is the least-squares F of
/// A exp(-rate t) + F (F >= 0); the rate comes from a log-linear fit over the
/// leading samples with d > 2F and d - F > 2 stderr. plateau_stderr is the
/// mean standard error over the final 20% of samples.
DecayFit fit_decay(const DistanceSeries& series);

/// Same fit on the replica mean, with plateau_stderr from a replica bootstrap.
DecayFit fit_decay(const ReplicaSeries& replicas, int bootstrap = 200, std::uint64_t seed = 1);

struct ChaosPoint {
  std::size_t n = 0;
  double error = 0.0;
  double std_error = 0.0;
};

/// For one replica: W1 at t_probe between the leading n particles of the
/// reference system and the n-particle system, for each n in n_list. All
/// systems share the common noise and the first n idiosyncratic streams.
std::vector<double> chaos_replica_errors(const ModelSpec& model, const SimConfig& config, const InitialLaw& init,
                                         const std::vector<std::size_t>& n_list, std::size_t n_ref, double t_probe,
                                         std::uint32_t replica);

/// Requires n_list strictly increasing and n_ref >= 4 max(n_list).
std::vector<ChaosPoint> chaos_error(const ModelSpec& model, const SimConfig& config, const InitialLaw& init,
                                    const std::vector<std::size_t>& n_list, std::size_t n_ref, double t_probe,
                                    unsigned threads = 0);

struct LeaveOneOutOptions {
  std::size_t reference_size = 16384;
  double probe_time = 1.0;
  int repeats = 4096;
};

struct LeaveOneOutPoint {
  std::size_t n = 0;
  double mean_sq_error = 0.0;
  double std_error = 0.0;
  double closed_form = 0.0;  // LinearMean only: weight^2 kappa^2 Var(ref) / (n-1); NaN otherwise
};

struct LeaveOneOutScaling {
  double slope = 0.0;              // log-log slope of mean_sq_error vs n; NaN if all errors vanish
  double closed_form_slope = 0.0;  // NaN unless the kernel is LinearMean
  std::vector<LeaveOneOutPoint> points;
};

/// Mean of |b(X_i, leave-one-out measure of n draws) - b(X_i, reference measure)|^2,
/// with draws taken i.i.d. from a reference ensemble simulated along one common-noise path.
LeaveOneOutScaling leave_one_out_scaling(const ModelSpec& model, const SimConfig& config, const InitialLaw& init,
                                         const std::vector<std::size_t>& n_list,
                                         const LeaveOneOutOptions& options = {});

struct MomentSample {
  double t = 0.0;
  double mean_abs = 0.0;
  double max_abs = 0.0;
};

std::vector<MomentSample> moment_track(const RunRecord& run);

/// Ordinary least squares y = intercept + slope x.
struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
};
LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace mkv
