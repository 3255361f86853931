#include "mkv/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "mkv/coupling.hpp"
#include "mkv/error.hpp"
#include "mkv/parallel.hpp"
#include "mkv/rates.hpp"
#include "mkv/rng.hpp"

namespace mkv {

using nlohmann::json;

namespace {

// Seed tags for sub-experiments that need streams independent of the master seed.
constexpr std::uint64_t kPlainReferenceTag = 1;
constexpr std::uint64_t kBaselineTag = 2;
constexpr std::uint64_t kBootstrapTag = 1000;

struct AssumptionChecks {
  bool pass = true;
  json summary;
  ModelSpec model;
  RateBundle rates;
};

AssumptionChecks check_assumptions(const ModelConfig& config) {
  AssumptionChecks out;
  out.model = config.build();
  const auto& m = out.model;
  const auto& p = m.dissipativity;
  p.validate();
  m.diffusion.validate();

  const auto dissipativity = verify_dissipativity(m.drift, p, config.grid);
  const auto lipschitz = verify_w1_lipschitz(m.drift, p.lambda3);
  const auto sigma = verify_sigma_bounds(m.diffusion, config.grid);
  out.summary["dissipativity"] = to_json(dissipativity);
  out.summary["w1_lipschitz"] = to_json(lipschitz);
  out.summary["sigma_bounds"] = to_json(sigma);
  out.pass = dissipativity.pass && lipschitz.pass && sigma.pass;
  if (m.split) {
    const auto split = verify_split(m.diffusion, *m.split, config.grid);
    out.summary["split"] = to_json(split);
    out.summary["split"]["alpha"] = m.split->alpha;
    out.summary["split"]["sigma1"] = m.split->sigma1;
    out.pass = out.pass && split.pass;
  }

  out.rates = rate_constants(p, m.sigma0(), m.sigma1());
  const bool lambda3_ok = p.lambda3 < out.rates.lambda3_star;
  out.summary["lambda3_below_star"] = {
      {"pass", lambda3_ok}, {"lambda3", p.lambda3}, {"lambda3_star", out.rates.lambda3_star}};
  out.summary["moments_admissible"] = p.moments_admissible();
  out.pass = out.pass && lambda3_ok;
  return out;
}

json base_summary(const RunConfig& config) {
  return {{"experiment", to_string(config.experiment)}, {"version", version()}};
}

double mean_of(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double sample_stddev(const std::vector<double>& v) {
  const double m = mean_of(v);
  double sq = 0.0;
  for (double x : v) sq += (x - m) * (x - m);
  return std::sqrt(sq / static_cast<double>(v.size() - 1));
}

}  // namespace

ExperimentResult experiment_rates(const RunConfig& config) {
  ExperimentResult result;
  result.summary = base_summary(config);
  const auto model = config.model.build();
  const auto& p = model.dissipativity;
  const auto bundle = rate_constants(p, model.sigma0(), model.sigma1());
  const auto identity = remark_identity_check(bundle, p);
  const auto sweep = rate_noise_sweep(p, config.rates.noise_sq_list);

  Table table{"rates", {"noise_sq", "c1", "lambda0_star"}, {}};
  bool increasing = true;
  for (std::size_t k = 0; k < sweep.size(); ++k) {
    table.add_row({cell(sweep[k].noise_sq), cell(sweep[k].c1), cell(sweep[k].lambda0_star)});
    if (k > 0 && !(sweep[k].lambda0_star > sweep[k - 1].lambda0_star)) increasing = false;
  }

  result.pass = identity.pass && increasing;
  result.summary["rates"] = to_json(bundle);
  result.summary["identity"] = to_json(identity);
  result.summary["identity"]["tolerance"] = 1e-12;
  result.summary["sweep_increasing"] = increasing;
  result.summary["pass"] = result.pass;
  result.tables.push_back(std::move(table));
  return result;
}

ExperimentResult experiment_verify_assumptions(const RunConfig& config) {
  ExperimentResult result;
  result.summary = base_summary(config);
  auto checks = check_assumptions(config.model);
  result.pass = checks.pass;
  result.summary["checks"] = std::move(checks.summary);
  result.summary["rates"] = to_json(checks.rates);
  result.summary["pass"] = result.pass;
  return result;
}

ExperimentResult experiment_psi_check(const RunConfig& config) {
  ExperimentResult result;
  result.summary = base_summary(config);
  const auto model = config.model.build();
  const auto& p = model.dissipativity;
  p.validate();
  const double noise_sq = model.noise_sq();
  require(noise_sq > 0.0, ErrorKind::DegenerateNoise, "psi check needs sigma0^2 + sigma1^2 > 0");
  const auto d = ConcaveDistance::from_rates(p, noise_sq);
  const double rate = lambda0_dstar(d, p, noise_sq);
  const auto report = verify_psi_bound(d, p, noise_sq);

  Table table{"psi", {"r", "psi", "bound", "margin"}, {}};
  constexpr int kSamples = 1000;
  const double r_max = 20.0 * p.ell0;
  for (int k = 0; k <= kSamples; ++k) {
    const double r = r_max * k / kSamples;
    const double value = psi(d, p, noise_sq, r);
    const double bound = -rate * d.eval(r).f;
    table.add_row({cell(r), cell(value), cell(bound), cell(value - bound)});
  }

  result.pass = report.pass;
  result.summary["c1"] = d.c1;
  result.summary["c2"] = d.c2;
  result.summary["lambda0_dstar"] = rate;
  result.summary["noise_sq"] = noise_sq;
  result.summary["bound"] = to_json(report);
  result.summary["bound"]["tolerance"] = 1e-10;
  result.summary["pass"] = result.pass;
  result.tables.push_back(std::move(table));
  return result;
}

ExperimentResult experiment_contract(const RunConfig& config, unsigned threads) {
  ExperimentResult result;
  result.summary = base_summary(config);
  auto checks = check_assumptions(config.model);
  result.summary["gate"] = std::move(checks.summary);
  result.summary["rates"] = to_json(checks.rates);
  if (!checks.pass) {
    result.pass = false;
    result.summary["pass"] = false;
    result.summary["reason"] = "assumption gate closed; no simulation was run";
    return result;
  }

  const auto& c = config.contract;
  const double n = static_cast<double>(config.sim.particles);
  const double floor_scale = 1.0 / n + config.epsilon;
  const double rate_threshold = c.rate_fraction * checks.rates.lambda0_star;
  const double floor_bound = c.floor_factor * floor_scale;
  result.summary["thresholds"] = {{"rate_min", rate_threshold},
                                  {"rate_fraction", c.rate_fraction},
                                  {"r2_min", c.min_r2},
                                  {"floor_max", floor_bound},
                                  {"floor_factor", c.floor_factor}};

  const auto paths =
      coupled_w1_paths(checks.model, config.sim, config.init_a, config.init_b, CutoffParam(config.epsilon), threads);
  const auto series = paths.summarize();
  result.tables.push_back(series_table("w1", series));

  const bool identically_zero =
      std::all_of(series.values.begin(), series.values.end(), [](double v) { return v == 0.0; });
  if (identically_zero) {
    result.pass = true;
    result.summary["note"] = "series is identically zero; contraction holds trivially";
    result.summary["pass"] = true;
    return result;
  }

  try {
    const auto fit = fit_decay(paths, c.bootstrap, derive_seed(config.sim.master_seed, kBootstrapTag));
    const double c_floor = fit.plateau / floor_scale;
    result.pass = fit.rate >= rate_threshold && fit.r2 >= c.min_r2 && fit.plateau <= floor_bound;
    result.summary["fit"] = to_json(fit);
    result.summary["c_floor"] = c_floor;
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::NoDecayWindow) throw;
    result.pass = false;
    result.summary["reason"] = e.what();
    result.summary["hint"] = "the floor dominates the series: raise sim.particles or lower coupling.epsilon";
  }
  result.summary["pass"] = result.pass;
  return result;
}

ExperimentResult experiment_chaos(const RunConfig& config, unsigned threads) {
  ExperimentResult result;
  result.summary = base_summary(config);
  const auto model = config.model.build();
  const auto& s = config.chaos;
  const auto points = chaos_error(model, config.sim, config.init_a, s.n_list, s.n_ref, s.t_probe, threads);

  Table table{"chaos", {"n", "error", "stderr"}, {}};
  for (const auto& p : points) table.add_row({cell(p.n), cell(p.error), cell(p.std_error)});

  result.pass = true;
  json steps = json::array();
  for (std::size_t k = 0; k + 1 < points.size(); ++k) {
    const double drop = points[k].error - points[k + 1].error;
    const double required = s.separation_stderr * std::hypot(points[k].std_error, points[k + 1].std_error);
    const bool ok = drop > required;
    result.pass = result.pass && ok;
    steps.push_back({{"n_from", points[k].n}, {"n_to", points[k + 1].n}, {"drop", drop}, {"required", required},
                     {"pass", ok}});
  }
  result.summary["steps"] = std::move(steps);
  result.summary["thresholds"] = {{"separation_stderr", s.separation_stderr}};
  result.summary["n_ref"] = s.n_ref;
  result.summary["t_probe"] = s.t_probe;
  result.summary["pass"] = result.pass;
  result.tables.push_back(std::move(table));
  return result;
}

ExperimentResult experiment_coupling_consistency(const RunConfig& config, unsigned threads) {
  ExperimentResult result;
  result.summary = base_summary(config);
  const auto& s = config.consistency;
  require(config.sim.particles <= 8, ErrorKind::InvalidArgument,
          "coupling-consistency compares single-particle marginals and needs sim.particles <= 8");
  require(config.sim.replicas >= 1024, ErrorKind::InvalidArgument,
          "coupling-consistency needs sim.replicas >= 1024 for a meaningful comparison");
  require(s.baseline_pairs >= 2, ErrorKind::InvalidArgument, "consistency.baseline_pairs must be at least 2");
  require(!s.epsilons.empty(), ErrorKind::InvalidArgument, "consistency.epsilons must be nonempty");

  const auto model = config.model.build();
  const auto replicas = static_cast<std::size_t>(config.sim.replicas);
  SimConfig sim = config.sim;
  sim.save_every = static_cast<int>(std::min<std::uint64_t>(std::max<std::uint64_t>(sim.steps(), 1),
                                                            std::numeric_limits<int>::max()));

  auto coupled_marginal = [&](double eps, CouplingVariant variant) {
    const CutoffParam cutoff(eps);
    return parallel_map(replicas, threads, [&](std::size_t r) {
      return simulate_coupled(model, sim, config.init_a, config.init_b, cutoff, static_cast<std::uint32_t>(r), {},
                              variant)
          .y.positions.front();
    });
  };
  auto plain_marginal = [&](std::uint64_t seed) {
    SimConfig plain = sim;
    plain.master_seed = seed;
    return parallel_map(replicas, threads, [&](std::size_t r) {
      return simulate_trajectory(model, plain, config.init_b, static_cast<std::uint32_t>(r))
          .snapshots.back()
          .positions.front();
    });
  };

  const auto master = config.sim.master_seed;
  const auto reference = plain_marginal(derive_seed(master, kPlainReferenceTag));
  std::vector<double> baseline;
  for (int k = 0; k < s.baseline_pairs; ++k) {
    const auto tag = kBaselineTag + 2 * static_cast<std::uint64_t>(k);
    baseline.push_back(w1_sorted(plain_marginal(derive_seed(master, tag)), plain_marginal(derive_seed(master, tag + 1))));
  }
  const double baseline_mean = mean_of(baseline);
  const double baseline_sd = sample_stddev(baseline);
  require(baseline_sd > 0.0, ErrorKind::InvalidArgument, "baseline spread is zero; the marginal law is degenerate");

  Table table{"consistency", {"epsilon", "w1", "baseline_mean", "baseline_stderr", "z"}, {}};
  json rows = json::array();
  result.pass = true;
  for (double eps : s.epsilons) {
    const double d = w1_sorted(coupled_marginal(eps, CouplingVariant::Faithful), reference);
    const double z = (d - baseline_mean) / baseline_sd;
    const bool ok = std::abs(z) <= s.agreement_stderr;
    result.pass = result.pass && ok;
    table.add_row({cell(eps), cell(d), cell(baseline_mean), cell(baseline_sd), cell(z)});
    rows.push_back({{"epsilon", eps}, {"w1", d}, {"z", z}, {"pass", ok}});
  }

  const double eps_mut = *std::min_element(s.epsilons.begin(), s.epsilons.end());
  const double d_mut = w1_sorted(coupled_marginal(eps_mut, CouplingVariant::ReferenceMeasure), reference);
  const double z_mut = (d_mut - baseline_mean) / baseline_sd;
  const bool detected = z_mut > s.mutation_stderr;
  result.pass = result.pass && detected;

  result.summary["baseline"] = {{"mean", baseline_mean}, {"stderr", baseline_sd}, {"pairs", s.baseline_pairs}};
  result.summary["epsilons"] = std::move(rows);
  result.summary["mutation"] = {{"epsilon", eps_mut}, {"w1", d_mut}, {"z", z_mut}, {"detected", detected}};
  result.summary["thresholds"] = {{"agreement_stderr", s.agreement_stderr},
                                  {"mutation_stderr", s.mutation_stderr}};
  result.summary["pass"] = result.pass;
  result.tables.push_back(std::move(table));
  return result;
}

ExperimentResult experiment_appendix_scaling(const RunConfig& config) {
  ExperimentResult result;
  result.summary = base_summary(config);
  const auto model = config.model.build();
  const auto& s = config.appendix;
  LeaveOneOutOptions options;
  options.reference_size = s.reference_size;
  options.probe_time = s.probe_time;
  options.repeats = s.repeats;
  const auto scaling = leave_one_out_scaling(model, config.sim, config.init_a, s.n_list, options);

  const auto* conv = model.drift.convolution();
  const bool linear = conv != nullptr && conv->kernel.kind == KernelKind::LinearMean;
  const double tolerance = s.slope_tolerance.value_or(linear ? 0.05 : 0.15);

  Table table{"appendix", {"n", "mean_sq_error", "stderr", "closed_form"}, {}};
  bool all_zero = true;
  for (const auto& p : scaling.points) {
    table.add_row({cell(p.n), cell(p.mean_sq_error), cell(p.std_error), cell(p.closed_form)});
    all_zero = all_zero && p.mean_sq_error == 0.0;
  }

  if (all_zero) {
    result.pass = true;
    result.summary["note"] = "drift error vanishes for every n; the drift does not depend on the measure";
  } else {
    const bool slope_ok = std::abs(scaling.slope + 1.0) <= tolerance;
    const bool closed_ok = !linear || std::abs(scaling.closed_form_slope + 1.0) <= tolerance;
    result.pass = slope_ok && closed_ok;
  }
  result.summary["slope"] = scaling.slope;
  if (linear) result.summary["closed_form_slope"] = scaling.closed_form_slope;
  result.summary["thresholds"] = {{"slope_target", -1.0}, {"slope_tolerance", tolerance}};
  result.summary["pass"] = result.pass;
  result.tables.push_back(std::move(table));
  return result;
}

ExperimentResult experiment_moments(const RunConfig& config, unsigned threads) {
  ExperimentResult result;
  result.summary = base_summary(config);
  const auto model = config.model.build();
  const double decay = moment_rate(model.dissipativity);
  const auto& s = config.moments;

  std::vector<RunRecord> runs;
  try {
    runs = parallel_map(static_cast<std::size_t>(config.sim.replicas), threads, [&](std::size_t r) {
      return simulate_trajectory(model, config.sim, config.init_a, static_cast<std::uint32_t>(r));
    });
  } catch (const DivergedError& e) {
    result.pass = false;
    result.summary["divergence"] = {{"time", e.time()}, {"message", e.what()}};
    result.summary["pass"] = false;
    return result;
  }

  ReplicaSeries per_replica;
  for (const auto& snap : runs.front().snapshots) per_replica.times.push_back(snap.time);
  for (const auto& run : runs) {
    std::vector<double> values;
    for (const auto& m : moment_track(run)) values.push_back(m.mean_abs);
    per_replica.values.push_back(std::move(values));
  }
  const auto series = per_replica.summarize();

  std::vector<double> window;
  for (std::size_t k = 0; k < series.times.size(); ++k) {
    if (series.times[k] >= 0.5 * s.plateau_window && series.times[k] <= s.plateau_window) {
      window.push_back(series.values[k]);
    }
  }
  require(!window.empty(), ErrorKind::InvalidArgument, "no snapshots fall inside the plateau window");
  const double initial = series.values.front();
  const double plateau = mean_of(window);
  const double bound = initial + s.plateau_factor * plateau;
  const double peak = *std::max_element(series.values.begin(), series.values.end());

  result.pass = peak <= bound;
  result.summary["initial_mean_abs"] = initial;
  result.summary["plateau"] = plateau;
  result.summary["peak"] = peak;
  result.summary["moment_rate"] = decay;
  result.summary["divergence"] = nullptr;
  result.summary["thresholds"] = {{"bound", bound},
                                  {"plateau_factor", s.plateau_factor},
                                  {"plateau_window", s.plateau_window}};
  result.summary["pass"] = result.pass;
  result.tables.push_back(series_table("moments", series));
  result.tables.push_back(moment_long_table("moments_long", runs));
  return result;
}

ExperimentResult run_experiment(const RunConfig& config, unsigned threads) {
  switch (config.experiment) {
    case Experiment::Rates:
      return experiment_rates(config);
    case Experiment::VerifyAssumptions:
      return experiment_verify_assumptions(config);
    case Experiment::PsiCheck:
      return experiment_psi_check(config);
    case Experiment::Contract:
      return experiment_contract(config, threads);
    case Experiment::Chaos:
      return experiment_chaos(config, threads);
    case Experiment::CouplingConsistency:
      return experiment_coupling_consistency(config, threads);
    case Experiment::AppendixScaling:
      return experiment_appendix_scaling(config);
    case Experiment::Moments:
      return experiment_moments(config, threads);
  }
  throw Error(ErrorKind::InvalidArgument, "unknown experiment");
}

int run(const RunConfig& config, const std::filesystem::path& out, unsigned threads) {
  const auto result = run_experiment(config, threads);
  std::filesystem::create_directories(out);

  json outputs = json::array({"summary.json"});
  for (const auto& table : result.tables) {
    write_text(out / table.file_name(), format_csv(table));
    outputs.push_back(table.file_name());
  }
  write_json(out / "summary.json", result.summary);
  write_json(out / "manifest.json",
             {{"version", version()}, {"experiment", to_string(config.experiment)}, {"outputs", outputs},
              {"config", to_json(config)}});
  return result.pass ? 0 : 2;
}

}  // namespace mkv
