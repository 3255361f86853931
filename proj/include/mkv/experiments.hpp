#pragma once

#include <filesystem>
#include <vector>

#include <json.hpp>

#include "mkv/artifacts.hpp"
#include "mkv/config.hpp"

namespace mkv {

/// Outcome of one experiment. `summary` holds raw values next to the
/// thresholds they were judged against.
struct ExperimentResult {
  bool pass = false;
  nlohmann::json summary;
  std::vector<Table> tables;
};

ExperimentResult experiment_rates(const RunConfig& config);
ExperimentResult experiment_verify_assumptions(const RunConfig& config);
ExperimentResult experiment_psi_check(const RunConfig& config);
/// Gated on the assumption verifiers and lambda3 < lambda3*; a closed gate
/// fails without simulating.
ExperimentResult experiment_contract(const RunConfig& config, unsigned threads = 0);
ExperimentResult experiment_chaos(const RunConfig& config, unsigned threads = 0);
/// Marginal law of particle 0 of the coupled y-system against the plain
/// system, calibrated by independent plain-vs-plain runs. Needs N <= 8 and
/// at least 1024 replicas.
ExperimentResult experiment_coupling_consistency(const RunConfig& config, unsigned threads = 0);
ExperimentResult experiment_appendix_scaling(const RunConfig& config);
ExperimentResult experiment_moments(const RunConfig& config, unsigned threads = 0);

ExperimentResult run_experiment(const RunConfig& config, unsigned threads = 0);

/// Runs the experiment and writes summary.json, series_*.csv and
/// manifest.json into `out`. Returns 0 on pass and 2 on acceptance failure;
/// errors propagate as exceptions.
int run(const RunConfig& config, const std::filesystem::path& out, unsigned threads = 0);

}  // namespace mkv
