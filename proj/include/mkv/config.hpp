#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "mkv/model.hpp"
#include "mkv/simulate.hpp"

namespace mkv {

enum class Experiment {
  Rates,
  VerifyAssumptions,
  PsiCheck,
  Contract,
  Chaos,
  CouplingConsistency,
  AppendixScaling,
  Moments,
};

std::string_view to_string(Experiment experiment) noexcept;
std::optional<Experiment> parse_experiment(std::string_view name) noexcept;

/// Model as written in the config; build() performs the noise split.
struct ModelConfig {
  DriftSpec drift;
  DiffusionSpec diffusion;
  DissipativityParams dissipativity;
  std::optional<double> eta = kDefaultEta;  // nullopt: no split
  std::optional<double> total_noise_sq;      // when set, sigma0 = sqrt(total - sigma1^2)
  Grid grid;

  ModelSpec build() const;
};

struct ContractSettings {
  double rate_fraction = 0.8;
  double min_r2 = 0.95;
  double floor_factor = 20.0;
  int bootstrap = 200;
};

struct ChaosSettings {
  std::vector<std::size_t> n_list{16, 64, 256};
  std::size_t n_ref = 2048;
  double t_probe = 2.0;
  double separation_stderr = 2.0;
};

struct ConsistencySettings {
  std::vector<double> epsilons{0.5, 0.1, 0.02};
  int baseline_pairs = 16;
  double agreement_stderr = 3.0;
  double mutation_stderr = 5.0;
};

struct AppendixSettings {
  std::vector<std::size_t> n_list{32, 128, 512, 2048};
  std::size_t reference_size = 16384;
  double probe_time = 1.0;
  int repeats = 4096;
  std::optional<double> slope_tolerance;  // default 0.05 for LinearMean, 0.15 otherwise
};

struct MomentSettings {
  double plateau_window = 10.0;
  double plateau_factor = 5.0;
};

struct RatesSettings {
  std::vector<double> noise_sq_list{1.0, 2.0, 4.0, 8.0};
};

struct RunConfig {
  Experiment experiment = Experiment::Rates;
  ModelConfig model;
  SimConfig sim;
  double epsilon = 0.01;
  InitialLaw init_a = DiracInit{0.0};
  InitialLaw init_b = DiracInit{0.0};
  std::string output = "out";

  ContractSettings contract;
  ChaosSettings chaos;
  ConsistencySettings consistency;
  AppendixSettings appendix;
  MomentSettings moments;
  RatesSettings rates;
};

/// Parses a run config. A manifest (an object with a "config" member) is
/// accepted as well. Field errors throw Error(Config) naming the JSON path.
RunConfig parse_run_config(const nlohmann::json& document, std::optional<Experiment> experiment = std::nullopt);

RunConfig load_run_config(const std::filesystem::path& path, std::optional<Experiment> experiment = std::nullopt);

/// Fully resolved config; parse_run_config(to_json(c)) reproduces c.
nlohmann::json to_json(const RunConfig& config);

nlohmann::json to_json(const InitialLaw& law);

}  // namespace mkv
