// mkvlab: runs one experiment from a JSON config and writes its artifacts.
#include <cstdint>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "mkv/error.hpp"
#include "mkv/experiments.hpp"

namespace {

constexpr int kExitError = 1;

std::string experiment_names() {
  std::string names;
  for (auto e : {mkv::Experiment::Rates, mkv::Experiment::VerifyAssumptions, mkv::Experiment::PsiCheck,
                 mkv::Experiment::Contract, mkv::Experiment::Chaos, mkv::Experiment::CouplingConsistency,
                 mkv::Experiment::AppendixScaling, mkv::Experiment::Moments}) {
    if (!names.empty()) names += ", ";
    names += mkv::to_string(e);
  }
  return names;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"McKean-Vlasov common-noise simulation lab"};
  app.set_version_flag("--version", mkv::version());

  std::string experiment_name;
  std::string config_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  unsigned threads = 0;
  app.add_option("experiment", experiment_name, "one of: " + experiment_names())->required();
  app.add_option("--config", config_path, "JSON run config (a manifest.json is accepted too)")
      ->required()
      ->check(CLI::ExistingFile);
  auto* out_opt = app.add_option("--out", out_dir, "output directory (default: config 'output')");
  auto* seed_opt = app.add_option("--seed", seed, "override sim.master_seed");
  app.add_option("--threads", threads, "worker threads, 0 = hardware concurrency");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitError;
  }

  const auto experiment = mkv::parse_experiment(experiment_name);
  if (!experiment) {
    std::cerr << "mkvlab: unknown experiment '" << experiment_name << "' (expected " << experiment_names() << ")\n";
    return kExitError;
  }

  try {
    auto config = mkv::load_run_config(config_path, *experiment);
    if (*seed_opt) config.sim.master_seed = seed;
    const std::string out = *out_opt ? out_dir : config.output;
    const int status = mkv::run(config, out, threads);
    std::cout << mkv::to_string(config.experiment) << ": " << (status == 0 ? "pass" : "FAIL") << " (" << out
              << "/summary.json)\n";
    return status;
  } catch (const std::exception& e) {
    std::cerr << "mkvlab: " << e.what() << "\n";
    return kExitError;
  }
}
