#include <catch_amalgamated.hpp>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "mkv/config.hpp"
#include "mkv/error.hpp"
#include "mkv/experiments.hpp"

using namespace mkv;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

json load(const std::string& name) {
  std::ifstream in(std::string(MKV_CONFIG_DIR) + "/" + name);
  return json::parse(in);
}

std::string config_error(const json& doc) {
  try {
    parse_run_config(doc);
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Config);
    return e.what();
  }
  FAIL("expected a config error");
  return {};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("mkv_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

int run_cli(const std::string& args) {
  const int status = std::system((std::string(MKVLAB_PATH) + " " + args + " > /dev/null 2>&1").c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("experiment names round-trip", "[config]") {
  for (auto e : {Experiment::Rates, Experiment::VerifyAssumptions, Experiment::PsiCheck, Experiment::Contract,
                 Experiment::Chaos, Experiment::CouplingConsistency, Experiment::AppendixScaling,
                 Experiment::Moments}) {
    CHECK(parse_experiment(to_string(e)) == e);
  }
  CHECK_FALSE(parse_experiment("contraction").has_value());
}

TEST_CASE("canonical rates config builds the expected model", "[config]") {
  const auto c = parse_run_config(load("rates.json"));
  CHECK(c.experiment == Experiment::Rates);
  const auto m = c.model.build();
  REQUIRE(m.split.has_value());
  CHECK_THAT(m.noise_sq(), Catch::Matchers::WithinAbs(4.0, 1e-12));
  CHECK_THAT(m.sigma1() * m.sigma1(), Catch::Matchers::WithinAbs(0.9, 1e-12));
}

TEST_CASE("every shipped config round-trips through to_json", "[config]") {
  for (const auto& entry : fs::directory_iterator(MKV_CONFIG_DIR)) {
    INFO(entry.path().string());
    const auto first = parse_run_config(load(entry.path().filename().string()));
    const auto again = parse_run_config(to_json(first));
    CHECK(to_json(again) == to_json(first));
  }
}

TEST_CASE("a manifest is accepted as a config", "[config]") {
  const auto c = parse_run_config(load("contract.json"));
  const json manifest{{"version", "x"}, {"config", to_json(c)}};
  CHECK(to_json(parse_run_config(manifest)) == to_json(c));
}

TEST_CASE("config errors name the offending field", "[config]") {
  auto doc = load("contract.json");
  doc["sim"].erase("dt");
  CHECK_THAT(config_error(doc), Catch::Matchers::ContainsSubstring("sim.dt"));

  doc = load("contract.json");
  doc["model"]["drift"]["theta"] = "minus one";
  CHECK_THAT(config_error(doc), Catch::Matchers::ContainsSubstring("model.drift.theta"));

  doc = load("chaos.json");
  doc["model"]["drift"]["kernel"]["kind"] = "gaussian";
  CHECK_THAT(config_error(doc), Catch::Matchers::ContainsSubstring("model.drift.kernel.kind"));

  doc = load("chaos.json");
  doc["chaos"]["n_list"] = json::array({16, "x"});
  CHECK_THAT(config_error(doc), Catch::Matchers::ContainsSubstring("chaos.n_list[1]"));

  doc = load("rates.json");
  doc["experiment"] = "nope";
  CHECK_THAT(config_error(doc), Catch::Matchers::ContainsSubstring("experiment"));

  doc = load("contract.json");
  doc.erase("sim");
  CHECK_THAT(config_error(doc), Catch::Matchers::ContainsSubstring("sim"));
}

TEST_CASE("total noise fixes sigma0 after the split", "[config]") {
  auto doc = load("contract.json");
  const auto m = parse_run_config(doc).model.build();
  CHECK_THAT(m.noise_sq(), Catch::Matchers::WithinAbs(4.0, 1e-12));
  CHECK(m.sigma1() < 1e-2);
  doc["model"]["diffusion"]["total_noise_sq"] = 0.1;
  doc["model"]["split"]["eta"] = 0.9;
  CHECK_THROWS_AS(parse_run_config(doc).model.build(), Error);
}

TEST_CASE("rates experiment reports the canonical constants", "[cli]") {
  const auto result = run_experiment(parse_run_config(load("rates.json")));
  CHECK(result.pass);
  CHECK(result.summary["rates"]["c1"].get<double>() == 0.25);
  CHECK_THAT(result.summary["rates"]["lambda0_star"].get<double>(), Catch::Matchers::WithinAbs(0.4678, 1e-3));
}

TEST_CASE("verify-assumptions passes on the double well", "[cli]") {
  const auto result = run_experiment(parse_run_config(load("verify_double_well.json")));
  CHECK(result.pass);
}

TEST_CASE("contract gate rejects a repulsive drift before simulating", "[cli]") {
  const auto result = run_experiment(parse_run_config(load("contract_repulsive.json")));
  CHECK_FALSE(result.pass);
  CHECK(result.tables.empty());
  CHECK_FALSE(result.summary["gate"]["dissipativity"]["pass"].get<bool>());
}

TEST_CASE("contract with equal initial laws passes trivially", "[cli]") {
  auto c = parse_run_config(load("contract.json"));
  c.init_b = c.init_a;
  c.sim.particles = 8;
  c.sim.replicas = 2;
  c.sim.t_end = 0.5;
  const auto result = run_experiment(c);
  CHECK(result.pass);
  CHECK(result.summary.contains("note"));
}

TEST_CASE("coupling-consistency enforces its sample sizes", "[cli]") {
  auto c = parse_run_config(load("consistency.json"));
  c.sim.replicas = 1000;
  CHECK_THROWS_AS(run_experiment(c), Error);
  c.sim.replicas = 2048;
  c.sim.particles = 9;
  CHECK_THROWS_AS(run_experiment(c), Error);
}

TEST_CASE("mkvlab exit codes", "[cli]") {
  const auto out = scratch_dir("exit");
  const std::string cfg = std::string(MKV_CONFIG_DIR);
  CHECK(run_cli("rates --config " + cfg + "/rates.json --out " + (out / "rates").string()) == 0);
  CHECK(fs::exists(out / "rates" / "summary.json"));
  CHECK(fs::exists(out / "rates" / "manifest.json"));
  CHECK(fs::exists(out / "rates" / "series_rates.csv"));
  CHECK(run_cli("contract --config " + cfg + "/contract_repulsive.json --out " + (out / "rep").string()) == 2);

  auto doc = load("contract.json");
  doc["sim"].erase("dt");
  std::ofstream(out / "bad.json") << doc.dump();
  CHECK(run_cli("contract --config " + (out / "bad.json").string() + " --out " + (out / "bad").string()) == 1);
  CHECK(run_cli("warp --config " + cfg + "/rates.json") == 1);
  CHECK(run_cli("rates --config " + (out / "missing.json").string()) == 1);
}

TEST_CASE("re-running a manifest reproduces every CSV byte", "[cli]") {
  const auto out = scratch_dir("manifest");
  const std::string cfg = std::string(MKV_CONFIG_DIR) + "/moments.json";
  REQUIRE(run_cli("moments --config " + cfg + " --out " + (out / "a").string() + " --seed 5 --threads 2") == 0);
  REQUIRE(run_cli("moments --config " + (out / "a" / "manifest.json").string() + " --out " + (out / "b").string() +
                  " --threads 1") == 0);
  const auto manifest = json::parse(slurp(out / "a" / "manifest.json"));
  CHECK(manifest["config"]["sim"]["master_seed"] == 5);
  CHECK_FALSE(manifest["version"].get<std::string>().empty());
  int compared = 0;
  for (const auto& entry : fs::directory_iterator(out / "a")) {
    if (entry.path().extension() != ".csv") continue;
    CHECK(slurp(entry.path()) == slurp(out / "b" / entry.path().filename()));
    ++compared;
  }
  CHECK(compared == 2);
}
