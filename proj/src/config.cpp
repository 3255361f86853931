#include "mkv/config.hpp"

#include <array>
#include <cmath>
#include <fstream>
#include <sstream>
#include <utility>

#include "mkv/error.hpp"

namespace mkv {

using nlohmann::json;

namespace {

constexpr std::array<std::pair<Experiment, std::string_view>, 8> kExperimentNames{{
    {Experiment::Rates, "rates"},
    {Experiment::VerifyAssumptions, "verify-assumptions"},
    {Experiment::PsiCheck, "psi-check"},
    {Experiment::Contract, "contract"},
    {Experiment::Chaos, "chaos"},
    {Experiment::CouplingConsistency, "coupling-consistency"},
    {Experiment::AppendixScaling, "appendix-scaling"},
    {Experiment::Moments, "moments"},
}};

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw Error(ErrorKind::Config, path + ": " + what);
}

std::string join(const std::string& path, std::string_view key) {
  return path.empty() ? std::string(key) : path + "." + std::string(key);
}

const json& member(const json& obj, const std::string& path, std::string_view key) {
  const auto it = obj.find(key);
  if (it == obj.end()) fail(join(path, key), "missing required field");
  return *it;
}

const json& object(const json& obj, const std::string& path, std::string_view key) {
  const auto& value = member(obj, path, key);
  if (!value.is_object()) fail(join(path, key), "expected an object");
  return value;
}

double number(const json& value, const std::string& path) {
  if (!value.is_number()) fail(path, "expected a number");
  const double v = value.get<double>();
  if (!std::isfinite(v)) fail(path, "expected a finite number");
  return v;
}

double number(const json& obj, const std::string& path, std::string_view key) {
  return number(member(obj, path, key), join(path, key));
}

double number_or(const json& obj, const std::string& path, std::string_view key, double fallback) {
  return obj.contains(key) ? number(obj, path, key) : fallback;
}

long long integer_or(const json& obj, const std::string& path, std::string_view key, long long fallback) {
  if (!obj.contains(key)) return fallback;
  const auto& value = obj.at(key);
  if (!value.is_number_integer()) fail(join(path, key), "expected an integer");
  return value.get<long long>();
}

std::string string(const json& obj, const std::string& path, std::string_view key) {
  const auto& value = member(obj, path, key);
  if (!value.is_string()) fail(join(path, key), "expected a string");
  return value.get<std::string>();
}

template <class T>
std::vector<T> number_list(const json& obj, const std::string& path, std::string_view key, std::vector<T> fallback) {
  if (!obj.contains(key)) return fallback;
  const auto& value = obj.at(key);
  const auto where = join(path, key);
  if (!value.is_array() || value.empty()) fail(where, "expected a nonempty array");
  std::vector<T> out;
  for (std::size_t i = 0; i < value.size(); ++i) {
    const auto item_path = where + "[" + std::to_string(i) + "]";
    if constexpr (std::is_integral_v<T>) {
      if (!value[i].is_number_integer() || value[i].get<long long>() < 0) fail(item_path, "expected a count");
      out.push_back(value[i].get<T>());
    } else {
      out.push_back(number(value[i], item_path));
    }
  }
  return out;
}

Kernel parse_kernel(const json& j, const std::string& path) {
  const auto kind = string(j, path, "kind");
  Kernel k;
  k.kappa = number_or(j, path, "kappa", 1.0);
  if (kind == "scaled_sine") {
    k.kind = KernelKind::ScaledSine;
  } else if (kind == "saturated") {
    k.kind = KernelKind::Saturated;
  } else if (kind == "linear_mean") {
    k.kind = KernelKind::LinearMean;
  } else {
    fail(join(path, "kind"), "unknown kernel '" + kind + "'");
  }
  return k;
}

std::string_view kernel_name(KernelKind kind) {
  switch (kind) {
    case KernelKind::ScaledSine:
      return "scaled_sine";
    case KernelKind::Saturated:
      return "saturated";
    case KernelKind::LinearMean:
      return "linear_mean";
  }
  return "";
}

DriftSpec parse_drift(const json& j, const std::string& path) {
  const auto family = string(j, path, "family");
  if (family == "linear") return DriftSpec::linear(number(j, path, "theta"));
  if (family == "double_well") return DriftSpec::double_well(number(j, path, "a"), number(j, path, "b"));
  if (family == "confinement_plus_kernel") {
    const auto coefficients = number_list<double>(j, path, "confinement", {});
    if (!j.contains("confinement")) fail(join(path, "confinement"), "missing required field");
    return DriftSpec::with_kernel(coefficients, parse_kernel(object(j, path, "kernel"), join(path, "kernel")),
                                  number(j, path, "weight"));
  }
  fail(join(path, "family"), "unknown drift family '" + family + "'");
}

json drift_json(const DriftSpec& drift) {
  if (const auto* lin = std::get_if<LinearDrift>(&drift.family())) return {{"family", "linear"}, {"theta", lin->theta}};
  if (const auto* dw = std::get_if<DoubleWellDrift>(&drift.family())) {
    return {{"family", "double_well"}, {"a", dw->a}, {"b", dw->b}};
  }
  const auto& conv = std::get<ConfinementPlusKernel>(drift.family());
  return {{"family", "confinement_plus_kernel"},
          {"confinement", conv.confinement},
          {"kernel", {{"kind", kernel_name(conv.kernel.kind)}, {"kappa", conv.kernel.kappa}}},
          {"weight", conv.weight}};
}

SigmaFamily parse_sigma(const json& j, const std::string& path) {
  const auto family = string(j, path, "family");
  if (family == "constant") return ConstantSigma{number(j, path, "c")};
  if (family == "bounded_wave") return BoundedWaveSigma{number(j, path, "a"), number(j, path, "b")};
  fail(join(path, "family"), "unknown sigma family '" + family + "'");
}

json sigma_json(const SigmaFamily& sigma) {
  if (const auto* c = std::get_if<ConstantSigma>(&sigma)) return {{"family", "constant"}, {"c", c->c}};
  const auto& w = std::get<BoundedWaveSigma>(sigma);
  return {{"family", "bounded_wave"}, {"a", w.a}, {"b", w.b}};
}

InitialLaw parse_init(const json& j, const std::string& path) {
  if (!j.is_object()) fail(path, "expected an object");
  const auto kind = string(j, path, "kind");
  if (kind == "dirac") return DiracInit{number(j, path, "x0")};
  if (kind == "uniform" || kind == "uniform_interval") return UniformInit{number(j, path, "a"), number(j, path, "b")};
  if (kind == "gaussian" || kind == "gaussian_pair") {
    return GaussianInit{number(j, path, "mean"), number(j, path, "stddev")};
  }
  fail(join(path, "kind"), "unknown initial law '" + kind + "'");
}

ModelConfig parse_model(const json& j, const std::string& path) {
  ModelConfig m;
  m.drift = parse_drift(object(j, path, "drift"), join(path, "drift"));

  const auto dpath = join(path, "diffusion");
  const auto& d = object(j, path, "diffusion");
  m.diffusion.sigma = parse_sigma(object(d, dpath, "sigma"), join(dpath, "sigma"));
  m.diffusion.kappa1 = number(d, dpath, "kappa1");
  m.diffusion.kappa2 = number(d, dpath, "kappa2");
  m.diffusion.lsigma = number_or(d, dpath, "lsigma", 0.0);
  if (d.contains("total_noise_sq")) {
    m.total_noise_sq = number(d, dpath, "total_noise_sq");
  } else {
    m.diffusion.sigma0 = number(d, dpath, "sigma0");
  }

  const auto ppath = join(path, "dissipativity");
  const auto& p = object(j, path, "dissipativity");
  m.dissipativity = {number(p, ppath, "lambda1"), number(p, ppath, "lambda2"), number_or(p, ppath, "lambda3", 0.0),
                     number(p, ppath, "ell0")};

  if (j.contains("split")) {
    const auto& split = j.at("split");
    if (split.is_null()) {
      m.eta.reset();
    } else if (split.is_object()) {
      m.eta = number_or(split, join(path, "split"), "eta", kDefaultEta);
    } else {
      fail(join(path, "split"), "expected an object or null");
    }
  }
  if (j.contains("grid")) {
    const auto gpath = join(path, "grid");
    const auto& g = object(j, path, "grid");
    m.grid = {number(g, gpath, "lo"), number(g, gpath, "hi"), number(g, gpath, "step")};
  }
  return m;
}

bool needs_simulation(Experiment e) {
  switch (e) {
    case Experiment::Rates:
    case Experiment::VerifyAssumptions:
    case Experiment::PsiCheck:
      return false;
    default:
      return true;
  }
}

}  // namespace

std::string_view to_string(Experiment experiment) noexcept {
  for (const auto& [e, name] : kExperimentNames) {
    if (e == experiment) return name;
  }
  return "";
}

std::optional<Experiment> parse_experiment(std::string_view name) noexcept {
  for (const auto& [e, n] : kExperimentNames) {
    if (n == name) return e;
  }
  return std::nullopt;
}

ModelSpec ModelConfig::build() const {
  ModelSpec spec;
  spec.drift = drift;
  spec.diffusion = diffusion;
  spec.dissipativity = dissipativity;
  if (eta) spec.split = split_noise(diffusion, *eta, grid);
  if (total_noise_sq) {
    const double sigma1_sq = spec.sigma1() * spec.sigma1();
    require(*total_noise_sq >= sigma1_sq, ErrorKind::Config,
            "model.diffusion.total_noise_sq: smaller than sigma1^2 from the noise split");
    spec.diffusion.sigma0 = std::sqrt(*total_noise_sq - sigma1_sq);
  }
  return spec;
}

RunConfig parse_run_config(const json& document, std::optional<Experiment> experiment) {
  if (!document.is_object()) fail("<root>", "expected a JSON object");
  const json& root = document.contains("config") && document.at("config").is_object() ? document.at("config") : document;

  RunConfig c;
  if (experiment) {
    c.experiment = *experiment;
  } else {
    const auto name = string(root, "", "experiment");
    const auto parsed = parse_experiment(name);
    if (!parsed) fail("experiment", "unknown experiment '" + name + "'");
    c.experiment = *parsed;
  }
  c.model = parse_model(object(root, "", "model"), "model");

  if (root.contains("sim") || needs_simulation(c.experiment)) {
    const auto& s = object(root, "", "sim");
    c.sim.dt = number(s, "sim", "dt");
    c.sim.t_end = number(s, "sim", "t_end");
    c.sim.save_every = static_cast<int>(integer_or(s, "sim", "save_every", c.sim.save_every));
    c.sim.replicas = static_cast<int>(integer_or(s, "sim", "replicas", c.sim.replicas));
    c.sim.particles = static_cast<std::size_t>(integer_or(s, "sim", "particles", 1));
    if (s.contains("master_seed")) {
      if (!s.at("master_seed").is_number_unsigned()) fail("sim.master_seed", "expected an unsigned integer");
      c.sim.master_seed = s.at("master_seed").get<std::uint64_t>();
    }
    try {
      c.sim.validate();
    } catch (const Error& e) {
      fail("sim", e.what());
    }
  }

  if (root.contains("coupling")) c.epsilon = number(object(root, "", "coupling"), "coupling", "epsilon");
  if (root.contains("init_a")) c.init_a = parse_init(root.at("init_a"), "init_a");
  if (root.contains("init_b")) c.init_b = parse_init(root.at("init_b"), "init_b");
  if (root.contains("output")) c.output = string(root, "", "output");

  if (root.contains("contract")) {
    const auto& j = object(root, "", "contract");
    c.contract.rate_fraction = number_or(j, "contract", "rate_fraction", c.contract.rate_fraction);
    c.contract.min_r2 = number_or(j, "contract", "min_r2", c.contract.min_r2);
    c.contract.floor_factor = number_or(j, "contract", "floor_factor", c.contract.floor_factor);
    c.contract.bootstrap = static_cast<int>(integer_or(j, "contract", "bootstrap", c.contract.bootstrap));
  }
  if (root.contains("chaos")) {
    const auto& j = object(root, "", "chaos");
    c.chaos.n_list = number_list<std::size_t>(j, "chaos", "n_list", c.chaos.n_list);
    c.chaos.n_ref = static_cast<std::size_t>(integer_or(j, "chaos", "n_ref", static_cast<long long>(c.chaos.n_ref)));
    c.chaos.t_probe = number_or(j, "chaos", "t_probe", c.chaos.t_probe);
    c.chaos.separation_stderr = number_or(j, "chaos", "separation_stderr", c.chaos.separation_stderr);
  }
  if (root.contains("consistency")) {
    const auto& j = object(root, "", "consistency");
    c.consistency.epsilons = number_list<double>(j, "consistency", "epsilons", c.consistency.epsilons);
    c.consistency.baseline_pairs =
        static_cast<int>(integer_or(j, "consistency", "baseline_pairs", c.consistency.baseline_pairs));
    c.consistency.agreement_stderr =
        number_or(j, "consistency", "agreement_stderr", c.consistency.agreement_stderr);
    c.consistency.mutation_stderr = number_or(j, "consistency", "mutation_stderr", c.consistency.mutation_stderr);
  }
  if (root.contains("appendix")) {
    const auto& j = object(root, "", "appendix");
    c.appendix.n_list = number_list<std::size_t>(j, "appendix", "n_list", c.appendix.n_list);
    c.appendix.reference_size = static_cast<std::size_t>(
        integer_or(j, "appendix", "reference_size", static_cast<long long>(c.appendix.reference_size)));
    c.appendix.probe_time = number_or(j, "appendix", "probe_time", c.appendix.probe_time);
    c.appendix.repeats = static_cast<int>(integer_or(j, "appendix", "repeats", c.appendix.repeats));
    if (j.contains("slope_tolerance")) c.appendix.slope_tolerance = number(j, "appendix", "slope_tolerance");
  }
  if (root.contains("moments")) {
    const auto& j = object(root, "", "moments");
    c.moments.plateau_window = number_or(j, "moments", "plateau_window", c.moments.plateau_window);
    c.moments.plateau_factor = number_or(j, "moments", "plateau_factor", c.moments.plateau_factor);
  }
  if (root.contains("rates")) {
    const auto& j = object(root, "", "rates");
    c.rates.noise_sq_list = number_list<double>(j, "rates", "noise_sq_list", c.rates.noise_sq_list);
  }
  return c;
}

RunConfig load_run_config(const std::filesystem::path& path, std::optional<Experiment> experiment) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Config, path.string() + ": cannot open config file");
  json document;
  try {
    document = json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::Config, path.string() + ": " + e.what());
  }
  return parse_run_config(document, experiment);
}

json to_json(const InitialLaw& law) {
  if (const auto* d = std::get_if<DiracInit>(&law)) return {{"kind", "dirac"}, {"x0", d->x0}};
  if (const auto* u = std::get_if<UniformInit>(&law)) return {{"kind", "uniform"}, {"a", u->a}, {"b", u->b}};
  const auto& g = std::get<GaussianInit>(law);
  return {{"kind", "gaussian"}, {"mean", g.mean}, {"stddev", g.stddev}};
}

json to_json(const RunConfig& c) {
  const auto& m = c.model;
  json diffusion = {{"sigma", sigma_json(m.diffusion.sigma)},
                    {"kappa1", m.diffusion.kappa1},
                    {"kappa2", m.diffusion.kappa2},
                    {"lsigma", m.diffusion.lsigma}};
  if (m.total_noise_sq) {
    diffusion["total_noise_sq"] = *m.total_noise_sq;
  } else {
    diffusion["sigma0"] = m.diffusion.sigma0;
  }
  json model = {{"drift", drift_json(m.drift)},
                {"diffusion", diffusion},
                {"dissipativity",
                 {{"lambda1", m.dissipativity.lambda1},
                  {"lambda2", m.dissipativity.lambda2},
                  {"lambda3", m.dissipativity.lambda3},
                  {"ell0", m.dissipativity.ell0}}},
                {"split", m.eta ? json{{"eta", *m.eta}} : json(nullptr)},
                {"grid", {{"lo", m.grid.lo}, {"hi", m.grid.hi}, {"step", m.grid.step}}}};
  json appendix = {{"n_list", c.appendix.n_list},
                   {"reference_size", c.appendix.reference_size},
                   {"probe_time", c.appendix.probe_time},
                   {"repeats", c.appendix.repeats}};
  if (c.appendix.slope_tolerance) appendix["slope_tolerance"] = *c.appendix.slope_tolerance;

  return {
      {"experiment", to_string(c.experiment)},
      {"model", model},
      {"sim",
       {{"dt", c.sim.dt},
        {"t_end", c.sim.t_end},
        {"save_every", c.sim.save_every},
        {"replicas", c.sim.replicas},
        {"particles", c.sim.particles},
        {"master_seed", c.sim.master_seed}}},
      {"coupling", {{"epsilon", c.epsilon}}},
      {"init_a", to_json(c.init_a)},
      {"init_b", to_json(c.init_b)},
      {"output", c.output},
      {"contract",
       {{"rate_fraction", c.contract.rate_fraction},
        {"min_r2", c.contract.min_r2},
        {"floor_factor", c.contract.floor_factor},
        {"bootstrap", c.contract.bootstrap}}},
      {"chaos",
       {{"n_list", c.chaos.n_list},
        {"n_ref", c.chaos.n_ref},
        {"t_probe", c.chaos.t_probe},
        {"separation_stderr", c.chaos.separation_stderr}}},
      {"consistency",
       {{"epsilons", c.consistency.epsilons},
        {"baseline_pairs", c.consistency.baseline_pairs},
        {"agreement_stderr", c.consistency.agreement_stderr},
        {"mutation_stderr", c.consistency.mutation_stderr}}},
      {"appendix", appendix},
      {"moments", {{"plateau_window", c.moments.plateau_window}, {"plateau_factor", c.moments.plateau_factor}}},
      {"rates", {{"noise_sq_list", c.rates.noise_sq_list}}},
  };
}

}  // namespace mkv
