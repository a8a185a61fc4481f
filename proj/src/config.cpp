#include "gdf/config.hpp"

#include <fstream>

namespace gdf::config {

namespace {

using nlohmann::json;

void reject_unknown(const json& j, const std::vector<std::string>& allowed,
                    const std::string& where) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const auto& k : allowed)
      if (it.key() == k) { ok = true; break; }
    if (!ok) throw ConfigError("unknown field '" + it.key() + "' in " + where);
  }
}

template <typename T>
T get_or(const json& j, const std::string& key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError("bad value for '" + key + "': " + e.what());
  }
}

RateSpec parse_rate(const json& j, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + " must be an object");
  reject_unknown(j, {"family", "coeff", "exponent", "values"}, where);
  RateSpec r;
  r.family = get_or<std::string>(j, "family", "zero");
  r.coeff = get_or<double>(j, "coeff", 0.0);
  r.exponent = get_or<double>(j, "exponent", 1.0);
  r.values = get_or<std::vector<double>>(j, "values", {});
  const bool known = r.family == "zero" || r.family == "constant" || r.family == "linear" ||
                     r.family == "power" || r.family == "induced" || r.family == "table";
  if (!known) throw ConfigError("unknown rate family '" + r.family + "' in " + where);
  if (r.family == "table" && r.values.empty())
    throw ConfigError(where + ": table family needs values");
  return r;
}

KernelSpec parse_kernel(const json& j) {
  if (!j.is_object()) throw ConfigError("model.kernel must be an object");
  reject_unknown(j, {"type", "beta", "psi_family", "rows"}, "model.kernel");
  KernelSpec k;
  k.type = get_or<std::string>(j, "type", "monomer_shatter");
  k.beta = get_or<double>(j, "beta", 0.0);
  k.psi_family = get_or<std::string>(j, "psi_family", "sum");
  k.rows = get_or<std::vector<std::vector<double>>>(j, "rows", {});
  const bool known = k.type == "monomer_shatter" || k.type == "uniform_binary" ||
                     k.type == "homogeneous_beta" || k.type == "binary_psi" ||
                     k.type == "ends_only" || k.type == "table";
  if (!known) throw ConfigError("unknown kernel type '" + k.type + "'");
  return k;
}

InitialSpec parse_initial(const json& j) {
  if (!j.is_object()) throw ConfigError("initial must be an object");
  reject_unknown(j, {"type", "site", "weight", "values"}, "initial");
  InitialSpec s;
  s.type = get_or<std::string>(j, "type", "delta");
  s.site = get_or<std::size_t>(j, "site", 10);
  s.weight = get_or<double>(j, "weight", 10.0);
  s.values = get_or<std::vector<double>>(j, "values", {});
  if (s.type != "delta" && s.type != "vector")
    throw ConfigError("unknown initial type '" + s.type + "'");
  return s;
}

}  // namespace

ExperimentConfig parse(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("config root must be an object");
  reject_unknown(j,
                 {"label", "model", "initial", "m", "m_prime", "N", "t_span", "rtol", "atol",
                  "max_step", "dt_output", "t_min_fit", "policy", "solver", "output_dir",
                  "sample_sizes", "deterministic", "force"},
                 "config");
  ExperimentConfig cfg;
  cfg.label = get_or<std::string>(j, "label", "experiment");
  if (j.contains("model")) {
    const json& m = j.at("model");
    reject_unknown(m, {"a", "g", "d", "kernel"}, "model");
    if (m.contains("a")) cfg.a = parse_rate(m.at("a"), "model.a");
    if (m.contains("g")) cfg.g = parse_rate(m.at("g"), "model.g");
    if (m.contains("d")) cfg.d = parse_rate(m.at("d"), "model.d");
    if (m.contains("kernel")) cfg.kernel = parse_kernel(m.at("kernel"));
  }
  if (j.contains("initial")) cfg.initial = parse_initial(j.at("initial"));
  cfg.m = get_or<double>(j, "m", cfg.m);
  cfg.m_prime = get_or<double>(j, "m_prime", cfg.m_prime);
  cfg.truncation = get_or<std::size_t>(j, "N", cfg.truncation);
  if (j.contains("t_span")) {
    const auto span = j.at("t_span").get<std::vector<double>>();
    if (span.size() != 2 || !(span[1] > span[0]))
      throw ConfigError("t_span must be [t0, t1] with t1 > t0");
    cfg.t0 = span[0];
    cfg.t1 = span[1];
  }
  cfg.rtol = get_or<double>(j, "rtol", cfg.rtol);
  cfg.atol = get_or<double>(j, "atol", cfg.atol);
  cfg.max_step = get_or<double>(j, "max_step", cfg.max_step);
  cfg.dt_output = get_or<double>(j, "dt_output", cfg.dt_output);
  cfg.t_min_fit = get_or<double>(j, "t_min_fit", cfg.t_min_fit);
  cfg.policy = get_or<std::string>(j, "policy", cfg.policy);
  cfg.solver = get_or<std::string>(j, "solver", cfg.solver);
  cfg.output_dir = get_or<std::string>(j, "output_dir", cfg.output_dir);
  cfg.sample_sizes = get_or<std::vector<std::size_t>>(j, "sample_sizes", cfg.sample_sizes);
  cfg.deterministic = get_or<bool>(j, "deterministic", true);
  cfg.force = get_or<bool>(j, "force", false);
  if (!cfg.deterministic) throw ConfigError("deterministic=false is not supported");
  if (cfg.policy != "absorbing" && cfg.policy != "reflecting")
    throw ConfigError("policy must be absorbing or reflecting");
  if (cfg.solver != "trbdf2" && cfg.solver != "implicit_euler")
    throw ConfigError("solver must be trbdf2 or implicit_euler");
  if (cfg.truncation < 2) throw ConfigError("N must be >= 2");
  return cfg;
}

ExperimentConfig load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  return parse(j);
}

namespace {

json rate_to_json(const RateSpec& r) {
  json j;
  j["family"] = r.family;
  if (r.family == "constant" || r.family == "linear" || r.family == "power") j["coeff"] = r.coeff;
  if (r.family == "power") j["exponent"] = r.exponent;
  if (r.family == "table") j["values"] = r.values;
  return j;
}

}  // namespace

nlohmann::json to_json(const ExperimentConfig& cfg) {
  json j;
  j["label"] = cfg.label;
  j["model"]["a"] = rate_to_json(cfg.a);
  j["model"]["g"] = rate_to_json(cfg.g);
  j["model"]["d"] = rate_to_json(cfg.d);
  json k;
  k["type"] = cfg.kernel.type;
  if (cfg.kernel.type == "homogeneous_beta" || cfg.kernel.type == "binary_psi")
    k["beta"] = cfg.kernel.beta;
  if (cfg.kernel.type == "binary_psi") k["psi_family"] = cfg.kernel.psi_family;
  if (cfg.kernel.type == "table") k["rows"] = cfg.kernel.rows;
  j["model"]["kernel"] = k;
  json init;
  init["type"] = cfg.initial.type;
  if (cfg.initial.type == "delta") {
    init["site"] = cfg.initial.site;
    init["weight"] = cfg.initial.weight;
  } else {
    init["values"] = cfg.initial.values;
  }
  j["initial"] = init;
  j["m"] = cfg.m;
  j["m_prime"] = cfg.m_prime;
  j["N"] = cfg.truncation;
  j["t_span"] = {cfg.t0, cfg.t1};
  j["rtol"] = cfg.rtol;
  j["atol"] = cfg.atol;
  j["max_step"] = cfg.max_step;
  j["dt_output"] = cfg.dt_output;
  j["t_min_fit"] = cfg.t_min_fit;
  j["policy"] = cfg.policy;
  j["solver"] = cfg.solver;
  j["output_dir"] = cfg.output_dir;
  j["sample_sizes"] = cfg.sample_sizes;
  j["deterministic"] = cfg.deterministic;
  j["force"] = cfg.force;
  return j;
}

namespace {

FragmentationKernel build_kernel(const KernelSpec& k) {
  if (k.type == "monomer_shatter") return FragmentationKernel::monomer_shatter();
  if (k.type == "uniform_binary") return FragmentationKernel::uniform_binary();
  if (k.type == "ends_only") return FragmentationKernel::ends_only();
  if (k.type == "homogeneous_beta") return FragmentationKernel::homogeneous_beta(k.beta);
  if (k.type == "binary_psi") {
    if (k.psi_family == "sum") return FragmentationKernel::binary_psi_sum(k.beta);
    if (k.psi_family == "product") return FragmentationKernel::binary_psi_product(k.beta);
    throw ConfigError("binary_psi: psi_family must be sum or product");
  }
  if (k.type == "table") return FragmentationKernel::from_table(k.rows);
  throw ConfigError("unknown kernel type '" + k.type + "'");
}

RateFunction build_rate(const RateSpec& r, const std::string& where) {
  if (r.family == "zero") return RateFunction::zero();
  if (r.family == "constant") return RateFunction::constant(r.coeff);
  if (r.family == "linear") return RateFunction::linear(r.coeff);
  if (r.family == "power") return RateFunction::power(r.coeff, r.exponent);
  if (r.family == "table") return RateFunction::table(r.values);
  throw ConfigError(where + ": family '" + r.family + "' not buildable here");
}

}  // namespace

CoefficientModel build_model(const ExperimentConfig& cfg) {
  FragmentationKernel kernel = build_kernel(cfg.kernel);
  RateFunction a = RateFunction::zero();
  if (cfg.a.family == "induced") {
    if (cfg.kernel.type != "binary_psi")
      throw ConfigError("a.family=induced needs a binary_psi kernel");
    const std::size_t upto = std::max<std::size_t>(cfg.truncation, 10000);
    std::vector<double> avals(upto, 0.0);
    for (std::size_t n = 2; n <= upto; ++n) avals[n - 1] = *kernel.induced_rate(n);
    a = RateFunction::table(std::move(avals));
  } else {
    a = build_rate(cfg.a, "model.a");
  }
  CoefficientModel model(std::move(a), build_rate(cfg.g, "model.g"), build_rate(cfg.d, "model.d"),
                         std::move(kernel), cfg.label);
  model.validate(std::min<std::size_t>(cfg.truncation, 1000));
  return model;
}

StateVector build_initial(const ExperimentConfig& cfg) {
  if (cfg.initial.type == "delta")
    return StateVector::delta(cfg.initial.site, cfg.truncation, cfg.initial.weight);
  if (cfg.initial.values.empty()) throw ConfigError("initial vector needs values");
  StateVector f(cfg.truncation);
  for (std::size_t i = 0; i < cfg.initial.values.size() && i < cfg.truncation; ++i)
    f[i] = cfg.initial.values[i];
  return f;
}

TruncationPolicy parse_policy(const std::string& name) {
  if (name == "absorbing") return TruncationPolicy::absorbing;
  if (name == "reflecting") return TruncationPolicy::reflecting;
  throw ConfigError("policy must be absorbing or reflecting");
}

aeg::ExperimentSetup build_setup(const ExperimentConfig& cfg) {
  aeg::ExperimentSetup s;
  s.m = cfg.m;
  s.m_prime = cfg.m_prime;
  s.truncation = cfg.truncation;
  s.t_end = cfg.t1;
  s.t_min_fit = cfg.t_min_fit;
  s.rtol = cfg.rtol;
  s.atol = cfg.atol;
  s.max_step = cfg.max_step;
  s.dt_output = cfg.dt_output;
  s.policy = parse_policy(cfg.policy);
  s.force = cfg.force;
  return s;
}

}  // namespace gdf::config
