#include "gdf/cli.hpp"

#include <cstdlib>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "gdf/aeg.hpp"
#include "gdf/config.hpp"
#include "gdf/csvio.hpp"
#include "gdf/version.hpp"

namespace gdf::cli {

namespace {

using nlohmann::json;

std::string resolve_output_dir(const std::string& from_config) {
  const char* env = std::getenv("GDF_OUTPUT_DIR");
  return env != nullptr && *env != '\0' ? std::string(env) : from_config;
}

json base_output(const config::ExperimentConfig& cfg) {
  json j;
  j["library_version"] = kVersion;
  j["config"] = config::to_json(cfg);
  return j;
}

void emit_json(const json& j, const std::string& path) {
  if (path.empty()) {
    std::cout << j.dump(2) << "\n";
    return;
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open output file: " + path);
  out << j.dump(2) << "\n";
}

std::vector<std::pair<std::string, std::string>> csv_meta(const config::ExperimentConfig& cfg) {
  return {
      {"library", std::string("gdf ") + kVersion},
      {"label", cfg.label},
      {"truncation_N", std::to_string(cfg.truncation)},
      {"policy", cfg.policy},
      {"solver", cfg.solver},
      {"rtol", csvio::format_double(cfg.rtol)},
      {"atol", csvio::format_double(cfg.atol)},
      {"moment_order_m", csvio::format_double(cfg.m)},
      {"units", "time: 1/rate; states: cluster counts per size"},
      {"config", config::to_json(cfg).dump()},
  };
}

json verdict_to_json(const conditions::ConditionVerdict& cv) {
  json j;
  j["verdict"] = conditions::to_string(cv.verdict);
  j["window"] = {cv.n_lo, cv.n_hi};
  if (cv.limit_estimate) j["limit_estimate"] = *cv.limit_estimate;
  if (!cv.note.empty()) j["note"] = cv.note;
  json wit = json::array();
  const std::size_t stride = std::max<std::size_t>(1, cv.sample_n.size() / 16);
  for (std::size_t i = 0; i < cv.sample_n.size(); i += stride)
    wit.push_back({{"n", cv.sample_n[i]}, {"value", cv.witness[i]}});
  j["witness"] = wit;
  return j;
}

int cmd_check(const std::string& config_path, const std::string& out_path) {
  const auto cfg = config::load(config_path);
  const auto model = config::build_model(cfg);
  const auto report = conditions::full_report(model, cfg.m, cfg.m_prime);
  json j = base_output(cfg);
  for (const auto& [id, cv] : report.verdicts)
    j["conditions"][conditions::to_string(id)] = verdict_to_json(cv);
  j["claims"] = report.claims;
  if (report.nongeneration) {
    const auto& p = *report.nongeneration;
    j["nongeneration_probe"] = {
        {"truncations", p.truncations},
        {"norm_m", p.norm_m},
        {"norm_divergence_order", p.m_diag},
        {"norm_diag", p.norm_diag},
        {"strictly_increasing_m", p.strictly_increasing_m},
        {"strictly_increasing_diag", p.strictly_increasing_diag},
        {"ratio_m", p.ratio_m},
        {"ratio_diag", p.ratio_diag},
        {"lambda", p.lambda},
    };
  }
  emit_json(j, out_path);
  return 0;
}

int cmd_spectrum(const std::string& config_path, const std::string& out_path) {
  const auto cfg = config::load(config_path);
  const auto model = config::build_model(cfg);
  spectral::PerronOptions popts;
  popts.m_norm = cfg.m;
  const auto triple = spectral::perron_eigenpair(model, cfg.truncation, popts);
  json j = base_output(cfg);
  j["lambda0"] = triple.lambda0;
  j["residual_right"] = triple.residual_right;
  j["residual_left"] = triple.residual_left;
  j["iterations"] = {triple.iterations_right, triple.iterations_left};

  std::vector<std::size_t> ns;
  for (std::size_t n = std::max<std::size_t>(16, cfg.truncation / 8); n < cfg.truncation; n *= 2)
    ns.push_back(n);
  ns.push_back(cfg.truncation);
  const auto study = spectral::truncation_convergence(model, ns, popts);
  j["convergence"] = {{"truncations", study.truncations},
                      {"lambda0", study.lambda0},
                      {"increments", study.increments}};

  if (cfg.truncation <= 1500) {
    const auto gap = spectral::spectral_gap(model, cfg.truncation, config::parse_policy(cfg.policy));
    j["gap"] = gap.gap;
    j["resolved_modes"] = gap.resolved_modes;
    j["boundary_modes"] = gap.boundary_modes;
    j["worst_moment_ratio"] = gap.worst_moment_ratio;
  } else {
    j["gap_note"] = "dense eigensolve skipped: N > 1500";
  }
  emit_json(j, out_path);
  return 0;
}

int cmd_simulate(const std::string& config_path) {
  const auto cfg = config::load(config_path);
  const auto model = config::build_model(cfg);
  const auto f0 = config::build_initial(cfg);
  dynamics::SolverOptions sopts;
  sopts.scheme =
      cfg.solver == "implicit_euler" ? dynamics::Scheme::implicit_euler : dynamics::Scheme::trbdf2;
  sopts.rtol = cfg.rtol;
  sopts.atol = cfg.atol;
  sopts.max_step = cfg.max_step;
  sopts.dt_output = cfg.dt_output;
  sopts.m_norm = cfg.m;
  const auto trace =
      dynamics::integrate(model, f0, cfg.t0, cfg.t1, sopts, config::parse_policy(cfg.policy));

  const std::string dir = resolve_output_dir(cfg.output_dir);
  csvio::ensure_directory(dir);
  const std::string path = (dir.empty() ? "" : dir + "/") + cfg.label + "_trace.csv";
  std::vector<std::string> cols = {"t", "M", "norm_m", "boundary_flux", "leaked_mass"};
  std::vector<std::size_t> samples;
  for (std::size_t s : cfg.sample_sizes)
    if (s >= 1 && s <= cfg.truncation) samples.push_back(s);
  for (std::size_t s : samples) cols.push_back("f_" + std::to_string(s));
  csvio::CsvWriter w(path, csv_meta(cfg), cols);
  std::vector<double> row;
  for (std::size_t k = 0; k < trace.times.size(); ++k) {
    row = {trace.times[k], trace.mass[k], trace.norm_m[k], trace.boundary_flux[k],
           trace.leaked_mass[k]};
    for (std::size_t s : samples) row.push_back(trace.states[k][s - 1]);
    w.row(row);
  }
  std::cout << path << "\n";
  if (trace.max_upper_mass_fraction > 1e-8)
    std::cerr << "warning: mass fraction above N/2 reached "
              << csvio::format_double(trace.max_upper_mass_fraction)
              << "; the truncation is feeling the boundary\n";
  return 0;
}

int cmd_aeg(const std::string& config_path) {
  const auto cfg = config::load(config_path);
  const auto model = config::build_model(cfg);
  const auto f0 = config::build_initial(cfg);
  const auto setup = config::build_setup(cfg);
  const auto res = aeg::run_experiment(model, f0, setup);

  const std::string dir = resolve_output_dir(cfg.output_dir);
  csvio::ensure_directory(dir);
  const std::string csv_path = (dir.empty() ? "" : dir + "/") + cfg.label + "_aeg.csv";
  csvio::CsvWriter w(csv_path, csv_meta(cfg), {"t", "error_norm_m", "mass_shifted"});
  for (std::size_t k = 0; k < res.error_times.size(); ++k)
    w.row({res.error_times[k], res.error_curve[k], res.trace.mass[k]});

  json j = base_output(cfg);
  j["lambda0"] = res.spectral.lambda0;
  j["projection_constant"] = res.projection_constant;
  j["fit"] = {{"rate", res.fit.rate},
              {"prefactor", res.fit.prefactor},
              {"rms_residual", res.fit.rms_residual},
              {"samples_used", res.fit.samples_used},
              {"at_floor", res.fit.at_floor}};
  j["crucrit"] = conditions::to_string(res.crucrit_verdict);
  j["condi3"] = conditions::to_string(res.condi3_verdict);
  j["error_csv"] = csv_path;
  emit_json(j, (dir.empty() ? "" : dir + "/") + cfg.label + "_aeg.json");
  std::cout << csv_path << "\n";
  return 0;
}

int cmd_figure(const std::string& figure_id, const std::string& out_dir) {
  const std::string dir = resolve_output_dir(out_dir);
  const auto files = aeg::figure_dataset(figure_id, dir);
  json j;
  j["library_version"] = kVersion;
  j["figure"] = figure_id;
  j["lambda0"] = files.result.spectral.lambda0;
  j["projection_constant"] = files.result.projection_constant;
  j["fit_rate"] = files.result.fit.rate;
  j["files"] = files.paths;
  emit_json(j, (dir.empty() ? figure_id : dir + "/" + figure_id) + "_summary.json");
  for (const auto& p : files.paths) std::cout << p << "\n";
  return 0;
}

int cmd_resolvent(const std::string& config_path, std::vector<double> lambdas,
                  std::size_t samples, const std::string& out_path) {
  const auto cfg = config::load(config_path);
  const auto model = config::build_model(cfg);
  if (lambdas.empty()) lambdas = {1.0, 10.0};
  json j = base_output(cfg);
  j["bound"] = cfg.m_prime / (cfg.m_prime - cfg.m);
  json probes = json::array();
  for (double lam : lambdas) {
    const auto probe =
        resolvent_bound_probe(model, cfg.m, cfg.m_prime, lam, samples, cfg.truncation);
    probes.push_back({{"lambda", lam},
                      {"max_ratio", probe.max_ratio},
                      {"samples", probe.samples},
                      {"condi2_holds", probe.condi2_holds}});
  }
  j["probes"] = probes;
  emit_json(j, out_path);
  return 0;
}

}  // namespace

int run_command(const std::vector<std::string>& args) {
  CLI::App app{"discrete growth-decay-fragmentation equation toolkit"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);

  std::string config_path, out_path, figure_id, out_dir;
  std::vector<double> lambdas;
  std::size_t samples = 100;

  auto* check = app.add_subcommand("check", "run the condition checker, emit JSON verdicts");
  check->add_option("--config", config_path, "experiment config (JSON)")->required();
  check->add_option("--out", out_path, "output JSON path (default stdout)");

  auto* spectrum = app.add_subcommand("spectrum", "Perron eigenpair, gap, convergence in N");
  spectrum->add_option("--config", config_path)->required();
  spectrum->add_option("--out", out_path);

  auto* simulate = app.add_subcommand("simulate", "integrate the truncated system, emit CSV");
  simulate->add_option("--config", config_path)->required();

  auto* aeg_cmd = app.add_subcommand("aeg", "full asymptotic-growth experiment");
  aeg_cmd->add_option("--config", config_path)->required();

  auto* figure = app.add_subcommand("figure", "emit the fig1/fig2/fig3 datasets");
  figure->add_option("id", figure_id, "fig1|fig2|fig3")->required();
  figure->add_option("--outdir", out_dir, "output directory (default: figure id used in cwd)");

  auto* resolvent = app.add_subcommand("resolvent", "star-norm resolvent bound probe");
  resolvent->add_option("--config", config_path)->required();
  resolvent->add_option("--lambda", lambdas, "lambda values (default 1 10)");
  resolvent->add_option("--samples", samples, "random states per lambda");
  resolvent->add_option("--out", out_path);

  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (check->parsed()) return cmd_check(config_path, out_path);
    if (spectrum->parsed()) return cmd_spectrum(config_path, out_path);
    if (simulate->parsed()) return cmd_simulate(config_path);
    if (aeg_cmd->parsed()) return cmd_aeg(config_path);
    if (figure->parsed()) return cmd_figure(figure_id, out_dir);
    if (resolvent->parsed()) return cmd_resolvent(config_path, lambdas, samples, out_path);
  } catch (const config::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const aeg::PreconditionError& e) {
    std::cerr << "precondition failed: " << e.what() << "\n";
    return 3;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 2;
  }
  return 1;
}

int run_command(int argc, char** argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run_command(args);
}

}  // namespace gdf::cli
