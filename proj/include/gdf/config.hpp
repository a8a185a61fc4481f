#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include <json.hpp>

#include "gdf/aeg.hpp"
#include "gdf/model.hpp"
#include "gdf/operators.hpp"
#include "gdf/spaces.hpp"

namespace gdf::config {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RateSpec {
  std::string family = "zero";  // zero|constant|linear|power|induced|table
  double coeff = 0.0;
  double exponent = 1.0;
  std::vector<double> values;  // table
};

struct KernelSpec {
  std::string type = "monomer_shatter";
  // homogeneous_beta / binary_psi
  double beta = 0.0;
  std::string psi_family = "sum";  // sum|product
  std::vector<std::vector<double>> rows;  // table
};

struct InitialSpec {
  std::string type = "delta";  // delta|vector
  std::size_t site = 10;
  double weight = 10.0;
  std::vector<double> values;
};

struct ExperimentConfig {
  std::string label = "experiment";
  RateSpec a, g, d;
  KernelSpec kernel;
  InitialSpec initial;
  double m = 2.0;
  double m_prime = 3.0;
  std::size_t truncation = 1000;
  double t0 = 0.0;
  double t1 = 10.0;
  double rtol = 1e-8;
  double atol = 1e-12;
  double max_step = 0.5;
  double dt_output = 0.1;
  double t_min_fit = 1.0;
  std::string policy = "absorbing";
  std::string solver = "trbdf2";
  std::string output_dir = "out";
  std::vector<std::size_t> sample_sizes = {1, 2, 5, 10, 20, 50, 100};
  bool deterministic = true;  // always true; present so configs say it out loud
  bool force = false;
};

// Strict parsing: unknown fields are rejected at every level.
ExperimentConfig parse(const nlohmann::json& j);
ExperimentConfig load(const std::string& path);
nlohmann::json to_json(const ExperimentConfig& cfg);

// Builds the model (psi-induced rates are tabulated when a.family is
// "induced"), the initial state, and the rest of the run setup.
CoefficientModel build_model(const ExperimentConfig& cfg);
StateVector build_initial(const ExperimentConfig& cfg);
TruncationPolicy parse_policy(const std::string& name);
aeg::ExperimentSetup build_setup(const ExperimentConfig& cfg);

}  // namespace gdf::config
