#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "gdf/conditions.hpp"
#include "gdf/dynamics.hpp"
#include "gdf/model.hpp"
#include "gdf/spectral.hpp"

namespace gdf::aeg {

class PreconditionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ExperimentSetup {
  double m = 2.0;
  double m_prime = 3.0;
  std::size_t truncation = 2000;
  double t_end = 20.0;
  double t_min_fit = 1.0;
  double rtol = 1e-8;
  double atol = 1e-12;
  double max_step = 0.5;
  double dt_output = 0.1;
  TruncationPolicy policy = TruncationPolicy::absorbing;
  bool force = false;                 // run even if crucrit/condi3 fail
  bool star_norm_error = false;       // error curve in the gamma-weighted norm
  double spectral_tol = 1e-12;
};

struct DecayFit {
  double rate = 0.0;        // epsilon-hat = -slope
  double prefactor = 0.0;   // M-hat = exp(intercept)
  double rms_residual = 0.0;
  std::size_t samples_used = 0;
  bool at_floor = false;    // all samples at the numerical floor
};

struct AegResult {
  spectral::SpectralTriple spectral;
  dynamics::SimulationTrace trace;     // of the shifted system df/dt=(U-lambda0)f
  std::vector<double> error_times;
  std::vector<double> error_curve;     // ||e^{-lambda0 t} f(t) - <h,f_in> e||_[m]
  double projection_constant = 0.0;    // <h, f_in>
  DecayFit fit;
  conditions::Verdict crucrit_verdict = conditions::Verdict::inconclusive;
  conditions::Verdict condi3_verdict = conditions::Verdict::inconclusive;
  double m = 2.0;
};

// OLS on (t, log error) over samples with t >= t_min and error above the
// meaningful-data floor of 1e-14. Returns the +infinity-rate sentinel with
// at_floor set when nothing is above the floor.
DecayFit fit_decay_rate(const std::vector<double>& times, const std::vector<double>& errors,
                        double t_min);

// Composes spectral + dynamics: Perron triple, the shifted evolution, the
// error curve in the [m]-norm and its log-linear fit. The shifted form
// keeps every panel O(1); e^{lambda0 t} at t = 20 would already cost eight
// digits of headroom.
AegResult run_experiment(const CoefficientModel& model, const StateVector& f_in,
                         const ExperimentSetup& setup);

struct FigureConfigData {
  std::string id;
  CoefficientModel model;
  StateVector f_in;
  ExperimentSetup setup;
};

// The three hard-coded figure configurations.
FigureConfigData figure_config(const std::string& figure_id);

struct FigureFiles {
  std::vector<std::string> paths;
  AegResult result;
};

// Emits the four per-figure CSV panels (solution snapshots, asymptotic
// error vectors, asymptotic mass distribution, error-norm series) into
// out_dir. CSV layout lives in csvio.
FigureFiles figure_dataset(const std::string& figure_id, const std::string& out_dir);

}  // namespace gdf::aeg
