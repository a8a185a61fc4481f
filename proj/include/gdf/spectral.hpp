#pragma once

#include <complex>
#include <cstddef>
#include <optional>
#include <vector>

#include "gdf/model.hpp"
#include "gdf/operators.hpp"
#include "gdf/spaces.hpp"

namespace gdf::spectral {

class SpectralError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Perron data of a truncation: the dominant eigenvalue, the right
// eigenvector e normalized to unit mass (sum n e_n = 1), and the adjoint
// eigenvector h normalized so <h, e> = 1. The left residual is measured on
// rows 1..N-1 only; row N of U^T is truncation-corrupted.
struct SpectralTriple {
  double lambda0 = 0.0;
  StateVector e;
  StateVector h;
  double residual_right = 0.0;
  double residual_left = 0.0;
  std::optional<double> gap;  // filled by spectral_gap
  std::size_t truncation = 0;
  std::size_t iterations_right = 0;
  std::size_t iterations_left = 0;
};

struct PerronOptions {
  double tol = 1e-13;            // infinity-norm relative eigen-residual
  std::size_t max_iterations = 2'000'000;
  double m_norm = 1.0;           // norm order for the reported residuals
};

// Power iteration on the nonnegative shift U + sigma I with
// sigma = max theta + 1 and the all-ones start vector; h comes from the
// same iteration on the materialized transpose. Deterministic.
SpectralTriple perron_eigenpair(const CoefficientModel& model, std::size_t n,
                                const PerronOptions& opts = {});

// Non-convergence diagnostics: last Rayleigh values, exposed on throw.
struct PowerIterationResult {
  double eigenvalue = 0.0;  // of the shifted matrix
  StateVector v;
  double residual = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
  std::vector<double> rayleigh_tail;
};

PowerIterationResult power_iteration(const TruncatedOperator& op, double sigma,
                                     const PerronOptions& opts);

// The scalar root equation of the monomer-shatter model with d = 0:
// psi(lambda) = (lambda+g_1)/g_1 against the series phi(lambda); the series
// is truncated when its geometric tail bound falls below 1e-14 of the
// partial sum.
struct Example1Result {
  double lambda0 = 0.0;
  StateVector eigenvector;      // closed form, f_1 = 1
  double phi_at_root = 0.0;
  double row1_residual = 0.0;   // eigen-equation defect in row 1 (series tail + root tol)
  std::size_t bisection_steps = 0;
  double gamma_bound = 0.0, g_bound = 0.0;  // derived (angnle) constants
};

Example1Result example1_solve(const CoefficientModel& model, std::size_t n,
                              double lambda_hi = 0.0 /* 0: automatic bracket */);

// Detects g_n = r n with d = 0 (sampled to 1e-12 over n <= 1000) and
// returns the exact pair (r, h = (1, 2, ...)).
struct ExactLinearGrowth {
  double rate = 0.0;
  StateVector h;
};
std::optional<ExactLinearGrowth> exact_linear_growth(const CoefficientModel& model, std::size_t n);

// Dense nonsymmetric eigensolve of the truncation (N <= 1500).
struct SpectralGapResult {
  double lambda0 = 0.0;
  double gap = 0.0;  // lambda0 - max{Re lambda : lambda != lambda0}
  std::vector<std::complex<double>> eigenvalues;
  // Moment-orthogonality data for Example-2 style models: the worst
  // |sum n v_n| / ||v||_[1] over non-Perron eigenvectors whose zero-padded
  // extension actually satisfies the infinite eigen-equation (boundary
  // defect g_N |v_N| / (theta_max ||v||_inf) < defect_tol). Truncation
  // artifacts concentrated at the boundary carry an O(1) defect and are
  // reported separately, not tested against the orthogonality bound.
  double worst_moment_ratio = 0.0;
  std::size_t resolved_modes = 0;
  std::size_t boundary_modes = 0;
  double defect_tol = 1e-10;
};

SpectralGapResult spectral_gap(const CoefficientModel& model, std::size_t n,
                               TruncationPolicy policy = TruncationPolicy::absorbing);

struct ConvergenceStudy {
  std::vector<std::size_t> truncations;
  std::vector<double> lambda0;
  std::vector<double> increments;  // |lambda0(N_{k+1}) - lambda0(N_k)|
};

ConvergenceStudy truncation_convergence(const CoefficientModel& model,
                                        const std::vector<std::size_t>& truncations,
                                        const PerronOptions& opts = {});

}  // namespace gdf::spectral
