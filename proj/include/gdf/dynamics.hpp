#pragma once

#include <cstddef>
#include <vector>

#include "gdf/model.hpp"
#include "gdf/operators.hpp"
#include "gdf/spaces.hpp"

namespace gdf::dynamics {

// Raised on step-size underflow or a non-finite state.
class IntegrationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Scheme { trbdf2, implicit_euler };

struct SolverOptions {
  Scheme scheme = Scheme::trbdf2;
  double rtol = 1e-8;
  double atol = 1e-12;
  double max_step = 0.5;
  double dt_output = 0.1;   // trace grid spacing
  double shift = 0.0;       // integrates df/dt = (A - shift I) f
  double m_norm = 1.0;      // moment order recorded in the trace
  std::size_t max_steps = 50'000'000;
};

struct SimulationTrace {
  std::vector<double> times;
  std::vector<StateVector> states;
  std::vector<double> mass;           // M(t) = sum n f_n
  std::vector<double> norm_m;         // [m]-norm of f
  std::vector<double> boundary_flux;  // N g_N f_N(t), policy-aware
  std::vector<double> leaked_mass;    // cumulative; 0 under reflecting
  double m_norm_order = 1.0;
  std::size_t truncation = 0;
  TruncationPolicy policy = TruncationPolicy::absorbing;
  double shift = 0.0;
  std::size_t steps_taken = 0;
  std::size_t steps_rejected = 0;
  std::size_t factorizations = 0;
  // Largest fraction of [m]-mass sitting above n = N/2 seen during the run;
  // > 1e-8 means the truncation is feeling the upper boundary.
  double max_upper_mass_fraction = 0.0;
};

// Solves df/dt = (A - shift) f over [t0, t1] with an L-stable one-step
// scheme. TR-BDF2 (default) runs adaptive with the standard three-point
// error estimate filtered through the stage matrix; implicit Euler is the
// fixed-step baseline. Each implicit stage is one Hessenberg solve with the
// factorization reused while the step size holds.
SimulationTrace integrate(const CoefficientModel& model, const TruncatedOperator& op,
                          const StateVector& f_in, double t0, double t1,
                          const SolverOptions& opts);

// Convenience overload: assembles U under the given policy.
SimulationTrace integrate(const CoefficientModel& model, const StateVector& f_in, double t0,
                          double t1, const SolverOptions& opts,
                          TruncationPolicy policy = TruncationPolicy::absorbing);

// Lie-Trotter composition (exp((t/n)V) exp((t/n)F))^n f_in with both factors
// applied through dense matrix exponentials (scaling and squaring).
StateVector trotter_evolve(const CoefficientModel& model, const StateVector& f_in, double t,
                           std::size_t n_steps,
                           TruncationPolicy policy = TruncationPolicy::absorbing);

// max over the interior grid of |dM/dt - sum_{n<N}(g_n - d_n) f_n + N g_N f_N|
// with dM/dt by centered differences; the boundary term is policy-aware.
double mass_balance_residual(const SimulationTrace& trace, const CoefficientModel& model);

// Dense exp(tA) f for small truncations (test and Trotter support).
StateVector expm_apply(const TruncatedOperator& op, double t, const StateVector& f);

}  // namespace gdf::dynamics
