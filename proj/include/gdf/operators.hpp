#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "gdf/kernels.hpp"
#include "gdf/model.hpp"
#include "gdf/spaces.hpp"

namespace gdf {

enum class OperatorKind { k_subdiagonal, u_full, u_adjoint, v_birth_death, f_fragmentation };
enum class TruncationPolicy { absorbing, reflecting };

std::string to_string(OperatorKind k);
std::string to_string(TruncationPolicy p);

// N x N matrix realization of K, U, U^T, V or F under a declared
// truncation policy. Internally: diagonal, sub- and superdiagonal bands
// plus the fragmentation block as dense per-row column ranges (kernels
// with closed-form sparse rows keep their rows short). u_adjoint is
// materialized as an explicit transpose so its matvec also walks rows.
class TruncatedOperator {
 public:
  std::size_t size() const { return n_; }
  OperatorKind kind() const { return kind_; }
  TruncationPolicy policy() const { return policy_; }

  // Entry (r, c), 0-based.
  double entry(std::size_t r, std::size_t c) const;

  // y = A x  (or A^T x for u_adjoint, through the materialized transpose).
  StateVector apply(const StateVector& x) const;
  void apply(std::span<const double> x, std::span<double> y) const;

  // Returns a copy with c added to every diagonal entry.
  TruncatedOperator shifted(double c) const;

  std::span<const double> diagonal() const { return diag_; }
  std::span<const double> subdiagonal() const { return sub_; }
  std::span<const double> superdiagonal() const { return super_; }
  const kernels::RangeRows* upper_block() const { return upper_.n > 0 ? &upper_ : nullptr; }

  double max_theta() const;  // max_n |diag_n| before shifts

  friend TruncatedOperator assemble(const CoefficientModel&, std::size_t, OperatorKind,
                                    TruncationPolicy);

 private:
  std::size_t n_ = 0;
  OperatorKind kind_ = OperatorKind::u_full;
  TruncationPolicy policy_ = TruncationPolicy::absorbing;
  std::vector<double> diag_;
  std::vector<double> sub_;    // entry (r+1, r)
  std::vector<double> super_;  // entry (r, r+1)
  kernels::RangeRows upper_;   // strictly upper block (lower for u_adjoint)
};

TruncatedOperator assemble(const CoefficientModel& model, std::size_t n, OperatorKind kind,
                           TruncationPolicy policy = TruncationPolicy::absorbing);

// u with u_n = sum_{i<=n} f_i/(lambda+theta_n) prod_{j=i}^{n-1} g_j/(lambda+theta_j),
// evaluated by the algebraically identical forward recurrence
// u_n = (f_n + g_{n-1} u_{n-1})/(lambda + theta_n). Exact and O(N); the
// literal product form would underflow and cost O(N^2).
StateVector resolvent_k_apply(const CoefficientModel& model, double lambda, const StateVector& f,
                              TruncationPolicy policy = TruncationPolicy::absorbing);

struct ResolventBoundProbe {
  double lambda = 0.0;
  double m = 0.0;
  double m_prime = 0.0;
  double bound = 0.0;         // m'/(m'-m)
  double max_ratio = 0.0;     // max over samples of lambda ||R f||_* / ||f||_*
  std::size_t samples = 0;
  bool condi2_holds = true;   // precondition verdict (probe still runs)
};

// Star-norm resolvent probe against the bound m'/(m'-m): random nonnegative
// f with support in [1, N], fixed seed.
ResolventBoundProbe resolvent_bound_probe(const CoefficientModel& model, double m, double m_prime,
                                          double lambda, std::size_t samples, std::size_t n);

struct NongenerationProfile {
  std::vector<std::size_t> truncations;
  std::vector<double> norm_m;         // ||R_N(lambda) delta_1||_[m] for requested m
  std::vector<double> norm_diag;      // same in the divergence norm [m_diag]
  double m = 0.0;
  double m_diag = 0.0;                // growth exponent q of g; polynomial divergence
  double lambda = 0.0;
  bool strictly_increasing_m = false;
  bool strictly_increasing_diag = false;
  double ratio_m = 0.0;               // final / initial
  double ratio_diag = 0.0;
};

// Non-generation diagnostic for pure growth: the truncated resolvent
// applied to delta_1 must blow up with N. In the [m]-norm with m = q - 1
// the divergence is only logarithmic; the profile is also reported in the
// [q]-norm where it is linear in N.
NongenerationProfile nongeneration_probe(const CoefficientModel& model, double m, double lambda,
                                         const std::vector<std::size_t>& truncations);

}  // namespace gdf
