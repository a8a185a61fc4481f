#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "gdf/model.hpp"
#include "gdf/operators.hpp"

namespace gdf::conditions {

enum class ConditionId {
  condi1,            // liminf (a_n + d_n - g_n ((n+1)^m - n^m)/n^m) >= 0
  condi2,            // liminf n (a_n + d_n)/g_n >= m'
  condi3,            // liminf (a_n + d_n) = infinity
  condi4a,           // sum 1/g_n < infinity
  condi4b,           // lim n/g_n = 0
  riai,              // liminf (a_n + d_n)/g_n > 0
  crucrit_prime,     // liminf (a_n/(a_n+d_n)) Delta_n^{(m)}/n^m > m/m'
  crucrit,           // liminf (a_n/theta_n) Delta_n^{(m)}/n^m > 0
  ggamcond,          // g + 1 < (gamma+1)^2 <= (g+1)^2, symbolic from constants
  bdp1,              // limsup Gamma_n <= C
  thm3_2a,           // g_n <= C n
  thm3_2b,           // limsup d_n/g_n >= 1 and d_n = O(n^2)
  thm3_2c,           // d_n/g_n >= 1 + (m'-1)/n for large n
  growth_linear,     // g_n <= C n (generation of the growth part)
  growth_superlinear // c n^q <= g_n <= C n^q, q in (1, m+1]: no generation
};

std::string to_string(ConditionId id);
std::optional<ConditionId> condition_from_string(const std::string& name);
std::vector<ConditionId> all_conditions();

enum class Verdict { holds, fails, inconclusive };
std::string to_string(Verdict v);

struct ConditionVerdict {
  ConditionId id;
  Verdict verdict = Verdict::inconclusive;
  std::size_t n_lo = 0, n_hi = 0;
  std::vector<std::size_t> sample_n;  // geometric samples of the window
  std::vector<double> witness;        // diagnostic sequence at sample_n
  std::optional<double> limit_estimate;
  std::string note;
};

struct Window {
  std::size_t n_lo = 2;
  std::size_t n_hi = 10000;
  std::size_t points = 200;  // geometrically spaced
};

struct CheckerOptions {
  Window window;
  // Margin below which strict inequalities are classified inconclusive.
  double margin = 1e-6;
  // (angnle)/(ggamcond) constants gamma <= g; when absent they are derived
  // from min/max of g_n/a_n over the window if that ratio is stable.
  std::optional<double> gamma_bound;
  std::optional<double> g_bound;
};

ConditionVerdict evaluate_condition(const CoefficientModel& model, ConditionId id, double m,
                                    double m_prime, const CheckerOptions& opts = {});

struct DiagnosticSequences {
  std::vector<std::size_t> n;
  std::vector<double> lambda_seq;      // Lambda_n (death-absorbed drift)
  std::vector<double> theta_seq;       // Theta_n (full-theta drift)
  std::vector<double> gamma_seq;       // Gamma_n (birth-death drift)
  std::vector<double> delta_ratio;     // Delta_n^{(m)}/n^m
};

// Exact closed forms; no O(1/n) expansions.
DiagnosticSequences diagnostic_sequences(const CoefficientModel& model, double m,
                                         const Window& window = {});

struct FullReport {
  std::map<ConditionId, ConditionVerdict> verdicts;
  std::vector<std::string> claims;  // derived implication chain
  std::optional<NongenerationProfile> nongeneration;
  double m = 0.0, m_prime = 0.0;
};

// One verdict per condition id plus the derived claim chain; when the
// growth family is superlinear the resolvent non-boundedness profile is
// attached.
FullReport full_report(const CoefficientModel& model, double m, double m_prime,
                       const CheckerOptions& opts = {});

}  // namespace gdf::conditions
