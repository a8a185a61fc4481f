#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <string>
#include <unordered_map>
#include <vector>

namespace gdf {

// A rate sequence n -> rate as a total function: closed-form families plus
// a tabulated fallback, so condition checkers can probe far beyond any
// truncation size.
class RateFunction {
 public:
  static RateFunction zero();
  static RateFunction constant(double c);
  static RateFunction linear(double c);                // c * n
  static RateFunction power(double c, double p);       // c * n^p
  static RateFunction table(std::vector<double> vals);  // clamped beyond the table

  double operator()(std::size_t n) const;
  bool is_zero() const { return family_ == Family::zero; }
  std::string describe() const;

 private:
  enum class Family { zero, constant, linear, power, table };
  Family family_ = Family::zero;
  double coeff_ = 0.0;
  double exponent_ = 1.0;
  std::vector<double> table_;
};

// Daughter distribution b_{k,n}: expected number of size-k fragments from a
// splitting size-n parent, subject to the mass rule
//   sum_{k=1}^{n-1} k b_{k,n} = n,   n >= 2.
// The homogeneous-profile normalizer zeta(n) and the psi-induced rate a_n
// are computed per parent and memoized (operator assembly walks whole rows;
// an O(N^2) assembly must not redo the O(n) sums per entry).
class FragmentationKernel {
 public:
  enum class Variant { monomer_shatter, uniform_binary, homogeneous_profile, binary_psi, ends_only, table };

  // Every fragment is a monomer: b_{1,n} = n.
  static FragmentationKernel monomer_shatter();
  // b_{k,n} = 2/(n-1).
  static FragmentationKernel uniform_binary();
  // b_{k,n} = zeta(n) h(k/n), zeta chosen so the mass rule holds exactly at
  // every n (not only asymptotically).
  static FragmentationKernel homogeneous_profile(std::function<double(double)> h,
                                                 std::string label = "homogeneous_profile");
  static FragmentationKernel homogeneous_beta(double beta);  // h(z) = z^b (1-z)^b
  // Binary splitting from a symmetric matrix psi: b_{k,n} = psi_{k,n-k}/a_n
  // with the induced rate a_n = (1/2) sum_i psi_{i,n-i}.
  static FragmentationKernel binary_psi(std::function<double(std::size_t, std::size_t)> psi,
                                        std::string label = "binary_psi");
  static FragmentationKernel binary_psi_sum(double beta);      // psi_{i,j} = (i+j)^beta
  static FragmentationKernel binary_psi_product(double beta);  // psi_{i,j} = (ij)^beta
  // b_{1,2} = 2, b_{1,n} = b_{n-1,n} = 1, zero in between: the non-compact
  // counterexample.
  static FragmentationKernel ends_only();
  // Explicit finite table rows[n] = (b_{1,n}, ..., b_{n-1,n}) for n = 2..
  static FragmentationKernel from_table(std::vector<std::vector<double>> rows);

  // b_{k,n} for 1 <= k <= n-1, n >= 2.
  double operator()(std::size_t k, std::size_t n) const;
  // Fills out[0..n-2] with b_{1,n}..b_{n-1,n}.
  void row(std::size_t n, std::vector<double>& out) const;

  // For binary_psi: the rate a_n the psi matrix induces. Empty otherwise.
  std::optional<double> induced_rate(std::size_t n) const;

  Variant variant() const { return variant_; }
  const std::string& label() const { return label_; }
  // Structure of the induced fragmentation block B[k][n] = a_n b_{k,n}:
  // kernels with closed-form zero patterns let the assembly and matvecs
  // skip whole rows.
  enum class RowStructure { dense, first_row_only, first_row_plus_superdiag };
  RowStructure row_structure() const;
  std::size_t max_table_parent() const;  // table variant only, else 0

 private:
  FragmentationKernel(Variant v, std::string label) : variant_(v), label_(std::move(label)) {}
  double normalizer(std::size_t n) const;  // zeta(n) or psi-induced a_n, memoized

  Variant variant_;
  std::string label_;
  std::function<double(double)> profile_;
  std::function<double(std::size_t, std::size_t)> psi_;
  std::vector<std::vector<double>> table_;

  struct Cache {
    mutable std::shared_mutex mu;
    mutable std::unordered_map<std::size_t, double> per_n;
  };
  std::shared_ptr<Cache> cache_ = std::make_shared<Cache>();
};

// The full problem data: rates a_n (fragmentation), g_n (growth),
// d_n (death) and the daughter distribution. a_1 is forced to 0 (a size-1
// cluster cannot split). d_1 = 0 is the paper's convention but is not
// forced: the conservative g = d models of Figs. 2-3 need d_1 = g_1, and
// the generator never reads a size-0 state either way.
class CoefficientModel {
 public:
  CoefficientModel(RateFunction a, RateFunction g, RateFunction d, FragmentationKernel kernel,
                   std::string label = "");

  double frag_rate(std::size_t n) const;    // a_n, with a_1 = 0
  double growth_rate(std::size_t n) const;  // g_n
  double death_rate(std::size_t n) const;   // d_n
  double theta(std::size_t n) const { return frag_rate(n) + growth_rate(n) + death_rate(n); }
  double a_eff(std::size_t n) const { return frag_rate(n) + death_rate(n); }  // a_n + d_n

  const FragmentationKernel& kernel() const { return kernel_; }
  const std::string& label() const { return label_; }

  // Checks finiteness/nonnegativity of the rates over 1..n_probe and the
  // d_1 convention; throws on hard violations, returns warnings otherwise.
  std::vector<std::string> validate(std::size_t n_probe = 1000) const;

 private:
  RateFunction a_, g_, d_;
  FragmentationKernel kernel_;
  std::string label_;
};

// Death-absorbing transform of (a, d, b): rate a_n + d_n and daughters
// (betani), whose mass rule has the deficit d_n/(n(a_n+d_n)).
class EffectiveKernel {
 public:
  explicit EffectiveKernel(const CoefficientModel& model);

  double rate(std::size_t n) const;                      // a_n + d_n
  double daughters(std::size_t k, std::size_t n) const;  // b-effective
  // Expected weighted row sum n(1 - lambda_n), lambda_n = d_n/(n(a_n+d_n)).
  double expected_row_mass(std::size_t n) const;

 private:
  const CoefficientModel* model_;
};

struct MassRuleReport {
  std::size_t n_max = 0;
  double tol = 0.0;
  double max_rel_residual = 0.0;
  std::size_t argmax_n = 0;
  std::vector<std::size_t> violations;  // every n whose residual exceeds tol
  bool all_pass() const { return violations.empty(); }
};

// Residuals |sum_k k b_{k,n} - n| / n over n = 2..n_max. Violations are
// data, not failures.
MassRuleReport validate_mass_rule(const FragmentationKernel& kernel, std::size_t n_max, double tol);

// Delta_n^{(m)} = n^m - sum_{k<n} k^m b_{k,n} for n in [n_lo, n_hi].
std::vector<double> delta_sequence(const FragmentationKernel& kernel, double m, std::size_t n_lo,
                                   std::size_t n_hi);
double delta_functional(const FragmentationKernel& kernel, double m, std::size_t n);

}  // namespace gdf
