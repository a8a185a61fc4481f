#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace gdf {

// Finite truncation of a sequence f = (f_1, f_2, ...). Entry i of the
// backing vector is f_{i+1}; all public size arguments are cluster sizes
// (1-based). Values are signed: eigenvector arithmetic needs that, so
// nonnegativity is a property to check, not an invariant.
class StateVector {
 public:
  StateVector() = default;
  explicit StateVector(std::size_t n, double fill = 0.0);
  explicit StateVector(std::vector<double> entries);

  // weight * indicator of cluster size `site`.
  static StateVector delta(std::size_t site, std::size_t n, double weight = 1.0);
  static StateVector ones(std::size_t n);

  std::size_t size() const { return v_.size(); }
  double operator[](std::size_t i) const { return v_[i]; }
  double& operator[](std::size_t i) { return v_[i]; }
  std::span<const double> raw() const { return v_; }
  std::span<double> raw() { return v_; }

  bool all_finite() const;
  bool nonnegative(double tol = 0.0) const;

 private:
  std::vector<double> v_;
};

enum class NormFlavor { power, gamma };

// Weights w_n for n = 1..N of one of the two flavors: n^m, or the
// Gamma-ratio weights Gamma(n+m)/Gamma(n) of the star norm. The latter are
// built by the multiplicative recurrence w_{n+1} = w_n (n+m)/n, since
// Gamma(n) itself overflows long before n ~ 1e4 while the ratio stays
// polynomial (Stirling).
class WeightTable {
 public:
  WeightTable(double m, std::size_t n, NormFlavor flavor);

  double m() const { return m_; }
  NormFlavor flavor() const { return flavor_; }
  std::span<const double> values() const { return w_; }
  double operator[](std::size_t i) const { return w_[i]; }
  std::size_t size() const { return w_.size(); }

 private:
  double m_;
  NormFlavor flavor_;
  std::vector<double> w_;
};

// sum_n w_n |f_n| with the selected weights; power flavor with m = 1 is the
// total mass of |f|.
double norm(const StateVector& f, double m, NormFlavor flavor = NormFlavor::power);
double norm(const StateVector& f, const WeightTable& w);

// Signed physical moment sum_n n^p f_n (no absolute values); p = 1 is M(t).
double moment(const StateVector& f, double p);

// Duality pairing <h, f> = sum_n h_n f_n.
double pairing(const StateVector& h, const StateVector& f);

// P_N f = (f_1, ..., f_N, 0, ...), represented at truncation min(N, size).
StateVector project(const StateVector& f, std::size_t n);

}  // namespace gdf
