#include "gdf/spaces.hpp"

#include <cmath>
#include <stdexcept>

#include "gdf/kernels.hpp"

namespace gdf {

StateVector::StateVector(std::size_t n, double fill) : v_(n, fill) {
  if (n == 0) throw std::invalid_argument("StateVector: truncation size must be >= 1");
}

StateVector::StateVector(std::vector<double> entries) : v_(std::move(entries)) {
  if (v_.empty()) throw std::invalid_argument("StateVector: truncation size must be >= 1");
}

StateVector StateVector::delta(std::size_t site, std::size_t n, double weight) {
  if (site < 1 || site > n) throw std::invalid_argument("StateVector::delta: site out of range");
  StateVector f(n);
  f[site - 1] = weight;
  return f;
}

StateVector StateVector::ones(std::size_t n) { return StateVector(n, 1.0); }

bool StateVector::all_finite() const {
  for (double x : v_)
    if (!std::isfinite(x)) return false;
  return true;
}

bool StateVector::nonnegative(double tol) const {
  for (double x : v_)
    if (x < -tol) return false;
  return true;
}

WeightTable::WeightTable(double m, std::size_t n, NormFlavor flavor)
    : m_(m), flavor_(flavor), w_(n) {
  if (m < 0.0) throw std::invalid_argument("WeightTable: moment order must be >= 0");
  if (flavor == NormFlavor::power) {
    for (std::size_t i = 0; i < n; ++i) w_[i] = std::pow(static_cast<double>(i + 1), m);
  } else {
    double w = std::tgamma(1.0 + m);
    for (std::size_t i = 0; i < n; ++i) {
      w_[i] = w;
      const double nn = static_cast<double>(i + 1);
      w = w * (nn + m) / nn;
    }
  }
}

double norm(const StateVector& f, double m, NormFlavor flavor) {
  WeightTable w(m, f.size(), flavor);
  return norm(f, w);
}

double norm(const StateVector& f, const WeightTable& w) {
  if (w.size() != f.size()) throw std::invalid_argument("norm: weight table size mismatch");
  return kernels::weighted_abs_sum(w.values(), f.raw());
}

double moment(const StateVector& f, double p) {
  if (p < 0.0) throw std::invalid_argument("moment: order must be >= 0");
  WeightTable w(p, f.size(), NormFlavor::power);
  return kernels::weighted_sum(w.values(), f.raw());
}

double pairing(const StateVector& h, const StateVector& f) {
  if (h.size() != f.size()) throw std::invalid_argument("pairing: size mismatch");
  return kernels::weighted_sum(h.raw(), f.raw());
}

StateVector project(const StateVector& f, std::size_t n) {
  if (n < 1) throw std::invalid_argument("project: truncation must be >= 1");
  if (n >= f.size()) return f;
  std::vector<double> head(f.raw().begin(), f.raw().begin() + static_cast<std::ptrdiff_t>(n));
  return StateVector(std::move(head));
}

}  // namespace gdf
