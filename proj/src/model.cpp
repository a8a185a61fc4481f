#include "gdf/model.hpp"

#include <cmath>
#include <mutex>
#include <stdexcept>

#include "gdf/kernels.hpp"

namespace gdf {

RateFunction RateFunction::zero() { return RateFunction(); }

RateFunction RateFunction::constant(double c) {
  RateFunction r;
  r.family_ = Family::constant;
  r.coeff_ = c;
  return r;
}

RateFunction RateFunction::linear(double c) {
  RateFunction r;
  r.family_ = Family::linear;
  r.coeff_ = c;
  return r;
}

RateFunction RateFunction::power(double c, double p) {
  RateFunction r;
  r.family_ = Family::power;
  r.coeff_ = c;
  r.exponent_ = p;
  return r;
}

RateFunction RateFunction::table(std::vector<double> vals) {
  if (vals.empty()) throw std::invalid_argument("RateFunction::table: empty table");
  RateFunction r;
  r.family_ = Family::table;
  r.table_ = std::move(vals);
  return r;
}

double RateFunction::operator()(std::size_t n) const {
  switch (family_) {
    case Family::zero:
      return 0.0;
    case Family::constant:
      return coeff_;
    case Family::linear:
      return coeff_ * static_cast<double>(n);
    case Family::power:
      return coeff_ * std::pow(static_cast<double>(n), exponent_);
    case Family::table:
      return n - 1 < table_.size() ? table_[n - 1] : table_.back();
  }
  return 0.0;
}

std::string RateFunction::describe() const {
  switch (family_) {
    case Family::zero:
      return "0";
    case Family::constant:
      return std::to_string(coeff_);
    case Family::linear:
      return std::to_string(coeff_) + "*n";
    case Family::power:
      return std::to_string(coeff_) + "*n^" + std::to_string(exponent_);
    case Family::table:
      return "table[" + std::to_string(table_.size()) + "]";
  }
  return "?";
}

FragmentationKernel FragmentationKernel::monomer_shatter() {
  return FragmentationKernel(Variant::monomer_shatter, "monomer_shatter");
}

FragmentationKernel FragmentationKernel::uniform_binary() {
  return FragmentationKernel(Variant::uniform_binary, "uniform_binary");
}

FragmentationKernel FragmentationKernel::homogeneous_profile(std::function<double(double)> h,
                                                             std::string label) {
  FragmentationKernel k(Variant::homogeneous_profile, std::move(label));
  k.profile_ = std::move(h);
  return k;
}

FragmentationKernel FragmentationKernel::homogeneous_beta(double beta) {
  if (beta < 0.0) throw std::invalid_argument("homogeneous_beta: beta must be >= 0");
  return homogeneous_profile(
      [beta](double z) { return std::pow(z, beta) * std::pow(1.0 - z, beta); },
      "homogeneous_beta_" + std::to_string(beta));
}

FragmentationKernel FragmentationKernel::binary_psi(
    std::function<double(std::size_t, std::size_t)> psi, std::string label) {
  FragmentationKernel k(Variant::binary_psi, std::move(label));
  k.psi_ = std::move(psi);
  return k;
}

FragmentationKernel FragmentationKernel::binary_psi_sum(double beta) {
  return binary_psi(
      [beta](std::size_t i, std::size_t j) { return std::pow(static_cast<double>(i + j), beta); },
      "binary_psi_sum_" + std::to_string(beta));
}

FragmentationKernel FragmentationKernel::binary_psi_product(double beta) {
  return binary_psi(
      [beta](std::size_t i, std::size_t j) {
        return std::pow(static_cast<double>(i) * static_cast<double>(j), beta);
      },
      "binary_psi_product_" + std::to_string(beta));
}

FragmentationKernel FragmentationKernel::ends_only() {
  return FragmentationKernel(Variant::ends_only, "ends_only");
}

FragmentationKernel FragmentationKernel::from_table(std::vector<std::vector<double>> rows) {
  FragmentationKernel k(Variant::table, "table");
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const std::size_t n = r + 2;
    if (rows[r].size() != n - 1)
      throw std::invalid_argument("from_table: row for parent n must have n-1 entries");
    for (double b : rows[r])
      if (!(b >= 0.0)) throw std::invalid_argument("from_table: daughters must be nonnegative");
  }
  k.table_ = std::move(rows);
  return k;
}

std::size_t FragmentationKernel::max_table_parent() const {
  return variant_ == Variant::table ? table_.size() + 1 : 0;
}

FragmentationKernel::RowStructure FragmentationKernel::row_structure() const {
  if (variant_ == Variant::monomer_shatter) return RowStructure::first_row_only;
  if (variant_ == Variant::ends_only) return RowStructure::first_row_plus_superdiag;
  return RowStructure::dense;
}

double FragmentationKernel::normalizer(std::size_t n) const {
  {
    std::shared_lock lock(cache_->mu);
    auto it = cache_->per_n.find(n);
    if (it != cache_->per_n.end()) return it->second;
  }
  double value = 0.0;
  if (variant_ == Variant::homogeneous_profile) {
    // zeta(n) = n / sum_j j h(j/n): the mass rule holds exactly per n.
    double s = 0.0, c = 0.0;
    for (std::size_t j = 1; j < n; ++j) {
      const double y = static_cast<double>(j) * profile_(static_cast<double>(j) / n) - c;
      const double t = s + y;
      c = (t - s) - y;
      s = t;
    }
    if (!(s > 0.0))
      throw std::invalid_argument("homogeneous profile: degenerate normalization at n=" +
                                  std::to_string(n));
    value = static_cast<double>(n) / s;
  } else if (variant_ == Variant::binary_psi) {
    double s = 0.0, c = 0.0;
    for (std::size_t i = 1; i < n; ++i) {
      const double y = psi_(i, n - i) - c;
      const double t = s + y;
      c = (t - s) - y;
      s = t;
    }
    value = 0.5 * s;  // induced a_n
    if (!(value > 0.0))
      throw std::invalid_argument("binary_psi: psi row sums to zero at n=" + std::to_string(n));
  }
  std::unique_lock lock(cache_->mu);
  cache_->per_n.emplace(n, value);
  return value;
}

double FragmentationKernel::operator()(std::size_t k, std::size_t n) const {
  if (n < 2 || k < 1 || k > n - 1)
    throw std::out_of_range("kernel evaluation: need n >= 2 and 1 <= k <= n-1");
  switch (variant_) {
    case Variant::monomer_shatter:
      return k == 1 ? static_cast<double>(n) : 0.0;
    case Variant::uniform_binary:
      return 2.0 / static_cast<double>(n - 1);
    case Variant::homogeneous_profile:
      return normalizer(n) * profile_(static_cast<double>(k) / n);
    case Variant::binary_psi:
      return psi_(k, n - k) / normalizer(n);
    case Variant::ends_only:
      if (n == 2) return k == 1 ? 2.0 : 0.0;
      return (k == 1 || k == n - 1) ? 1.0 : 0.0;
    case Variant::table:
      if (n > max_table_parent())
        throw std::out_of_range("table kernel: parent beyond table");
      return table_[n - 2][k - 1];
  }
  return 0.0;
}

void FragmentationKernel::row(std::size_t n, std::vector<double>& out) const {
  if (n < 2) throw std::out_of_range("kernel row: need n >= 2");
  out.assign(n - 1, 0.0);
  switch (variant_) {
    case Variant::monomer_shatter:
      out[0] = static_cast<double>(n);
      break;
    case Variant::uniform_binary: {
      const double b = 2.0 / static_cast<double>(n - 1);
      for (double& x : out) x = b;
      break;
    }
    case Variant::homogeneous_profile: {
      const double z = normalizer(n);
      for (std::size_t k = 1; k < n; ++k) out[k - 1] = z * profile_(static_cast<double>(k) / n);
      break;
    }
    case Variant::binary_psi: {
      const double an = normalizer(n);
      for (std::size_t k = 1; k < n; ++k) out[k - 1] = psi_(k, n - k) / an;
      break;
    }
    case Variant::ends_only:
      if (n == 2) {
        out[0] = 2.0;
      } else {
        out[0] = 1.0;
        out[n - 2] = 1.0;
      }
      break;
    case Variant::table:
      if (n > max_table_parent()) throw std::out_of_range("table kernel: parent beyond table");
      out = table_[n - 2];
      break;
  }
}

std::optional<double> FragmentationKernel::induced_rate(std::size_t n) const {
  if (variant_ != Variant::binary_psi) return std::nullopt;
  if (n < 2) return 0.0;
  return normalizer(n);
}

CoefficientModel::CoefficientModel(RateFunction a, RateFunction g, RateFunction d,
                                   FragmentationKernel kernel, std::string label)
    : a_(std::move(a)), g_(std::move(g)), d_(std::move(d)), kernel_(std::move(kernel)),
      label_(std::move(label)) {}

double CoefficientModel::frag_rate(std::size_t n) const { return n <= 1 ? 0.0 : a_(n); }
double CoefficientModel::growth_rate(std::size_t n) const { return g_(n); }
double CoefficientModel::death_rate(std::size_t n) const { return d_(n); }

std::vector<std::string> CoefficientModel::validate(std::size_t n_probe) const {
  std::vector<std::string> warnings;
  for (std::size_t n = 1; n <= n_probe; ++n) {
    const double a = frag_rate(n), g = growth_rate(n), d = death_rate(n);
    if (!std::isfinite(a) || !std::isfinite(g) || !std::isfinite(d))
      throw std::invalid_argument("model: non-finite rate at n=" + std::to_string(n));
    if (a < 0.0 || g < 0.0 || d < 0.0)
      throw std::invalid_argument("model: negative rate at n=" + std::to_string(n));
  }
  if (death_rate(1) != 0.0)
    warnings.push_back("d_1 = " + std::to_string(death_rate(1)) +
                       " != 0 departs from the paper's convention (kept; needed for g = d "
                       "conservative models)");
  const std::size_t table_cap = kernel_.max_table_parent();
  if (table_cap > 0 && table_cap < n_probe)
    warnings.push_back("table kernel covers parents up to n=" + std::to_string(table_cap));
  return warnings;
}

EffectiveKernel::EffectiveKernel(const CoefficientModel& model) : model_(&model) {
  for (std::size_t n = 2; n <= 16; ++n)
    if (model.a_eff(n) <= 0.0)
      throw std::invalid_argument("effective kernel: a_n + d_n = 0 at n=" + std::to_string(n));
}

double EffectiveKernel::rate(std::size_t n) const { return model_->a_eff(n); }

double EffectiveKernel::daughters(std::size_t k, std::size_t n) const {
  if (n < 2 || k < 1 || k > n - 1)
    throw std::out_of_range("effective daughters: need n >= 2 and 1 <= k <= n-1");
  const double a = model_->frag_rate(n);
  const double d = model_->death_rate(n);
  if (a + d <= 0.0)
    throw std::invalid_argument("effective kernel: a_n + d_n = 0 at n=" + std::to_string(n));
  const double b = model_->kernel()(k, n);
  if (k == n - 1) return (a * b + d) / (a + d);
  return a * b / (a + d);
}

double EffectiveKernel::expected_row_mass(std::size_t n) const {
  const double d = model_->death_rate(n);
  const double ad = model_->a_eff(n);
  return static_cast<double>(n) * (1.0 - d / (static_cast<double>(n) * ad));
}

MassRuleReport validate_mass_rule(const FragmentationKernel& kernel, std::size_t n_max,
                                  double tol) {
  if (n_max < 2) throw std::invalid_argument("validate_mass_rule: n_max must be >= 2");
  MassRuleReport report;
  report.n_max = n_max;
  report.tol = tol;
  std::vector<double> row;
  for (std::size_t n = 2; n <= n_max; ++n) {
    kernel.row(n, row);
    double s = 0.0, c = 0.0;
    for (std::size_t k = 1; k < n; ++k) {
      const double y = static_cast<double>(k) * row[k - 1] - c;
      const double t = s + y;
      c = (t - s) - y;
      s = t;
    }
    const double rel = std::abs(s - static_cast<double>(n)) / static_cast<double>(n);
    if (rel > report.max_rel_residual) {
      report.max_rel_residual = rel;
      report.argmax_n = n;
    }
    if (rel > tol) report.violations.push_back(n);
  }
  return report;
}

double delta_functional(const FragmentationKernel& kernel, double m, std::size_t n) {
  if (m < 0.0) throw std::invalid_argument("delta_functional: m must be >= 0");
  if (n < 2) throw std::invalid_argument("delta_functional: n must be >= 2");
  std::vector<double> row;
  kernel.row(n, row);
  double s = 0.0, c = 0.0;
  for (std::size_t k = 1; k < n; ++k) {
    const double y = std::pow(static_cast<double>(k), m) * row[k - 1] - c;
    const double t = s + y;
    c = (t - s) - y;
    s = t;
  }
  return std::pow(static_cast<double>(n), m) - s;
}

std::vector<double> delta_sequence(const FragmentationKernel& kernel, double m, std::size_t n_lo,
                                   std::size_t n_hi) {
  if (n_lo < 2 || n_hi < n_lo) throw std::invalid_argument("delta_sequence: bad range");
  std::vector<double> out(n_hi - n_lo + 1);
#pragma omp parallel for schedule(dynamic, 16)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(out.size()); ++i)
    out[i] = delta_functional(kernel, m, n_lo + static_cast<std::size_t>(i));
  return out;
}

}  // namespace gdf
