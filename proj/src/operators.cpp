#include "gdf/operators.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace gdf {

std::string to_string(OperatorKind k) {
  switch (k) {
    case OperatorKind::k_subdiagonal: return "K";
    case OperatorKind::u_full: return "U";
    case OperatorKind::u_adjoint: return "U_adjoint";
    case OperatorKind::v_birth_death: return "V";
    case OperatorKind::f_fragmentation: return "F";
  }
  return "?";
}

std::string to_string(TruncationPolicy p) {
  return p == TruncationPolicy::absorbing ? "absorbing" : "reflecting";
}

namespace {

bool has_growth_band(OperatorKind k) {
  return k == OperatorKind::k_subdiagonal || k == OperatorKind::u_full ||
         k == OperatorKind::u_adjoint || k == OperatorKind::v_birth_death;
}

bool has_death_band(OperatorKind k) {
  return k == OperatorKind::u_full || k == OperatorKind::u_adjoint ||
         k == OperatorKind::v_birth_death;
}

bool has_frag_block(OperatorKind k) {
  return k == OperatorKind::u_full || k == OperatorKind::u_adjoint ||
         k == OperatorKind::f_fragmentation;
}

// B[k][i] = a_i b_{k,i} for daughters k < parent i, as per-row ranges.
kernels::RangeRows build_frag_block(const CoefficientModel& model, std::size_t n) {
  kernels::RangeRows B;
  B.n = n;
  B.col_lo.assign(n, 0);
  B.off.assign(n + 1, 0);
  using RS = FragmentationKernel::RowStructure;
  const RS structure = model.kernel().row_structure();
  if (structure == RS::first_row_only) {
    B.col_lo[0] = 1;
    B.off[1] = n >= 2 ? n - 1 : 0;
    for (std::size_t r = 1; r < n; ++r) B.off[r + 1] = B.off[r];
  } else if (structure == RS::first_row_plus_superdiag) {
    // Row 0 collects b_{1,i}; rows r >= 1 only the (r, r+1) daughter.
    B.col_lo[0] = 1;
    B.off[1] = n >= 2 ? n - 1 : 0;
    for (std::size_t r = 1; r < n; ++r) {
      const bool has = r + 1 < n;
      B.col_lo[r] = has ? r + 1 : 0;
      B.off[r + 1] = B.off[r] + (has ? 1 : 0);
    }
  } else {
    for (std::size_t r = 0; r < n; ++r) {
      const bool has = r + 1 < n;
      B.col_lo[r] = has ? r + 1 : 0;
      B.off[r + 1] = B.off[r] + (has ? n - r - 1 : 0);
    }
  }
  B.val.assign(B.off[n], 0.0);
  // Fill by parent: kernel rows are per parent and memoized there.
#pragma omp parallel for schedule(dynamic, 32)
  for (std::ptrdiff_t ip = 2; ip <= static_cast<std::ptrdiff_t>(n); ++ip) {
    const std::size_t parent = static_cast<std::size_t>(ip);
    const double a = model.frag_rate(parent);
    if (a == 0.0) continue;
    const std::size_t col = parent - 1;  // 0-based column
    std::vector<double> row;
    model.kernel().row(parent, row);
    for (std::size_t k = 1; k < parent; ++k) {
      const double v = a * row[k - 1];
      if (v == 0.0) continue;
      const std::size_t r = k - 1;  // 0-based daughter row
      B.val[B.off[r] + (col - B.col_lo[r])] = v;
    }
  }
  return B;
}

}  // namespace

TruncatedOperator assemble(const CoefficientModel& model, std::size_t n, OperatorKind kind,
                           TruncationPolicy policy) {
  if (n < 2) throw std::invalid_argument("assemble: need N >= 2");
  TruncatedOperator op;
  op.n_ = n;
  op.kind_ = kind;
  op.policy_ = policy;

  std::vector<double> g(n), d(n), a(n);
  for (std::size_t i = 0; i < n; ++i) {
    g[i] = model.growth_rate(i + 1);
    d[i] = model.death_rate(i + 1);
    a[i] = model.frag_rate(i + 1);
  }
  if (policy == TruncationPolicy::reflecting) g[n - 1] = 0.0;

  op.diag_.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double th = a[i] + g[i] + d[i];  // K, U, U^T
    if (kind == OperatorKind::v_birth_death) th = g[i] + d[i];
    if (kind == OperatorKind::f_fragmentation) th = a[i];
    op.diag_[i] = -th;
  }

  std::vector<double> sub, super;
  if (has_growth_band(kind)) {
    sub.assign(n - 1, 0.0);
    for (std::size_t i = 0; i + 1 < n; ++i) sub[i] = g[i];  // (i+1, i) = g_i
  }
  if (has_death_band(kind)) {
    super.assign(n - 1, 0.0);
    for (std::size_t i = 0; i + 1 < n; ++i) super[i] = d[i + 1];  // (i, i+1) = d_{i+2}
  }

  kernels::RangeRows B;
  if (has_frag_block(kind)) B = build_frag_block(model, n);

  if (kind == OperatorKind::u_adjoint) {
    op.sub_ = std::move(super);  // transpose swaps the bands
    op.super_ = std::move(sub);
    op.upper_ = kernels::range_rows_transpose(B);
  } else {
    op.sub_ = std::move(sub);
    op.super_ = std::move(super);
    op.upper_ = std::move(B);
  }
  return op;
}

double TruncatedOperator::entry(std::size_t r, std::size_t c) const {
  if (r >= n_ || c >= n_) throw std::out_of_range("TruncatedOperator::entry");
  double v = 0.0;
  if (r == c) v += diag_[r];
  if (!sub_.empty() && r == c + 1) v += sub_[c];
  if (!super_.empty() && c == r + 1) v += super_[r];
  v += upper_.entry(r, c);
  return v;
}

void TruncatedOperator::apply(std::span<const double> x, std::span<double> y) const {
  if (x.size() != n_ || y.size() != n_)
    throw std::invalid_argument("TruncatedOperator::apply: size mismatch");
  for (std::size_t i = 0; i < n_; ++i) y[i] = diag_[i] * x[i];
  if (!sub_.empty())
    for (std::size_t i = 0; i + 1 < n_; ++i) y[i + 1] += sub_[i] * x[i];
  if (!super_.empty())
    for (std::size_t i = 0; i + 1 < n_; ++i) y[i] += super_[i] * x[i + 1];
  if (upper_.n > 0) kernels::range_rows_apply(upper_, x, y);
}

StateVector TruncatedOperator::apply(const StateVector& x) const {
  StateVector y(n_);
  apply(x.raw(), y.raw());
  return y;
}

TruncatedOperator TruncatedOperator::shifted(double c) const {
  TruncatedOperator op = *this;
  for (double& v : op.diag_) v += c;
  return op;
}

double TruncatedOperator::max_theta() const {
  double m = 0.0;
  for (double v : diag_) m = std::max(m, std::abs(v));
  return m;
}

StateVector resolvent_k_apply(const CoefficientModel& model, double lambda, const StateVector& f,
                              TruncationPolicy policy) {
  const std::size_t n = f.size();
  StateVector u(n);
  double prev = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double th = model.theta(i + 1);
    if (policy == TruncationPolicy::reflecting && i + 1 == n) th -= model.growth_rate(n);
    const double den = lambda + th;
    if (!(den > 0.0))
      throw std::invalid_argument("resolvent: lambda + theta_n <= 0 at n=" + std::to_string(i + 1));
    const double gm1 = i == 0 ? 0.0 : model.growth_rate(i);
    prev = (f[i] + gm1 * prev) / den;
    u[i] = prev;
  }
  return u;
}

ResolventBoundProbe resolvent_bound_probe(const CoefficientModel& model, double m, double m_prime,
                                          double lambda, std::size_t samples, std::size_t n) {
  if (samples < 1) throw std::invalid_argument("resolvent_bound_probe: need samples >= 1");
  if (!(m_prime > m)) throw std::invalid_argument("resolvent_bound_probe: need m' > m");
  ResolventBoundProbe probe;
  probe.lambda = lambda;
  probe.m = m;
  probe.m_prime = m_prime;
  probe.bound = m_prime / (m_prime - m);
  probe.samples = samples;

  // condi2: liminf n(a_n+d_n)/g_n >= m'; sampled over the probe window.
  // Reported, not enforced: the probe is also a diagnostic tool.
  for (std::size_t k = n / 2; k <= n; k += std::max<std::size_t>(1, n / 64)) {
    const double gk = model.growth_rate(k);
    if (gk > 0.0 && static_cast<double>(k) * model.a_eff(k) / gk < m_prime) {
      probe.condi2_holds = false;
      break;
    }
  }

  WeightTable star(m, n, NormFlavor::gamma);
  kernels::DeterministicUniform rng(0x5eedu);
  StateVector f(n);
  for (std::size_t s = 0; s < samples; ++s) {
    for (std::size_t i = 0; i < n; ++i) f[i] = rng.next();
    const StateVector u = resolvent_k_apply(model, lambda, f);
    const double ratio = lambda * norm(u, star) / norm(f, star);
    probe.max_ratio = std::max(probe.max_ratio, ratio);
  }
  return probe;
}

NongenerationProfile nongeneration_probe(const CoefficientModel& model, double m, double lambda,
                                         const std::vector<std::size_t>& truncations) {
  if (truncations.size() < 2)
    throw std::invalid_argument("nongeneration_probe: need at least two truncations");
  NongenerationProfile p;
  p.truncations = truncations;
  p.m = m;
  p.lambda = lambda;

  // Fitted growth exponent q of g over a geometric window; the divergence
  // of ||R delta_1||_[q] is then linear in N (it is only log at m = q - 1).
  {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int cnt = 0;
    for (std::size_t k = 16; k <= 4096; k *= 2) {
      const double gk = model.growth_rate(k);
      if (gk <= 0.0) continue;
      const double x = std::log(static_cast<double>(k)), y = std::log(gk);
      sx += x; sy += y; sxx += x * x; sxy += x * y;
      ++cnt;
    }
    p.m_diag = cnt >= 2 ? (sxy - sx * sy / cnt) / (sxx - sx * sx / cnt) : m;
    p.m_diag = std::max(p.m_diag, m);
  }

  for (std::size_t n : truncations) {
    const StateVector u = resolvent_k_apply(model, lambda, StateVector::delta(1, n));
    p.norm_m.push_back(norm(u, m, NormFlavor::power));
    p.norm_diag.push_back(norm(u, p.m_diag, NormFlavor::power));
  }
  auto increasing = [](const std::vector<double>& v) {
    for (std::size_t i = 0; i + 1 < v.size(); ++i)
      if (!(v[i + 1] > v[i])) return false;
    return true;
  };
  p.strictly_increasing_m = increasing(p.norm_m);
  p.strictly_increasing_diag = increasing(p.norm_diag);
  p.ratio_m = p.norm_m.back() / p.norm_m.front();
  p.ratio_diag = p.norm_diag.back() / p.norm_diag.front();
  return p;
}

}  // namespace gdf
