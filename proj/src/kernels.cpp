#include "gdf/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <omp.h>

namespace gdf::kernels {

namespace {

// Parallelism pays off only past a few blocks of work.
constexpr std::size_t kParallelCutoff = 4 * kSumBlock;

std::size_t block_count(std::size_t len) { return (len + kSumBlock - 1) / kSumBlock; }

double combine(const std::vector<double>& partials) {
  double s = 0.0, c = 0.0;
  for (double p : partials) {
    double y = p - c;
    double t = s + y;
    c = (t - s) - y;
    s = t;
  }
  return s;
}

}  // namespace

double kahan_block(const double* x, std::size_t len) {
  double s = 0.0, c = 0.0;
  for (std::size_t i = 0; i < len; ++i) {
    double y = x[i] - c;
    double t = s + y;
    c = (t - s) - y;
    s = t;
  }
  return s;
}

double blocked_sum_serial(std::span<const double> x) {
  const std::size_t nb = block_count(x.size());
  std::vector<double> partials(nb, 0.0);
  for (std::size_t b = 0; b < nb; ++b) {
    const std::size_t lo = b * kSumBlock;
    partials[b] = kahan_block(x.data() + lo, std::min(kSumBlock, x.size() - lo));
  }
  return combine(partials);
}

double blocked_sum_omp(std::span<const double> x) {
  const std::size_t nb = block_count(x.size());
  std::vector<double> partials(nb, 0.0);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t b = 0; b < static_cast<std::ptrdiff_t>(nb); ++b) {
    const std::size_t lo = static_cast<std::size_t>(b) * kSumBlock;
    partials[b] = kahan_block(x.data() + lo, std::min(kSumBlock, x.size() - lo));
  }
  return combine(partials);
}

double blocked_sum(std::span<const double> x) {
  return x.size() >= kParallelCutoff ? blocked_sum_omp(x) : blocked_sum_serial(x);
}

namespace {

// Shared skeleton for the two weighted reductions: per-block Kahan over
// w[i]*t(f[i]), serial combine.
template <typename Term>
double weighted_blocked(std::span<const double> w, std::span<const double> f, bool parallel,
                        Term term) {
  if (w.size() != f.size()) throw std::invalid_argument("weighted sum: length mismatch");
  const std::size_t nb = block_count(w.size());
  std::vector<double> partials(nb, 0.0);
  auto block = [&](std::size_t b) {
    const std::size_t lo = b * kSumBlock;
    const std::size_t hi = std::min(lo + kSumBlock, w.size());
    double s = 0.0, c = 0.0;
    for (std::size_t i = lo; i < hi; ++i) {
      double y = term(w[i], f[i]) - c;
      double t = s + y;
      c = (t - s) - y;
      s = t;
    }
    partials[b] = s;
  };
  if (parallel) {
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t b = 0; b < static_cast<std::ptrdiff_t>(nb); ++b)
      block(static_cast<std::size_t>(b));
  } else {
    for (std::size_t b = 0; b < nb; ++b) block(b);
  }
  return combine(partials);
}

}  // namespace

double weighted_abs_sum_serial(std::span<const double> w, std::span<const double> f) {
  return weighted_blocked(w, f, false, [](double a, double b) { return a * std::abs(b); });
}
double weighted_abs_sum_omp(std::span<const double> w, std::span<const double> f) {
  return weighted_blocked(w, f, true, [](double a, double b) { return a * std::abs(b); });
}
double weighted_abs_sum(std::span<const double> w, std::span<const double> f) {
  return w.size() >= kParallelCutoff ? weighted_abs_sum_omp(w, f) : weighted_abs_sum_serial(w, f);
}

double weighted_sum_serial(std::span<const double> w, std::span<const double> f) {
  return weighted_blocked(w, f, false, [](double a, double b) { return a * b; });
}
double weighted_sum_omp(std::span<const double> w, std::span<const double> f) {
  return weighted_blocked(w, f, true, [](double a, double b) { return a * b; });
}
double weighted_sum(std::span<const double> w, std::span<const double> f) {
  return w.size() >= kParallelCutoff ? weighted_sum_omp(w, f) : weighted_sum_serial(w, f);
}

double dot(std::span<const double> x, std::span<const double> y) { return weighted_sum(x, y); }

double max_abs(std::span<const double> x) {
  double m = 0.0;
  for (double v : x) m = std::max(m, std::abs(v));
  return m;
}

void range_rows_apply_serial(const RangeRows& R, std::span<const double> x, std::span<double> y) {
  for (std::size_t r = 0; r < R.n; ++r) {
    const std::size_t len = R.row_len(r);
    if (len == 0) continue;
    const double* v = R.row(r);
    const double* xs = x.data() + R.col_lo[r];
    double s = 0.0;
    for (std::size_t j = 0; j < len; ++j) s += v[j] * xs[j];
    y[r] += s;
  }
}

void range_rows_apply_omp(const RangeRows& R, std::span<const double> x, std::span<double> y) {
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t r = 0; r < static_cast<std::ptrdiff_t>(R.n); ++r) {
    const std::size_t len = R.row_len(r);
    if (len == 0) continue;
    const double* v = R.row(r);
    const double* xs = x.data() + R.col_lo[r];
    double s = 0.0;
    for (std::size_t j = 0; j < len; ++j) s += v[j] * xs[j];
    y[r] += s;
  }
}

void range_rows_apply(const RangeRows& R, std::span<const double> x, std::span<double> y) {
  if (R.nnz() >= kParallelCutoff)
    range_rows_apply_omp(R, x, y);
  else
    range_rows_apply_serial(R, x, y);
}

RangeRows range_rows_transpose(const RangeRows& R) {
  RangeRows T;
  T.n = R.n;
  T.col_lo.assign(R.n, R.n);
  std::vector<std::size_t> col_hi(R.n, 0);  // exclusive
  for (std::size_t r = 0; r < R.n; ++r) {
    const std::size_t len = R.row_len(r);
    if (len == 0) continue;
    const std::size_t lo = R.col_lo[r], hi = lo + len;
    for (std::size_t c = lo; c < hi; ++c) {
      T.col_lo[c] = std::min(T.col_lo[c], r);
      col_hi[c] = std::max(col_hi[c], r + 1);
    }
  }
  T.off.assign(R.n + 1, 0);
  for (std::size_t r = 0; r < R.n; ++r) {
    const std::size_t len = col_hi[r] > T.col_lo[r] ? col_hi[r] - T.col_lo[r] : 0;
    if (len == 0) T.col_lo[r] = 0;
    T.off[r + 1] = T.off[r] + len;
  }
  T.val.assign(T.off[R.n], 0.0);
  for (std::size_t r = 0; r < R.n; ++r) {
    const std::size_t len = R.row_len(r);
    const double* v = R.row(r);
    for (std::size_t j = 0; j < len; ++j) {
      const std::size_t c = R.col_lo[r] + j;
      T.val[T.off[c] + (r - T.col_lo[c])] = v[j];
    }
  }
  return T;
}

void HessenbergLU::factor(double alpha, double beta, std::span<const double> diag,
                          std::span<const double> sub, std::span<const double> super,
                          const RangeRows* upper) {
  n_ = diag.size();
  if (n_ == 0) throw std::invalid_argument("HessenbergLU: empty system");
  row_off_.assign(n_ + 1, 0);
  for (std::size_t r = 0; r < n_; ++r) row_off_[r + 1] = row_off_[r] + (n_ - row_begin(r));
  rows_.assign(row_off_[n_], 0.0);
  mult_.assign(n_ > 0 ? n_ - 1 : 0, 0.0);
  pivot_.assign(n_ > 0 ? n_ - 1 : 0, 0);

  for (std::size_t r = 0; r < n_; ++r) {
    double* h = row(r);
    const std::size_t cb = row_begin(r);
    if (r > 0) h[r - 1 - cb] = -beta * sub[r - 1];
    h[r - cb] = alpha - beta * diag[r];
    if (r + 1 < n_ && !super.empty()) h[r + 1 - cb] -= beta * super[r];
    if (upper != nullptr && r < upper->n) {
      const std::size_t len = upper->row_len(r);
      const double* v = upper->row(r);
      for (std::size_t j = 0; j < len; ++j) h[upper->col_lo[r] + j - cb] -= beta * v[j];
    }
  }

  // Eliminate the single subdiagonal entry per column.
  for (std::size_t k = 0; k + 1 < n_; ++k) {
    double* rk = row(k) + (k - row_begin(k));      // row k from column k
    double* rn = row(k + 1) + (k - row_begin(k + 1));
    if (std::abs(rn[0]) > std::abs(rk[0])) {
      pivot_[k] = 1;
      std::swap_ranges(rk, rk + (n_ - k), rn);
    }
    if (rk[0] == 0.0) throw std::runtime_error("HessenbergLU: singular pivot");
    const double m = rn[0] / rk[0];
    mult_[k] = m;
    const std::size_t len = n_ - k;
    for (std::size_t j = 1; j < len; ++j) rn[j] -= m * rk[j];
    rn[0] = 0.0;
  }
  if (row(n_ - 1)[(n_ - 1) - row_begin(n_ - 1)] == 0.0)
    throw std::runtime_error("HessenbergLU: singular pivot");
}

void HessenbergLU::solve_serial(std::span<double> b) const {
  if (b.size() != n_) throw std::invalid_argument("HessenbergLU::solve: size mismatch");
  for (std::size_t k = 0; k + 1 < n_; ++k) {
    if (pivot_[k]) std::swap(b[k], b[k + 1]);
    b[k + 1] -= mult_[k] * b[k];
  }
  for (std::size_t ri = n_; ri-- > 0;) {
    const double* h = row(ri) + (ri - row_begin(ri));
    double s = b[ri];
    for (std::size_t j = 1; j < n_ - ri; ++j) s -= h[j] * b[ri + j];
    b[ri] = s / h[0];
  }
}

void HessenbergLU::solve_omp(std::span<double> b) const {
  if (b.size() != n_) throw std::invalid_argument("HessenbergLU::solve: size mismatch");
  for (std::size_t k = 0; k + 1 < n_; ++k) {
    if (pivot_[k]) std::swap(b[k], b[k + 1]);
    b[k + 1] -= mult_[k] * b[k];
  }
  // Blocked back substitution: solve a diagonal block serially, then
  // subtract its contribution from all remaining rows in parallel.
  constexpr std::size_t kBlock = 128;
  std::size_t hi = n_;
  while (hi > 0) {
    const std::size_t lo = hi > kBlock ? hi - kBlock : 0;
    for (std::size_t ri = hi; ri-- > lo;) {
      const double* h = row(ri) + (ri - row_begin(ri));
      double s = b[ri];
      for (std::size_t j = 1; j < hi - ri; ++j) s -= h[j] * b[ri + j];
      b[ri] = s / h[0];
    }
    if (lo > 0) {
#pragma omp parallel for schedule(static)
      for (std::ptrdiff_t r = 0; r < static_cast<std::ptrdiff_t>(lo); ++r) {
        const double* h = row(r) + (lo - row_begin(r));
        double s = 0.0;
        for (std::size_t j = 0; j < hi - lo; ++j) s += h[j] * b[lo + j];
        b[r] -= s;
      }
    }
    hi = lo;
  }
}

void HessenbergLU::solve(std::span<double> b) const {
  if (n_ >= 1024)
    solve_omp(b);
  else
    solve_serial(b);
}

}  // namespace gdf::kernels
