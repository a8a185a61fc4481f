#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

// Low-level numerical kernels. Every kernel comes in a serial reference
// version and an OpenMP version that produces bitwise-identical results:
// reductions are blocked with a fixed block size and the per-block partial
// sums are combined serially in ascending order, so the arithmetic order
// does not depend on the thread count. gdf_bench compares the two.
namespace gdf::kernels {

inline constexpr std::size_t kSumBlock = 2048;

// Compensated (Kahan) sum of one block, ascending order.
double kahan_block(const double* x, std::size_t len);

// Deterministic blocked sum: Kahan within blocks, serial combine across.
double blocked_sum_serial(std::span<const double> x);
double blocked_sum_omp(std::span<const double> x);
double blocked_sum(std::span<const double> x);  // dispatches on size

// sum_i w[i] * |f[i]|  and the signed variant sum_i w[i] * f[i].
double weighted_abs_sum_serial(std::span<const double> w, std::span<const double> f);
double weighted_abs_sum_omp(std::span<const double> w, std::span<const double> f);
double weighted_abs_sum(std::span<const double> w, std::span<const double> f);

double weighted_sum_serial(std::span<const double> w, std::span<const double> f);
double weighted_sum_omp(std::span<const double> w, std::span<const double> f);
double weighted_sum(std::span<const double> w, std::span<const double> f);

double dot(std::span<const double> x, std::span<const double> y);

double max_abs(std::span<const double> x);

// Strictly upper triangular block stored as dense per-row ranges.
// Row r (0-based) holds columns [col_lo[r], col_lo[r] + len(r)) with
// len(r) = off[r+1] - off[r]; values row-major in val.
struct RangeRows {
  std::size_t n = 0;
  std::vector<std::size_t> col_lo;  // size n
  std::vector<std::size_t> off;     // size n+1
  std::vector<double> val;

  std::size_t row_len(std::size_t r) const { return off[r + 1] - off[r]; }
  const double* row(std::size_t r) const { return val.data() + off[r]; }
  double* row(std::size_t r) { return val.data() + off[r]; }
  double entry(std::size_t r, std::size_t c) const {
    if (r >= n || c < col_lo[r] || c - col_lo[r] >= row_len(r)) return 0.0;
    return val[off[r] + (c - col_lo[r])];
  }
  std::size_t nnz() const { return val.size(); }
};

// y += R x, rows independent, ascending-column dot per row.
void range_rows_apply_serial(const RangeRows& R, std::span<const double> x, std::span<double> y);
void range_rows_apply_omp(const RangeRows& R, std::span<const double> x, std::span<double> y);
void range_rows_apply(const RangeRows& R, std::span<const double> x, std::span<double> y);

// Builds the transpose of R (again as per-row ranges).
RangeRows range_rows_transpose(const RangeRows& R);

// LU factorization of an upper Hessenberg matrix with row pivoting
// restricted to the (k, k+1) pair. Storage is packed: row r keeps columns
// [max(r,1)-1, n). Used for the implicit time-stepping solves.
class HessenbergLU {
 public:
  // H = alpha*I - beta*Op given through its pieces: diag, sub (length n-1,
  // entry (r+1, r)), super (length n-1, entry (r, r+1)), upper block.
  void factor(double alpha, double beta, std::span<const double> diag,
              std::span<const double> sub, std::span<const double> super,
              const RangeRows* upper);

  // Solves H x = b in place.
  void solve_serial(std::span<double> b) const;
  void solve_omp(std::span<double> b) const;
  void solve(std::span<double> b) const;

  std::size_t size() const { return n_; }

 private:
  std::size_t n_ = 0;
  std::vector<double> rows_;        // packed, row r at row_off_[r]
  std::vector<std::size_t> row_off_;
  std::vector<double> mult_;        // multiplier per column
  std::vector<unsigned char> pivot_;

  double* row(std::size_t r) { return rows_.data() + row_off_[r]; }
  const double* row(std::size_t r) const { return rows_.data() + row_off_[r]; }
  std::size_t row_begin(std::size_t r) const { return r == 0 ? 0 : r - 1; }
};

// Deterministic uniforms in [0,1) from a fixed-seed mt19937_64 stream.
// The engine is fully specified by the standard; only the library
// distributions are implementation-defined, so the mapping to double is
// done by hand here.
class DeterministicUniform {
 public:
  explicit DeterministicUniform(std::uint64_t seed) : eng_(seed) {}
  double next() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

 private:
  std::mt19937_64 eng_;
};

}  // namespace gdf::kernels
