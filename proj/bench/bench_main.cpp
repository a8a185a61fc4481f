// Timing harness comparing the serial reference kernels against the OpenMP
// versions on operator-shaped data. Not a correctness test (the unit suite
// pins serial == parallel); this reports throughput.
#include <chrono>
#include <cstdio>
#include <vector>

#include <omp.h>

#include "gdf/dynamics.hpp"
#include "gdf/kernels.hpp"
#include "gdf/model.hpp"
#include "gdf/operators.hpp"

using namespace gdf;
using Clock = std::chrono::steady_clock;

namespace {

template <typename F>
double time_ms(F&& fn, int reps) {
  fn();  // warm up
  const auto t0 = Clock::now();
  for (int r = 0; r < reps; ++r) fn();
  const auto t1 = Clock::now();
  return std::chrono::duration<double, std::milli>(t1 - t0).count() / reps;
}

void bench_reductions() {
  std::printf("-- blocked reductions (sum of w |f|) --\n");
  kernels::DeterministicUniform rng(1);
  for (std::size_t n : {std::size_t{10000}, std::size_t{1000000}}) {
    std::vector<double> w(n), f(n);
    for (std::size_t i = 0; i < n; ++i) {
      w[i] = rng.next();
      f[i] = rng.next() - 0.5;
    }
    const double ts = time_ms([&] { kernels::weighted_abs_sum_serial(w, f); }, 50);
    const double tp = time_ms([&] { kernels::weighted_abs_sum_omp(w, f); }, 50);
    std::printf("  n=%8zu  serial %8.3f ms   omp %8.3f ms   speedup %.2fx\n", n, ts, tp, ts / tp);
  }
}

void bench_matvec() {
  std::printf("-- fragmentation-block matvec (dense kernel) --\n");
  CoefficientModel model(RateFunction::linear(2.0), RateFunction::linear(1.0),
                         RateFunction::zero(), FragmentationKernel::uniform_binary(), "bench");
  for (std::size_t n : {std::size_t{1000}, std::size_t{2000}, std::size_t{4000}}) {
    const TruncatedOperator U = assemble(model, n, OperatorKind::u_full);
    std::vector<double> x(n, 1.0), y(n);
    const auto* B = U.upper_block();
    const double ts = time_ms(
        [&] {
          std::fill(y.begin(), y.end(), 0.0);
          kernels::range_rows_apply_serial(*B, x, y);
        },
        20);
    const double tp = time_ms(
        [&] {
          std::fill(y.begin(), y.end(), 0.0);
          kernels::range_rows_apply_omp(*B, x, y);
        },
        20);
    std::printf("  N=%6zu  serial %8.3f ms   omp %8.3f ms   speedup %.2fx\n", n, ts, tp, ts / tp);
  }
}

void bench_solve() {
  std::printf("-- Hessenberg factor+solve of I - dt U --\n");
  CoefficientModel model(RateFunction::linear(2.0), RateFunction::linear(1.0),
                         RateFunction::zero(), FragmentationKernel::uniform_binary(), "bench");
  for (std::size_t n : {std::size_t{1000}, std::size_t{2000}, std::size_t{4000}}) {
    const TruncatedOperator U = assemble(model, n, OperatorKind::u_full);
    kernels::HessenbergLU lu;
    lu.factor(1.0, 1e-2, U.diagonal(), U.subdiagonal(), U.superdiagonal(), U.upper_block());
    std::vector<double> b(n, 1.0), work(n);
    const double tf = time_ms(
        [&] { lu.factor(1.0, 1e-2, U.diagonal(), U.subdiagonal(), U.superdiagonal(), U.upper_block()); },
        5);
    const double ts = time_ms(
        [&] {
          work = b;
          lu.solve_serial(work);
        },
        20);
    const double tp = time_ms(
        [&] {
          work = b;
          lu.solve_omp(work);
        },
        20);
    std::printf("  N=%6zu  factor %8.3f ms   solve serial %8.3f ms   omp %8.3f ms (%.2fx)\n", n,
                tf, ts, tp, ts / tp);
  }
}

void bench_integrate() {
  std::printf("-- one TR-BDF2 output interval, Fig.1-style model --\n");
  CoefficientModel model(RateFunction::linear(2.0), RateFunction::linear(1.0),
                         RateFunction::zero(), FragmentationKernel::monomer_shatter(), "bench");
  for (std::size_t n : {std::size_t{1000}, std::size_t{2000}}) {
    dynamics::SolverOptions opts;
    opts.rtol = 1e-8;
    opts.atol = 1e-12;
    opts.dt_output = 0.5;
    StateVector f0 = StateVector::delta(10, n, 10.0);
    const double t = time_ms([&] { dynamics::integrate(model, f0, 0.0, 0.5, opts); }, 3);
    std::printf("  N=%6zu  %8.1f ms\n", n, t);
  }
}

}  // namespace

int main() {
  std::printf("gdf_bench: %d OpenMP threads\n", omp_get_max_threads());
  bench_reductions();
  bench_matvec();
  bench_solve();
  bench_integrate();
  return 0;
}
