#include "gdf/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <Eigen/Dense>

#include "gdf/kernels.hpp"

namespace gdf::spectral {

PowerIterationResult power_iteration(const TruncatedOperator& op, double sigma,
                                     const PerronOptions& opts) {
  const std::size_t n = op.size();
  PowerIterationResult res;
  res.v = StateVector::ones(n);
  std::vector<double> w(n);
  std::vector<double> ray;

  double mu = 0.0;
  double best = std::numeric_limits<double>::infinity();
  std::size_t best_it = 0;
  for (std::size_t it = 1; it <= opts.max_iterations; ++it) {
    op.apply(res.v.raw(), w);
    for (std::size_t i = 0; i < n; ++i) w[i] += sigma * res.v[i];

    const double num = kernels::dot(res.v.raw(), w);
    const double den = kernels::dot(res.v.raw(), res.v.raw());
    mu = num / den;

    double resid = 0.0, wmax = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      resid = std::max(resid, std::abs(w[i] - mu * res.v[i]));
      wmax = std::max(wmax, std::abs(w[i]));
    }
    const double scale = wmax > 0.0 ? wmax : 1.0;
    for (std::size_t i = 0; i < n; ++i) res.v[i] = w[i] / scale;

    res.iterations = it;
    res.residual = resid / scale;
    ray.push_back(mu);
    if (res.residual <= opts.tol) {
      res.converged = true;
      break;
    }
    if (res.residual < 0.5 * best) {
      best = res.residual;
      best_it = it;
    }
    // rounding floor: residual no longer improves but is already tiny
    if (it - best_it > 5000 && res.residual <= 1e3 * opts.tol) {
      res.converged = true;
      break;
    }
  }
  res.eigenvalue = mu;
  const std::size_t tail = std::min<std::size_t>(ray.size(), 32);
  res.rayleigh_tail.assign(ray.end() - static_cast<std::ptrdiff_t>(tail), ray.end());
  return res;
}

SpectralTriple perron_eigenpair(const CoefficientModel& model, std::size_t n,
                                const PerronOptions& opts) {
  if (n < 16) throw std::invalid_argument("perron_eigenpair: need N >= 16");
  const TruncatedOperator U = assemble(model, n, OperatorKind::u_full);
  // The transposed problem carries a geometric boundary layer: closing the
  // system at N perturbs the adjoint eigenvector by O((g/theta)^{N-n}) at
  // component n. Running the left iteration on a padded truncation keeps
  // that layer outside the returned window; rows 1..N-1 of the adjoint
  // identity are untouched because column i of U is the same matrix column
  // for every truncation > i.
  const std::size_t pad = 64;
  const TruncatedOperator Ut = assemble(model, n + pad, OperatorKind::u_adjoint);
  const double sigma = U.max_theta() + 1.0;
  const double sigma_left = Ut.max_theta() + 1.0;

  PowerIterationResult right = power_iteration(U, sigma, opts);
  if (!right.converged) {
    std::string tail;
    for (double r : right.rayleigh_tail) tail += " " + std::to_string(r - sigma);
    throw SpectralError("perron_eigenpair: right iteration did not converge; Rayleigh tail:" +
                        tail);
  }
  PowerIterationResult left = power_iteration(Ut, sigma_left, opts);
  if (!left.converged) {
    std::string tail;
    for (double r : left.rayleigh_tail) tail += " " + std::to_string(r - sigma_left);
    throw SpectralError("perron_eigenpair: left iteration did not converge; Rayleigh tail:" +
                        tail);
  }

  SpectralTriple triple;
  triple.truncation = n;
  triple.lambda0 = right.eigenvalue - sigma;
  triple.iterations_right = right.iterations;
  triple.iterations_left = left.iterations;

  // e: unit mass
  StateVector e = right.v;
  const double mass = moment(e, 1.0);
  if (!(std::abs(mass) > 0.0)) throw SpectralError("perron_eigenpair: degenerate eigenvector");
  for (std::size_t i = 0; i < n; ++i) e[i] /= mass;
  triple.e = e;

  // h: restricted to the window, then <h, e> = 1
  StateVector h(n);
  for (std::size_t i = 0; i < n; ++i) h[i] = left.v[i];
  const double he = pairing(h, e);
  if (!(std::abs(he) > 0.0)) throw SpectralError("perron_eigenpair: degenerate adjoint pairing");
  for (std::size_t i = 0; i < n; ++i) h[i] /= he;
  triple.h = h;

  // residuals in the requested [m]-norm
  {
    WeightTable wt(opts.m_norm, n, NormFlavor::power);
    StateVector r = U.apply(e);
    for (std::size_t i = 0; i < n; ++i) r[i] -= triple.lambda0 * e[i];
    triple.residual_right = norm(r, wt) / norm(e, wt);

    const TruncatedOperator Ut_n = assemble(model, n, OperatorKind::u_adjoint);
    StateVector rl = Ut_n.apply(h);
    for (std::size_t i = 0; i < n; ++i) rl[i] -= triple.lambda0 * h[i];
    rl[n - 1] = 0.0;  // row N is truncation-corrupted
    triple.residual_left = norm(rl, wt) / norm(h, wt);
  }
  return triple;
}

Example1Result example1_solve(const CoefficientModel& model, std::size_t n, double lambda_hi) {
  // preconditions: d = 0, monomer shatter, (angnle) with gamma <= g, (ggamcond)
  if (model.kernel().variant() != FragmentationKernel::Variant::monomer_shatter)
    throw std::invalid_argument("example1_solve: kernel must be monomer shatter");
  for (std::size_t k = 1; k <= 1000; ++k)
    if (model.death_rate(k) != 0.0)
      throw std::invalid_argument("example1_solve: needs d = 0");

  Example1Result res;
  {
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    for (std::size_t k = 2; k <= 1000; ++k) {
      const double a = model.frag_rate(k);
      if (a <= 0.0) throw std::invalid_argument("example1_solve: needs a_n > 0 for n >= 2");
      const double r = model.growth_rate(k) / a;
      lo = std::min(lo, r);
      hi = std::max(hi, r);
    }
    res.gamma_bound = lo;
    res.g_bound = hi;
    const double mid = (lo + 1.0) * (lo + 1.0);
    if (!(hi + 1.0 < mid))
      throw std::invalid_argument(
          "example1_solve: (ggamcond) violated; phi(0) <= 1 is possible, refusing to guess");
  }

  const double g1 = model.growth_rate(1);
  // phi(lambda) with the geometric tail bound: the running product P_n is
  // multiplied by g_j/(lambda+theta_j) <= c < 1, so the tail after M terms
  // is below P_{M+1} ((M+1)/(1-c) + c/(1-c)^2).
  const double c_ratio = res.g_bound / (1.0 + res.g_bound);
  auto phi = [&](double lambda) {
    double s = 0.0, P = 1.0;
    std::size_t m = 2;
    for (;; ++m) {
      const double a = model.frag_rate(m);
      const double g = model.growth_rate(m);
      const double term = a * static_cast<double>(m) / (lambda + a + g) * P;
      s += term;
      P *= g / (lambda + g + a);
      const double tail =
          P * ((static_cast<double>(m) + 1.0) / (1.0 - c_ratio) + c_ratio / ((1.0 - c_ratio) * (1.0 - c_ratio)));
      if (tail < 1e-14 * std::max(s, 1e-300) || m > 100000) break;
    }
    return s;
  };
  auto psi = [&](double lambda) { return (lambda + g1) / g1; };
  auto fdiff = [&](double lambda) { return psi(lambda) - phi(lambda); };

  double hi = lambda_hi;
  if (hi <= 0.0) {
    double peak = 0.0;
    for (std::size_t k = 2; k <= 100; ++k) {
      const double a = model.frag_rate(k), g = model.growth_rate(k);
      peak = std::max(peak, a * static_cast<double>(k) / (a + g));
    }
    hi = 10.0 * (g1 + peak);
  }
  double lo = 0.0;
  if (!(fdiff(lo) < 0.0))
    throw std::invalid_argument("example1_solve: psi(0) >= phi(0); no positive root to bracket");
  std::size_t doublings = 0;
  while (fdiff(hi) <= 0.0) {
    hi *= 2.0;
    if (++doublings > 60)
      throw std::invalid_argument("example1_solve: bracket does not straddle a sign change");
  }

  std::size_t steps = 0;
  while (hi - lo > 1e-13 * std::max(1.0, hi) && steps < 200) {
    const double mid = 0.5 * (lo + hi);
    (fdiff(mid) <= 0.0 ? lo : hi) = mid;
    ++steps;
  }
  res.bisection_steps = steps;
  res.lambda0 = 0.5 * (lo + hi);
  res.phi_at_root = phi(res.lambda0);

  // closed-form eigenvector, f_1 = 1:
  // f_n = g_1/(lambda0+g_n+a_n) prod_{j=2}^{n-1} g_j/(lambda0+g_j+a_j)
  StateVector f(n);
  f[0] = 1.0;
  double P = 1.0;
  for (std::size_t k = 2; k <= n; ++k) {
    const double a = model.frag_rate(k), g = model.growth_rate(k);
    f[k - 1] = g1 * P / (res.lambda0 + g + a);
    P *= g / (res.lambda0 + g + a);
  }
  res.eigenvector = f;

  // row-1 defect of the eigen-equation (series truncation + root tolerance)
  {
    double s = 0.0;
    for (std::size_t k = 2; k <= n; ++k)
      s += model.frag_rate(k) * static_cast<double>(k) * f[k - 1];
    res.row1_residual = std::abs((res.lambda0 + g1) * f[0] - s);
  }
  return res;
}

std::optional<ExactLinearGrowth> exact_linear_growth(const CoefficientModel& model,
                                                     std::size_t n) {
  const double r = model.growth_rate(1);
  if (!(r > 0.0)) return std::nullopt;
  for (std::size_t k = 1; k <= 1000; ++k) {
    if (model.death_rate(k) != 0.0) return std::nullopt;
    const double gk = model.growth_rate(k);
    if (std::abs(gk - r * static_cast<double>(k)) > 1e-12 * std::max(1.0, gk))
      return std::nullopt;
  }
  ExactLinearGrowth out;
  out.rate = r;
  StateVector h(n);
  for (std::size_t i = 0; i < n; ++i) h[i] = static_cast<double>(i + 1);
  out.h = h;
  return out;
}

SpectralGapResult spectral_gap(const CoefficientModel& model, std::size_t n,
                               TruncationPolicy policy) {
  if (n > 1500) throw std::invalid_argument("spectral_gap: dense eigensolve budget is N <= 1500");
  const TruncatedOperator U = assemble(model, n, OperatorKind::u_full, policy);
  Eigen::MatrixXd A(n, n);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < n; ++c)
      A(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = U.entry(r, c);
  Eigen::EigenSolver<Eigen::MatrixXd> solver(A);
  if (solver.info() != Eigen::Success) throw SpectralError("spectral_gap: eigensolver failure");

  SpectralGapResult res;
  const auto& ev = solver.eigenvalues();
  const auto& V = solver.eigenvectors();
  Eigen::Index i0 = 0;
  for (Eigen::Index i = 1; i < ev.size(); ++i)
    if (ev(i).real() > ev(i0).real()) i0 = i;
  res.lambda0 = ev(i0).real();
  double second = -std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    res.eigenvalues.push_back(ev(i));
    if (i != i0) second = std::max(second, ev(i).real());
  }
  res.gap = res.lambda0 - second;

  const double theta_max = U.max_theta();
  const double gN =
      policy == TruncationPolicy::reflecting ? 0.0 : model.growth_rate(n);
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    if (i == i0) continue;
    std::complex<double> num(0.0, 0.0);
    double den = 0.0, vinf = 0.0;
    for (Eigen::Index k = 0; k < V.rows(); ++k) {
      const std::complex<double> vk = V(k, i);
      num += static_cast<double>(k + 1) * vk;
      den += static_cast<double>(k + 1) * std::abs(vk);
      vinf = std::max(vinf, std::abs(vk));
    }
    const double defect = gN * std::abs(V(V.rows() - 1, i)) / (theta_max * vinf);
    if (defect < res.defect_tol) {
      ++res.resolved_modes;
      if (den > 0.0) res.worst_moment_ratio = std::max(res.worst_moment_ratio, std::abs(num) / den);
    } else {
      ++res.boundary_modes;
    }
  }
  return res;
}

ConvergenceStudy truncation_convergence(const CoefficientModel& model,
                                        const std::vector<std::size_t>& truncations,
                                        const PerronOptions& opts) {
  if (truncations.size() < 2 ||
      !std::is_sorted(truncations.begin(), truncations.end()))
    throw std::invalid_argument("truncation_convergence: need ascending truncations");
  ConvergenceStudy study;
  study.truncations = truncations;
  for (std::size_t n : truncations)
    study.lambda0.push_back(perron_eigenpair(model, n, opts).lambda0);
  for (std::size_t i = 0; i + 1 < study.lambda0.size(); ++i)
    study.increments.push_back(std::abs(study.lambda0[i + 1] - study.lambda0[i]));
  return study;
}

}  // namespace gdf::spectral
