#include "gdf/conditions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace gdf::conditions {

std::string to_string(ConditionId id) {
  switch (id) {
    case ConditionId::condi1: return "condi1";
    case ConditionId::condi2: return "condi2";
    case ConditionId::condi3: return "condi3";
    case ConditionId::condi4a: return "condi4a";
    case ConditionId::condi4b: return "condi4b";
    case ConditionId::riai: return "riai";
    case ConditionId::crucrit_prime: return "crucrit_prime";
    case ConditionId::crucrit: return "crucrit";
    case ConditionId::ggamcond: return "ggamcond";
    case ConditionId::bdp1: return "bdp1";
    case ConditionId::thm3_2a: return "thm3_2a";
    case ConditionId::thm3_2b: return "thm3_2b";
    case ConditionId::thm3_2c: return "thm3_2c";
    case ConditionId::growth_linear: return "growth_linear";
    case ConditionId::growth_superlinear: return "growth_superlinear";
  }
  return "?";
}

std::optional<ConditionId> condition_from_string(const std::string& name) {
  for (ConditionId id : all_conditions())
    if (to_string(id) == name) return id;
  return std::nullopt;
}

std::vector<ConditionId> all_conditions() {
  return {ConditionId::condi1,        ConditionId::condi2,  ConditionId::condi3,
          ConditionId::condi4a,       ConditionId::condi4b, ConditionId::riai,
          ConditionId::crucrit_prime, ConditionId::crucrit, ConditionId::ggamcond,
          ConditionId::bdp1,          ConditionId::thm3_2a, ConditionId::thm3_2b,
          ConditionId::thm3_2c,       ConditionId::growth_linear,
          ConditionId::growth_superlinear};
}

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::holds: return "holds";
    case Verdict::fails: return "fails";
    case Verdict::inconclusive: return "inconclusive";
  }
  return "?";
}

namespace {

std::vector<std::size_t> geometric_samples(const Window& w) {
  if (w.n_lo < 2 || w.n_hi < w.n_lo) throw std::invalid_argument("conditions: bad window");
  std::vector<std::size_t> out;
  const double ratio = static_cast<double>(w.n_hi) / static_cast<double>(w.n_lo);
  const std::size_t pts = std::max<std::size_t>(w.points, 2);
  for (std::size_t k = 0; k < pts; ++k) {
    const double t = static_cast<double>(k) / static_cast<double>(pts - 1);
    const auto n = static_cast<std::size_t>(std::llround(w.n_lo * std::pow(ratio, t)));
    if (out.empty() || n > out.back()) out.push_back(n);
  }
  if (out.size() < 16) throw std::invalid_argument("conditions: window too small (< 16 points)");
  return out;
}

enum class Trend { diverges_up, diverges_down, converges, unknown };

struct TrendResult {
  Trend kind = Trend::unknown;
  double limit = std::numeric_limits<double>::quiet_NaN();
  double loglog_slope = std::numeric_limits<double>::quiet_NaN();
  bool stable = false;  // monotone or oscillation < 10% of level on the last half
};

// Trend of a witness sequence over the last half of the window.
// holds/fails verdicts are only issued from stable trends; anything else
// stays inconclusive.
TrendResult classify(const std::vector<std::size_t>& n, const std::vector<double>& v) {
  TrendResult res;
  const std::size_t half = v.size() / 2;
  const std::size_t m = v.size() - half;
  bool any_inf = false, all_finite = true;
  for (std::size_t i = half; i < v.size(); ++i) {
    if (std::isinf(v[i])) any_inf = true;
    if (!std::isfinite(v[i])) all_finite = false;
  }
  if (any_inf) {
    res.kind = Trend::diverges_up;
    res.stable = true;
    return res;
  }
  if (!all_finite) return res;

  // Sequences at the numerical-noise floor are converged zeros.
  double scale = 0.0, tail_max = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) scale = std::max(scale, std::abs(v[i]));
  for (std::size_t i = half; i < v.size(); ++i) tail_max = std::max(tail_max, std::abs(v[i]));
  if (tail_max <= std::max(1e-12, 1e-10 * scale)) {
    res.kind = Trend::converges;
    res.limit = 0.0;
    res.stable = true;
    return res;
  }

  double vmin = v[half], vmax = v[half];
  bool nondec = true, noninc = true;
  for (std::size_t i = half; i < v.size(); ++i) {
    vmin = std::min(vmin, v[i]);
    vmax = std::max(vmax, v[i]);
    if (i > half) {
      const double slack = 1e-9 * (std::abs(v[i]) + std::abs(v[i - 1]));
      if (v[i] < v[i - 1] - slack) nondec = false;
      if (v[i] > v[i - 1] + slack) noninc = false;
    }
  }
  double level = 0.0;
  for (std::size_t i = half; i < v.size(); ++i) level += std::abs(v[i]);
  level /= static_cast<double>(m);
  const bool low_osc = (vmax - vmin) <= 0.1 * std::max(level, 1e-300);
  res.stable = nondec || noninc || low_osc;
  if (!res.stable) return res;

  // log-log slope on the positive part of the last half
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int cnt = 0;
  for (std::size_t i = half; i < v.size(); ++i) {
    if (v[i] > 0.0) {
      const double x = std::log(static_cast<double>(n[i])), y = std::log(v[i]);
      sx += x; sy += y; sxx += x * x; sxy += x * y;
      ++cnt;
    }
  }
  if (cnt >= 4) {
    const double den = sxx - sx * sx / cnt;
    if (den > 0.0) res.loglog_slope = (sxy - sx * sy / cnt) / den;
  }

  // limit estimate: mean of the last quarter
  const std::size_t q = v.size() - v.size() / 4;
  double est = 0.0;
  for (std::size_t i = q; i < v.size(); ++i) est += v[i];
  est /= static_cast<double>(v.size() - q);
  res.limit = est;

  const double slope = res.loglog_slope;
  if (std::isfinite(slope) && slope > 0.02 && nondec && level > 0.0) {
    res.kind = Trend::diverges_up;
  } else if (std::isfinite(slope) && slope < -0.02 && vmin >= 0.0) {
    res.kind = Trend::converges;  // decaying positive sequence -> 0
    res.limit = 0.0;
  } else if (noninc && !low_osc && v.back() < 0.0 && std::abs(v.back()) > 2.0 * std::abs(v[half])) {
    res.kind = Trend::diverges_down;
  } else {
    res.kind = Trend::converges;
  }
  return res;
}

// Least-squares growth exponent q of a positive rate over the window.
struct ExponentFit {
  double q = std::numeric_limits<double>::quiet_NaN();
  double rms = std::numeric_limits<double>::infinity();
  bool ok = false;
};

ExponentFit fit_exponent(const std::vector<std::size_t>& n, const std::vector<double>& v) {
  ExponentFit fit;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int cnt = 0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (v[i] > 0.0) {
      const double x = std::log(static_cast<double>(n[i])), y = std::log(v[i]);
      sx += x; sy += y; sxx += x * x; sxy += x * y;
      ++cnt;
    }
  }
  if (cnt < 8) return fit;
  const double den = sxx - sx * sx / cnt;
  if (den <= 0.0) return fit;
  fit.q = (sxy - sx * sy / cnt) / den;
  const double b = (sy - fit.q * sx) / cnt;
  double ss = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (v[i] > 0.0) {
      const double r = std::log(v[i]) - (fit.q * std::log(static_cast<double>(n[i])) + b);
      ss += r * r;
    }
  }
  fit.rms = std::sqrt(ss / cnt);
  fit.ok = true;
  return fit;
}

double pow_ratio_up(double n, double m) {  // (1+1/n)^m - 1
  return std::pow(1.0 + 1.0 / n, m) - 1.0;
}
double pow_ratio_down(double n, double m) {  // 1 - (1-1/n)^m
  return 1.0 - std::pow(1.0 - 1.0 / n, m);
}

Verdict liminf_vs_threshold(const TrendResult& t, double thr, double margin, bool strict,
                            std::string& note) {
  switch (t.kind) {
    case Trend::diverges_up:
      return Verdict::holds;
    case Trend::diverges_down:
      return Verdict::fails;
    case Trend::converges:
      if (t.limit > thr + margin) return Verdict::holds;
      if (t.limit < thr - margin) return Verdict::fails;
      if (!strict && std::abs(t.limit - thr) <= margin) {
        note = "limit sits at the threshold within margin";
        return Verdict::inconclusive;
      }
      note = "limit within margin of the strict threshold";
      return Verdict::inconclusive;
    default:
      note = "witness trend not stable over the last half-window";
      return Verdict::inconclusive;
  }
}

Verdict bounded_above(const TrendResult& t, std::string& note) {
  switch (t.kind) {
    case Trend::diverges_up:
      return Verdict::fails;
    case Trend::diverges_down:
    case Trend::converges:
      return Verdict::holds;
    default:
      note = "witness trend not stable over the last half-window";
      return Verdict::inconclusive;
  }
}

}  // namespace

DiagnosticSequences diagnostic_sequences(const CoefficientModel& model, double m,
                                         const Window& window) {
  if (m < 1.0) throw std::invalid_argument("diagnostic_sequences: m must be >= 1");
  DiagnosticSequences seq;
  seq.n = geometric_samples(window);
  seq.lambda_seq.resize(seq.n.size());
  seq.theta_seq.resize(seq.n.size());
  seq.gamma_seq.resize(seq.n.size());
  seq.delta_ratio.resize(seq.n.size());
  for (std::size_t i = 0; i < seq.n.size(); ++i) {
    const std::size_t k = std::max<std::size_t>(seq.n[i], 2);
    const double nn = static_cast<double>(k);
    const double a = model.frag_rate(k), g = model.growth_rate(k), d = model.death_rate(k);
    const double th = a + g + d, ad = a + d;
    const double dr = delta_functional(model.kernel(), m, k) / std::pow(nn, m);
    seq.delta_ratio[i] = dr;
    const double up = pow_ratio_up(nn, m), down = pow_ratio_down(nn, m);
    seq.gamma_seq[i] = g * up - d * down;
    seq.theta_seq[i] = th > 0.0 ? (a / th) * dr + (d / th) * down - (g / th) * up
                                : std::numeric_limits<double>::quiet_NaN();
    seq.lambda_seq[i] = ad > 0.0 ? (a / ad) * dr + (d / ad) * down - (g / ad) * up
                                 : std::numeric_limits<double>::quiet_NaN();
  }
  return seq;
}

ConditionVerdict evaluate_condition(const CoefficientModel& model, ConditionId id, double m,
                                    double m_prime, const CheckerOptions& opts) {
  const bool needs_mp = id == ConditionId::condi2 || id == ConditionId::crucrit_prime ||
                        id == ConditionId::thm3_2c;
  if (needs_mp && !(m_prime > m))
    throw std::invalid_argument("evaluate_condition: " + to_string(id) + " needs m' > m");

  ConditionVerdict cv;
  cv.id = id;
  cv.n_lo = opts.window.n_lo;
  cv.n_hi = opts.window.n_hi;
  cv.sample_n = geometric_samples(opts.window);
  const auto& ns = cv.sample_n;
  auto& w = cv.witness;
  w.resize(ns.size());

  auto rate_triplet = [&](std::size_t i) {
    const std::size_t k = std::max<std::size_t>(ns[i], 2);
    return std::tuple<double, double, double, double>(model.frag_rate(k), model.growth_rate(k),
                                                      model.death_rate(k),
                                                      static_cast<double>(k));
  };

  std::string note;
  switch (id) {
    case ConditionId::condi1: {
      for (std::size_t i = 0; i < ns.size(); ++i) {
        auto [a, g, d, nn] = rate_triplet(i);
        w[i] = a + d - g * (std::pow(nn + 1.0, m) - std::pow(nn, m)) / std::pow(nn, m);
      }
      const auto t = classify(ns, w);
      cv.limit_estimate = t.kind == Trend::converges ? std::optional<double>(t.limit) : std::nullopt;
      cv.verdict = liminf_vs_threshold(t, 0.0, opts.margin, false, note);
      break;
    }
    case ConditionId::condi2: {
      for (std::size_t i = 0; i < ns.size(); ++i) {
        auto [a, g, d, nn] = rate_triplet(i);
        w[i] = g > 0.0 ? nn * (a + d) / g : std::numeric_limits<double>::infinity();
      }
      const auto t = classify(ns, w);
      cv.limit_estimate = t.kind == Trend::converges ? std::optional<double>(t.limit) : std::nullopt;
      cv.verdict = liminf_vs_threshold(t, m_prime, opts.margin, false, note);
      break;
    }
    case ConditionId::condi3: {
      for (std::size_t i = 0; i < ns.size(); ++i) {
        auto [a, g, d, nn] = rate_triplet(i);
        w[i] = a + d;
      }
      const auto t = classify(ns, w);
      if (t.kind == Trend::diverges_up) cv.verdict = Verdict::holds;
      else if (t.kind == Trend::converges || t.kind == Trend::diverges_down) {
        cv.verdict = Verdict::fails;
        cv.limit_estimate = t.limit;
        note = "a_n + d_n stays bounded";
      } else {
        cv.verdict = Verdict::inconclusive;
      }
      break;
    }
    case ConditionId::condi4a: {
      for (std::size_t i = 0; i < ns.size(); ++i) w[i] = model.growth_rate(ns[i]);
      const auto fit = fit_exponent(ns, w);
      if (!fit.ok || fit.rms > 0.1) {
        cv.verdict = Verdict::inconclusive;
        note = "growth is not power-like over the window";
      } else if (fit.q > 1.02) {
        cv.verdict = Verdict::holds;  // sum 1/g_n behaves like a p-series with p > 1
        cv.limit_estimate = fit.q;
      } else if (fit.q <= 1.0 + 1e-9) {
        cv.verdict = Verdict::fails;  // p <= 1 diverges (harmonic at the boundary)
        cv.limit_estimate = fit.q;
      } else {
        cv.verdict = Verdict::inconclusive;
        note = "growth exponent within the indeterminate band (1, 1.02]";
      }
      break;
    }
    case ConditionId::condi4b: {
      for (std::size_t i = 0; i < ns.size(); ++i) {
        auto [a, g, d, nn] = rate_triplet(i);
        w[i] = g > 0.0 ? nn / g : std::numeric_limits<double>::infinity();
      }
      const auto t = classify(ns, w);
      if (t.kind == Trend::converges && std::abs(t.limit) <= opts.margin) cv.verdict = Verdict::holds;
      else if (t.kind == Trend::converges) {
        cv.verdict = Verdict::fails;
        cv.limit_estimate = t.limit;
      } else if (t.kind == Trend::diverges_up) cv.verdict = Verdict::fails;
      else cv.verdict = Verdict::inconclusive;
      break;
    }
    case ConditionId::riai: {
      for (std::size_t i = 0; i < ns.size(); ++i) {
        auto [a, g, d, nn] = rate_triplet(i);
        w[i] = g > 0.0 ? (a + d) / g : std::numeric_limits<double>::infinity();
      }
      const auto t = classify(ns, w);
      if (t.kind == Trend::diverges_up) cv.verdict = Verdict::holds;
      else if (t.kind == Trend::converges) {
        cv.limit_estimate = t.limit;
        if (t.limit > opts.margin) cv.verdict = Verdict::holds;
        else if (t.limit <= 1e-12) cv.verdict = Verdict::fails;
        else cv.verdict = Verdict::inconclusive;
      } else {
        cv.verdict = Verdict::inconclusive;
      }
      // The paper's remark: (crucrit) forces both factors away from zero,
      // so a crucrit pass settles an otherwise borderline riai.
      if (cv.verdict == Verdict::inconclusive) {
        const auto cc = evaluate_condition(model, ConditionId::crucrit, std::max(m, 2.0), m_prime,
                                           opts);
        if (cc.verdict == Verdict::holds) {
          cv.verdict = Verdict::holds;
          note = "implied by crucrit (remark after Theorem 2)";
        }
      }
      break;
    }
    case ConditionId::crucrit_prime:
    case ConditionId::crucrit: {
      for (std::size_t i = 0; i < ns.size(); ++i) {
        auto [a, g, d, nn] = rate_triplet(i);
        const std::size_t k = std::max<std::size_t>(ns[i], 2);
        const double dr = delta_functional(model.kernel(), m, k) / std::pow(nn, m);
        const double den = id == ConditionId::crucrit ? a + g + d : a + d;
        w[i] = den > 0.0 ? (a / den) * dr : std::numeric_limits<double>::quiet_NaN();
      }
      const auto t = classify(ns, w);
      const double thr = id == ConditionId::crucrit ? 0.0 : m / m_prime;
      cv.limit_estimate = t.kind == Trend::converges ? std::optional<double>(t.limit) : std::nullopt;
      cv.verdict = liminf_vs_threshold(t, thr, opts.margin, true, note);
      // strictly above zero also needs the limit not to vanish
      if (id == ConditionId::crucrit && cv.verdict == Verdict::inconclusive &&
          t.kind == Trend::converges && t.limit <= 1e-12)
        cv.verdict = Verdict::fails;
      break;
    }
    case ConditionId::ggamcond: {
      double gamma_c, g_c;
      if (opts.gamma_bound && opts.g_bound) {
        gamma_c = *opts.gamma_bound;
        g_c = *opts.g_bound;
        note = "user-supplied constants";
      } else {
        gamma_c = std::numeric_limits<double>::infinity();
        g_c = 0.0;
        for (std::size_t i = 0; i < ns.size(); ++i) {
          auto [a, g, d, nn] = rate_triplet(i);
          if (a > 0.0) {
            const double r = g / a;
            w[i] = r;
            gamma_c = std::min(gamma_c, r);
            g_c = std::max(g_c, r);
          }
        }
        note = "constants derived from g_n/a_n over the window";
      }
      if (!std::isfinite(gamma_c) || g_c <= 0.0) {
        cv.verdict = Verdict::inconclusive;
        note = "g_n/a_n is unavailable over the window";
        break;
      }
      const double lhs = g_c + 1.0, mid = (gamma_c + 1.0) * (gamma_c + 1.0),
                   rhs = (g_c + 1.0) * (g_c + 1.0);
      cv.limit_estimate = mid;
      cv.verdict = (lhs + opts.margin < mid && mid <= rhs + opts.margin) ? Verdict::holds
                                                                         : Verdict::fails;
      break;
    }
    case ConditionId::bdp1: {
      for (std::size_t i = 0; i < ns.size(); ++i) {
        auto [a, g, d, nn] = rate_triplet(i);
        w[i] = g * pow_ratio_up(nn, m) - d * pow_ratio_down(nn, m);
      }
      const auto t = classify(ns, w);
      cv.limit_estimate = t.kind == Trend::converges ? std::optional<double>(t.limit) : std::nullopt;
      cv.verdict = bounded_above(t, note);
      break;
    }
    case ConditionId::thm3_2a:
    case ConditionId::growth_linear: {
      for (std::size_t i = 0; i < ns.size(); ++i) {
        auto [a, g, d, nn] = rate_triplet(i);
        w[i] = g / nn;
      }
      const auto t = classify(ns, w);
      cv.limit_estimate = t.kind == Trend::converges ? std::optional<double>(t.limit) : std::nullopt;
      cv.verdict = bounded_above(t, note);
      break;
    }
    case ConditionId::thm3_2b: {
      std::vector<double> ratio(ns.size()), dn2(ns.size());
      for (std::size_t i = 0; i < ns.size(); ++i) {
        auto [a, g, d, nn] = rate_triplet(i);
        ratio[i] = g > 0.0 ? d / g : std::numeric_limits<double>::infinity();
        dn2[i] = d / (nn * nn);
        w[i] = ratio[i];
      }
      const auto tr = classify(ns, ratio);
      const auto td = classify(ns, dn2);
      std::string dummy;
      const Verdict part1 =
          tr.kind == Trend::diverges_up
              ? Verdict::holds
              : liminf_vs_threshold(tr, 1.0, opts.margin, false, dummy);  // limsup >= 1
      const Verdict part2 = bounded_above(td, dummy);
      if (part1 == Verdict::holds && part2 == Verdict::holds) cv.verdict = Verdict::holds;
      else if (part1 == Verdict::fails || part2 == Verdict::fails) cv.verdict = Verdict::fails;
      else cv.verdict = Verdict::inconclusive;
      break;
    }
    case ConditionId::thm3_2c: {
      bool all = true, stable = true;
      for (std::size_t i = 0; i < ns.size(); ++i) {
        auto [a, g, d, nn] = rate_triplet(i);
        w[i] = g > 0.0 ? (d / g - 1.0) * nn : std::numeric_limits<double>::quiet_NaN();
        if (!std::isfinite(w[i])) stable = false;
      }
      for (std::size_t i = ns.size() / 2; i < ns.size(); ++i)
        if (!(w[i] >= m_prime - 1.0 - opts.margin)) all = false;
      cv.verdict = !stable ? Verdict::inconclusive : (all ? Verdict::holds : Verdict::fails);
      break;
    }
    case ConditionId::growth_superlinear: {
      for (std::size_t i = 0; i < ns.size(); ++i) w[i] = model.growth_rate(ns[i]);
      const auto fit = fit_exponent(ns, w);
      if (!fit.ok || fit.rms > 0.1) {
        cv.verdict = Verdict::inconclusive;
        note = "growth is not power-like over the window";
      } else {
        cv.limit_estimate = fit.q;
        if (fit.q <= 1.0 + 1e-9) cv.verdict = Verdict::fails;
        else if (fit.q <= 1.02) { cv.verdict = Verdict::inconclusive; note = "exponent barely above 1"; }
        else if (fit.q <= m + 1.0 + opts.margin) cv.verdict = Verdict::holds;
        else {
          cv.verdict = Verdict::inconclusive;
          note = "q > m+1: outside the non-generation statement";
        }
      }
      break;
    }
  }
  cv.note = note;
  return cv;
}

FullReport full_report(const CoefficientModel& model, double m, double m_prime,
                       const CheckerOptions& opts) {
  if (!(m >= 1.0) || !(m_prime > m))
    throw std::invalid_argument("full_report: need m >= 1 and m' > m");
  FullReport report;
  report.m = m;
  report.m_prime = m_prime;
  for (ConditionId id : all_conditions()) {
    try {
      report.verdicts[id] = evaluate_condition(model, id, m, m_prime, opts);
    } catch (const std::exception& e) {
      ConditionVerdict cv;
      cv.id = id;
      cv.verdict = Verdict::inconclusive;
      cv.note = e.what();
      report.verdicts[id] = cv;
    }
  }
  auto holds = [&](ConditionId id) {
    auto it = report.verdicts.find(id);
    return it != report.verdicts.end() && it->second.verdict == Verdict::holds;
  };
  if (holds(ConditionId::condi2))
    report.claims.push_back("condi2 => condi1: K_m generates a quasicontractive positive "
                            "semigroup and R(lambda,K) has the explicit lower-triangular form");
  if (holds(ConditionId::riai))
    report.claims.push_back("riai => K_m generates an analytic semigroup");
  if (holds(ConditionId::riai) && holds(ConditionId::condi3))
    report.claims.push_back("riai + condi3 => the K-semigroup is compact");
  if (holds(ConditionId::condi2) && holds(ConditionId::crucrit_prime))
    report.claims.push_back("condi2 + crucrit' => Y_m generates a positive semigroup");
  if (holds(ConditionId::crucrit))
    report.claims.push_back("crucrit => U_m generates a positive analytic semigroup");
  if (holds(ConditionId::crucrit) && holds(ConditionId::condi3))
    report.claims.push_back(
        "crucrit + condi3 => analytic compact irreducible semigroup => AEG holds");
  if (holds(ConditionId::growth_linear))
    report.claims.push_back("growth_linear: the pure growth part generates a C0-semigroup");
  if (holds(ConditionId::thm3_2a) || holds(ConditionId::thm3_2b) || holds(ConditionId::thm3_2c))
    report.claims.push_back("Theorem 3.2 => bdp1: the birth-death part generates");
  if (holds(ConditionId::growth_superlinear)) {
    report.claims.push_back(
        "growth_superlinear: no realisation of the growth part has a bounded resolvent "
        "(non-generation); see the attached resolvent profile");
    report.nongeneration =
        nongeneration_probe(model, m, 1.0, {100, 1000, 10000});
  }
  return report;
}

}  // namespace gdf::conditions
