#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "tradenet/core.hpp"

namespace tnet {

struct DegenerateSampleError : InputError {
  using InputError::InputError;
};
struct NoFitError : InputError {
  using InputError::InputError;
};

// Hurwitz zeta(s, a) = sum_{k>=0} (a+k)^(-s) for s > 1, a > 0.
//
// Direct summation up to a pivot q >= 32, then the Euler-Maclaurin tail
//   q^(1-s)/(s-1) + q^(-s)/2 + s q^(-s-1)/12 - s(s+1)(s+2) q^(-s-3)/720
//     + s(s+1)(s+2)(s+3)(s+4) q^(-s-5)/30240.
// With the pivot at 32 the first omitted term is below 1e-9 relative for
// s <= 10, comfortably inside the 1e-8 budget.
inline double hurwitz_zeta(double s, double a) {
  if (!(s > 1.0) || !(a > 0.0)) return std::nan("");
  constexpr double pivot = 32.0;
  double sum = 0.0;
  double k = a;
  while (k < pivot) {
    sum += std::pow(k, -s);
    k += 1.0;
  }
  double q = k;  // first index not summed directly
  double qs = std::pow(q, -s);
  double tail = q * qs / (s - 1.0) + 0.5 * qs + s * qs / (12.0 * q) -
                s * (s + 1.0) * (s + 2.0) * qs / (720.0 * q * q * q) +
                s * (s + 1.0) * (s + 2.0) * (s + 3.0) * (s + 4.0) * qs /
                    (30240.0 * q * q * q * q * q);
  return sum + tail;
}

enum class TailForm { density, ccdf };

inline const char* to_string(TailForm f) { return f == TailForm::density ? "density" : "ccdf"; }

// Discrete power-law fit p(x) ~ x^(-exponent) for x >= x_min. `exponent` is
// the density form; the CCDF tail exponent is exponent - 1.
struct PowerLawFit {
  TailForm form = TailForm::density;
  double exponent = 0.0;
  std::int64_t x_min = 1;
  double ks_distance = 1.0;
  std::int64_t n_tail = 0;
  double stderr_ = 0.0;
  std::optional<double> p_value;
  std::optional<std::uint64_t> p_value_seed;
  std::vector<std::string> warnings;

  double ccdf_exponent() const { return exponent - 1.0; }
};

struct PowerLawOptions {
  std::int64_t min_tail = 10;    // smallest tail admitted to the x_min scan
  double exponent_lo = 1.0 + 1e-6;
  double exponent_hi = 10.0;
  double tolerance = 1e-6;       // golden-section width on the exponent
};

namespace detail {

// Maximizes the zeta log-likelihood n * [-log zeta(s, x_min)] - s * log_sum
// by golden-section search; the likelihood is concave in s.
inline double zeta_mle(double x_min, std::int64_t n_tail, double log_sum,
                       const PowerLawOptions& opt) {
  auto neg_loglik = [&](double s) {
    return n_tail * std::log(hurwitz_zeta(s, x_min)) + s * log_sum;
  };
  constexpr double inv_phi = 0.6180339887498949;
  double a = opt.exponent_lo, b = opt.exponent_hi;
  double x1 = b - inv_phi * (b - a);
  double x2 = a + inv_phi * (b - a);
  double f1 = neg_loglik(x1), f2 = neg_loglik(x2);
  while (b - a > opt.tolerance) {
    if (f1 < f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - inv_phi * (b - a);
      f1 = neg_loglik(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + inv_phi * (b - a);
      f2 = neg_loglik(x2);
    }
  }
  return (a + b) / 2.0;
}

// KS distance between the empirical tail CDF and the fitted zeta CDF,
// evaluated at the distinct tail values.
inline double ks_distance(std::span<const std::int64_t> distinct_tail,
                          std::span<const std::int64_t> tail_counts, std::int64_t n_tail,
                          double s, std::int64_t x_min) {
  double z0 = hurwitz_zeta(s, static_cast<double>(x_min));
  double d = 0.0;
  std::int64_t cum = 0;
  for (std::size_t i = 0; i < distinct_tail.size(); ++i) {
    cum += tail_counts[i];
    double emp = static_cast<double>(cum) / static_cast<double>(n_tail);
    double fit = 1.0 - hurwitz_zeta(s, static_cast<double>(distinct_tail[i] + 1)) / z0;
    d = std::max(d, std::fabs(emp - fit));
  }
  return d;
}

}  // namespace detail

// Maximum-likelihood discrete power-law fit with the lower bound chosen to
// minimize the KS distance over every distinct sample value whose tail count
// clears opt.min_tail (falling back to 2 with a warning when none does).
inline PowerLawFit fit_discrete_powerlaw(std::span<const std::int64_t> sample,
                                         const PowerLawOptions& opt = {}) {
  if (sample.empty()) throw NoFitError("empty sample");
  std::vector<std::int64_t> sorted(sample.begin(), sample.end());
  std::sort(sorted.begin(), sorted.end());
  if (sorted.front() <= 0) throw InputError("power-law samples must be positive integers");

  std::vector<std::int64_t> distinct, counts;
  for (std::int64_t v : sorted) {
    if (distinct.empty() || distinct.back() != v) {
      distinct.push_back(v);
      counts.push_back(1);
    } else {
      counts.back() += 1;
    }
  }
  if (distinct.size() < 3)
    throw DegenerateSampleError("sample has fewer than 3 distinct values; no tail to fit");

  PowerLawFit fit;
  if (static_cast<std::int64_t>(sorted.size()) < 50)
    fit.warnings.push_back("sample smaller than 50; estimates have low power");

  // Suffix sums let every candidate reuse one pass of log/count totals.
  std::size_t m = distinct.size();
  std::vector<std::int64_t> suffix_count(m + 1, 0);
  std::vector<double> suffix_logsum(m + 1, 0.0);
  for (std::size_t i = m; i-- > 0;) {
    suffix_count[i] = suffix_count[i + 1] + counts[i];
    suffix_logsum[i] = suffix_logsum[i + 1] + counts[i] * std::log(static_cast<double>(distinct[i]));
  }

  auto scan = [&](std::int64_t min_tail) {
    bool found = false;
    for (std::size_t i = 0; i < m; ++i) {
      std::int64_t n_tail = suffix_count[i];
      if (n_tail < min_tail) break;  // tails only shrink as x_min grows
      if (m - i < 2) break;          // need at least two distinct tail values
      double s = detail::zeta_mle(static_cast<double>(distinct[i]), n_tail, suffix_logsum[i], opt);
      double d = detail::ks_distance(std::span(distinct).subspan(i), std::span(counts).subspan(i),
                                     n_tail, s, distinct[i]);
      if (!found || d < fit.ks_distance) {
        found = true;
        fit.exponent = s;
        fit.x_min = distinct[i];
        fit.ks_distance = d;
        fit.n_tail = n_tail;
      }
    }
    return found;
  };

  if (!scan(std::max<std::int64_t>(opt.min_tail, 2))) {
    fit.warnings.push_back("no candidate lower bound with n_tail >= " +
                           std::to_string(opt.min_tail) + "; relaxed to 2");
    if (!scan(2)) throw NoFitError("no candidate lower bound with n_tail >= 2");
  }
  fit.stderr_ = (fit.exponent - 1.0) / std::sqrt(static_cast<double>(fit.n_tail));
  return fit;
}

// Inverse-CDF sampling of the zeta distribution p(x) ~ x^(-s), x >= x_min.
inline std::int64_t zeta_quantile(double u, double s, std::int64_t x_min) {
  double z0 = hurwitz_zeta(s, static_cast<double>(x_min));
  auto cdf = [&](std::int64_t x) {
    return 1.0 - hurwitz_zeta(s, static_cast<double>(x + 1)) / z0;
  };
  std::int64_t lo = x_min, hi = x_min;
  while (cdf(hi) < u) {
    lo = hi + 1;
    hi = hi * 2 + 1;
    if (hi > (std::int64_t{1} << 40)) break;  // u astronomically close to 1
  }
  while (lo < hi) {
    std::int64_t mid = lo + (hi - lo) / 2;
    if (cdf(mid) < u)
      lo = mid + 1;
    else
      hi = mid;
  }
  return lo;
}

template <typename Rng>
std::vector<std::int64_t> sample_zeta(Rng& rng, double s, std::int64_t x_min, std::size_t n) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<std::int64_t> out(n);
  for (auto& v : out) v = zeta_quantile(unit(rng), s, x_min);
  return out;
}

// Clauset-style semi-parametric bootstrap p-value: synthetic samples draw the
// body from the empirical sub-x_min values and the tail from the fitted zeta;
// p is the share of replications whose refit KS distance reaches the observed
// one. Seeded and expensive; off by default.
inline double powerlaw_bootstrap_p(std::span<const std::int64_t> sample, const PowerLawFit& fit,
                                   int replications, std::uint64_t seed,
                                   const PowerLawOptions& opt = {}) {
  std::vector<std::int64_t> body;
  std::int64_t n_tail = 0;
  for (std::int64_t v : sample) {
    if (v < fit.x_min)
      body.push_back(v);
    else
      ++n_tail;
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  double p_tail = static_cast<double>(n_tail) / static_cast<double>(sample.size());
  int exceed = 0;
  int usable = 0;
  for (int r = 0; r < replications; ++r) {
    std::vector<std::int64_t> synth(sample.size());
    for (auto& v : synth) {
      if (body.empty() || unit(rng) < p_tail)
        v = zeta_quantile(unit(rng), fit.exponent, fit.x_min);
      else
        v = body[static_cast<std::size_t>(unit(rng) * body.size()) % body.size()];
    }
    try {
      PowerLawFit refit = fit_discrete_powerlaw(synth, opt);
      ++usable;
      if (refit.ks_distance >= fit.ks_distance) ++exceed;
    } catch (const InputError&) {
      // replication produced no fittable tail; skip it
    }
  }
  if (usable == 0) return std::nan("");
  return static_cast<double>(exceed) / static_cast<double>(usable);
}

inline nlohmann::json fit_report_json(const PowerLawFit& fit) {
  nlohmann::json j{{"form", to_string(fit.form)}, {"exponent", fit.exponent},
                   {"x_min", fit.x_min},          {"ks", fit.ks_distance},
                   {"n_tail", fit.n_tail},        {"stderr", fit.stderr_},
                   {"warnings", fit.warnings}};
  if (fit.p_value) j["p_value"] = *fit.p_value;
  if (fit.p_value_seed) j["seed"] = *fit.p_value_seed;
  return j;
}

// ---------------------------------------------------------------------------
// Log-log regression
// ---------------------------------------------------------------------------

struct SlopeFit {
  double beta = 0.0;    // negated OLS slope, so value ~ t^(-beta)
  double stderr_ = 0.0;
  double r2 = 1.0;
};

// OLS of log(value) on log(t) over integer t in [t_lo, t_hi]. values_by_t[i]
// holds the value at t = i + 1.
inline SlopeFit loglog_slope(std::span<const double> values_by_t, int t_lo, int t_hi) {
  if (t_lo < 1 || t_hi < t_lo) throw DomainError("loglog_slope: bad t range");
  if (static_cast<std::size_t>(t_hi) > values_by_t.size())
    throw DomainError("loglog_slope: range exceeds series length");
  int n = t_hi - t_lo + 1;
  if (n < 2) throw DomainError("loglog_slope: need at least two points");
  std::vector<double> lx(n), ly(n);
  for (int t = t_lo; t <= t_hi; ++t) {
    double v = values_by_t[t - 1];
    if (!(v > 0.0))
      throw DomainError("loglog_slope: non-positive value at t = " + std::to_string(t));
    lx[t - t_lo] = std::log(static_cast<double>(t));
    ly[t - t_lo] = std::log(v);
  }
  // A constant series is an exact zero slope; skip the arithmetic so no
  // rounding dust leaks into beta.
  if (std::all_of(ly.begin(), ly.end(), [&](double y) { return y == ly[0]; }))
    return SlopeFit{0.0, 0.0, 1.0};
  double mx = 0.0, my = 0.0;
  for (int i = 0; i < n; ++i) {
    mx += lx[i];
    my += ly[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (int i = 0; i < n; ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
    syy += (ly[i] - my) * (ly[i] - my);
  }
  double slope = sxy / sxx;
  SlopeFit fit;
  fit.beta = -slope;
  double sse = std::max(0.0, syy - slope * sxy);
  fit.stderr_ = n > 2 ? std::sqrt(sse / (n - 2) / sxx) : 0.0;
  fit.r2 = syy == 0.0 ? 1.0 : 1.0 - sse / syy;
  return fit;
}

}  // namespace tnet
