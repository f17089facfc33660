#pragma once

#include <cmath>
#include <limits>
#include <span>
#include <stdexcept>

#include "tradenet/core.hpp"

namespace tnet {

// Regularized incomplete beta I_x(a, b) via the Lentz continued fraction,
// with the symmetry transform applied when x is past the distribution bulk.
inline double regularized_incomplete_beta(double a, double b, double x) {
  if (!(a > 0.0) || !(b > 0.0) || std::isnan(x)) return std::nan("");
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;

  auto continued_fraction = [](double a_, double b_, double x_) {
    constexpr double tiny = 1e-300;
    constexpr double eps = 1e-15;
    double qab = a_ + b_;
    double qap = a_ + 1.0;
    double qam = a_ - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x_ / qap;
    if (std::fabs(d) < tiny) d = tiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= 300; ++m) {
      int m2 = 2 * m;
      double aa = m * (b_ - m) * x_ / ((qam + m2) * (a_ + m2));
      d = 1.0 + aa * d;
      if (std::fabs(d) < tiny) d = tiny;
      c = 1.0 + aa / c;
      if (std::fabs(c) < tiny) c = tiny;
      d = 1.0 / d;
      h *= d * c;
      aa = -(a_ + m) * (qab + m) * x_ / ((a_ + m2) * (qap + m2));
      d = 1.0 + aa * d;
      if (std::fabs(d) < tiny) d = tiny;
      c = 1.0 + aa / c;
      if (std::fabs(c) < tiny) c = tiny;
      d = 1.0 / d;
      double del = d * c;
      h *= del;
      if (std::fabs(del - 1.0) < eps) break;
    }
    return h;
  };

  double log_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) +
                     b * std::log1p(-x);
  double front = std::exp(log_front);
  if (x < (a + 1.0) / (a + b + 2.0)) return front * continued_fraction(a, b, x) / a;
  return 1.0 - std::exp(std::lgamma(a + b) - std::lgamma(b) - std::lgamma(a) +
                        b * std::log1p(-x) + a * std::log(x)) *
                   continued_fraction(b, a, 1.0 - x) / b;
}

// Two-sided p-value of a Student t statistic with `dof` degrees of freedom:
// P(|T| >= |t|) = I_{dof/(dof+t^2)}(dof/2, 1/2).
inline double student_t_two_sided_p(double t, double dof) {
  if (dof <= 0.0) return std::nan("");
  double x = dof / (dof + t * t);
  return regularized_incomplete_beta(dof / 2.0, 0.5, x);
}

struct TTestResult {
  int n = 0;
  double mean = 0.0;
  double t = 0.0;
  double p = 1.0;
  bool degenerate = false;  // zero sample variance
};

// One-sample two-sided t-test against mean 0. A zero-variance sample gets
// p = 0 when the mean is nonzero (the data are unanimous) and p = 1 when the
// mean is zero, both flagged degenerate.
inline TTestResult one_sample_t_test(std::span<const double> xs) {
  TTestResult r;
  r.n = static_cast<int>(xs.size());
  if (r.n < 2) throw DomainError("one_sample_t_test requires n >= 2");
  double sum = 0.0;
  for (double x : xs) sum += x;
  r.mean = sum / r.n;
  double ss = 0.0;
  for (double x : xs) ss += (x - r.mean) * (x - r.mean);
  double var = ss / (r.n - 1);
  if (var == 0.0) {
    r.degenerate = true;
    r.t = r.mean == 0.0 ? 0.0 : std::numeric_limits<double>::infinity() * (r.mean > 0 ? 1 : -1);
    r.p = r.mean == 0.0 ? 1.0 : 0.0;
    return r;
  }
  r.t = r.mean / std::sqrt(var / r.n);
  r.p = student_t_two_sided_p(r.t, static_cast<double>(r.n - 1));
  return r;
}

// Significance stars at the 5% / 1% / 0.1% levels.
inline const char* significance_stars(double p) {
  if (p < 0.001) return "***";
  if (p < 0.01) return "**";
  if (p < 0.05) return "*";
  return "";
}

}  // namespace tnet
