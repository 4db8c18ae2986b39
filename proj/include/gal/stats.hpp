#pragma once

// Summary statistics and the paired Student t-test used to compare
// strategies seed by seed.

#include "gal/core.hpp"

#include <span>

namespace gal {

inline double mean(std::span<const double> xs) {
  if (xs.empty()) throw Error("mean of an empty sample");
  double s = 0.0;
  for (double x : xs) s += x;
  return s / static_cast<double>(xs.size());
}

// Sample standard deviation, n - 1 denominator.
inline double sample_stddev(std::span<const double> xs) {
  if (xs.size() < 2) return 0.0;
  const double mu = mean(xs);
  double ss = 0.0;
  for (double x : xs) ss += (x - mu) * (x - mu);
  return std::sqrt(ss / static_cast<double>(xs.size() - 1));
}

inline double standard_error(std::span<const double> xs) {
  if (xs.empty()) throw Error("standard error of an empty sample");
  return sample_stddev(xs) / std::sqrt(static_cast<double>(xs.size()));
}

namespace detail {

// Continued fraction for the incomplete beta function (modified Lentz).
inline double beta_continued_fraction(double a, double b, double x) {
  constexpr int kMaxIterations = 10000;
  constexpr double kEps = 1e-16;
  constexpr double kTiny = 1e-300;
  const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIterations; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::fabs(delta - 1.0) < kEps) return h;
  }
  throw Error("incomplete beta: continued fraction did not converge");
}

}  // namespace detail

// Regularized incomplete beta I_x(a, b).
inline double regularized_incomplete_beta(double a, double b, double x) {
  if (a <= 0.0 || b <= 0.0) throw Error("incomplete beta: parameters must be positive");
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double log_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) +
                           b * std::log1p(-x);
  const double front = std::exp(log_front);
  if (x < (a + 1.0) / (a + b + 2.0)) return front * detail::beta_continued_fraction(a, b, x) / a;
  return 1.0 - front * detail::beta_continued_fraction(b, a, 1.0 - x) / b;
}

// P(|T| >= |t|) for Student t with `dof` degrees of freedom.
inline double student_t_two_sided(double t, double dof) {
  if (dof <= 0.0) throw Error("student t: degrees of freedom must be positive");
  if (!std::isfinite(t)) return 0.0;
  return regularized_incomplete_beta(dof / 2.0, 0.5, dof / (dof + t * t));
}

inline double student_t_cdf(double t, double dof) {
  const double tail = 0.5 * student_t_two_sided(t, dof);
  return t >= 0.0 ? 1.0 - tail : tail;
}

struct TTestResult {
  double p_value = 1.0;
  double t = 0.0;
  bool degenerate = false;  // differences have zero variance
};

// Two-sided paired t-test on per-seed scores.
inline TTestResult paired_t_test(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw Error("paired_t_test: samples differ in length");
  if (a.size() < 2) throw Error("paired_t_test: need at least two pairs");
  std::vector<double> diff(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) diff[i] = a[i] - b[i];
  const double mu = mean(diff);
  const double sd = sample_stddev(diff);
  TTestResult r;
  if (sd == 0.0) {
    r.degenerate = true;
    r.p_value = mu == 0.0 ? 1.0 : 0.0;
    r.t = mu == 0.0 ? 0.0 : std::copysign(std::numeric_limits<double>::infinity(), mu);
    return r;
  }
  const double n = static_cast<double>(diff.size());
  r.t = mu / (sd / std::sqrt(n));
  r.p_value = student_t_two_sided(r.t, n - 1.0);
  return r;
}

}  // namespace gal
