#pragma once

// Scalar special functions backing the samplers and test statistics:
// regularized incomplete gamma (series + continued fraction, ~1e-14 relative
// accuracy), the asymptotic Kolmogorov distribution, normal cdf, exact
// binomial tail sums, and a small adaptive Simpson quadrature.

#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>

namespace ssalab {

namespace detail {

inline double gamma_p_series(double a, double x) {
  double sum = 1.0 / a;
  double del = sum;
  for (int n = 1; n < 10000; ++n) {
    del *= x / (a + n);
    sum += del;
    if (std::fabs(del) < std::fabs(sum) * 1e-16) break;
  }
  return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// Lentz continued fraction for Q(a, x), valid for x >= a + 1.
inline double gamma_q_cf(double a, double x) {
  constexpr double kTiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / kTiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < 10000; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = b + an / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < 1e-16) break;
  }
  return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

}  // namespace detail

// P(a, x) = gamma(a, x) / Gamma(a), the cdf of Gamma(a, 1) at x.
inline double regularized_gamma_p(double a, double x) {
  if (!(a > 0) || std::isnan(x))
    throw std::invalid_argument("regularized_gamma_p: need a > 0");
  if (x <= 0) return 0.0;
  if (std::isinf(x)) return 1.0;
  if (x < a + 1.0) return detail::gamma_p_series(a, x);
  return 1.0 - detail::gamma_q_cf(a, x);
}

inline double regularized_gamma_q(double a, double x) {
  if (!(a > 0) || std::isnan(x))
    throw std::invalid_argument("regularized_gamma_q: need a > 0");
  if (x <= 0) return 1.0;
  if (std::isinf(x)) return 0.0;
  if (x < a + 1.0) return 1.0 - detail::gamma_p_series(a, x);
  return detail::gamma_q_cf(a, x);
}

inline double chi_square_cdf(double x, double df) {
  return regularized_gamma_p(df / 2.0, x / 2.0);
}

inline double chi_square_sf(double x, double df) {
  return regularized_gamma_q(df / 2.0, x / 2.0);
}

// Survival function of the asymptotic Kolmogorov distribution,
// P(K > t) = 2 sum_{k>=1} (-1)^{k-1} exp(-2 k^2 t^2),
// with the theta-function dual used for small t. Terms below 1e-12 are
// dropped.
inline double kolmogorov_sf(double t) {
  if (t <= 0) return 1.0;
  if (t < 1.0) {
    const double f = 3.14159265358979323846 / t;
    double sum = 0.0;
    for (int k = 1; k < 64; k += 2) {
      const double term = std::exp(-k * k * f * f / 8.0);
      sum += term;
      if (term < 1e-12 * (sum + 1e-300)) break;
    }
    const double cdf = std::sqrt(2.0 * 3.14159265358979323846) / t * sum;
    return std::fmin(1.0, std::fmax(0.0, 1.0 - cdf));
  }
  double sum = 0.0;
  double sign = 1.0;
  for (int k = 1; k < 64; ++k) {
    const double term = std::exp(-2.0 * k * k * t * t);
    sum += sign * term;
    sign = -sign;
    if (term < 1e-12) break;
  }
  return std::fmin(1.0, std::fmax(0.0, 2.0 * sum));
}

inline double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

inline double log_binomial_pmf(long k, long n, double p) {
  return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0) +
         k * std::log(p) + (n - k) * std::log1p(-p);
}

// Exact P(X <= k) for X ~ Binomial(n, p), by direct pmf summation.
inline double binomial_cdf(long k, long n, double p) {
  if (k < 0) return 0.0;
  if (k >= n) return 1.0;
  double acc = 0.0;
  for (long j = 0; j <= k; ++j) acc += std::exp(log_binomial_pmf(j, n, p));
  return std::fmin(1.0, acc);
}

// Central interval [lo, hi] such that P(X < lo) <= tail and P(X > hi) <= tail
// for X ~ Binomial(n, p).
inline std::pair<long, long> binomial_central_interval(long n, double p, double tail) {
  long lo = 0;
  double acc = 0.0;
  for (long k = 0; k <= n; ++k) {
    acc += std::exp(log_binomial_pmf(k, n, p));
    if (acc > tail) {
      lo = k;
      break;
    }
  }
  long hi = n;
  acc = 0.0;
  for (long k = n; k >= 0; --k) {
    acc += std::exp(log_binomial_pmf(k, n, p));
    if (acc > tail) {
      hi = k;
      break;
    }
  }
  return {lo, hi};
}

namespace detail {

inline double simpson(double a, double b, double fa, double fm, double fb) {
  return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

inline double adaptive_simpson_rec(const std::function<double(double)>& f, double a,
                                   double b, double fa, double fm, double fb,
                                   double whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = f(lm);
  const double frm = f(rm);
  const double left = simpson(a, m, fa, flm, fm);
  const double right = simpson(m, b, fm, frm, fb);
  if (depth <= 0 || std::fabs(left + right - whole) < 15.0 * tol)
    return left + right + (left + right - whole) / 15.0;
  return adaptive_simpson_rec(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1) +
         adaptive_simpson_rec(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1);
}

}  // namespace detail

inline double integrate(const std::function<double(double)>& f, double a, double b,
                        double tol = 1e-12) {
  if (!(b > a)) return 0.0;
  const double m = 0.5 * (a + b);
  const double fa = f(a), fm = f(m), fb = f(b);
  const double whole = detail::simpson(a, b, fa, fm, fb);
  return detail::adaptive_simpson_rec(f, a, b, fa, fm, fb, whole, tol, 40);
}

}  // namespace ssalab
