#pragma once

// The verification instruments: one-sample and two-sample Kolmogorov-Smirnov,
// Poisson dispersion, permutation independence, chi-square against fixed
// expectations, and the rate estimator for scale-invariant point sets. Every
// instrument reports through TestReport and is a deterministic function of its
// inputs and seeds.
//
// KS p-values use the asymptotic Kolmogorov series; below n = 1000 the
// conservative finite-sample rescaling D * (sqrt(n) + 0.12 + 0.11/sqrt(n)) is
// applied first.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "ssalab/pointproc.hpp"
#include "ssalab/rng.hpp"
#include "ssalab/special.hpp"

namespace ssalab {

struct TestReport {
  std::string name;
  double statistic = 0.0;
  double p_value = 1.0;
  std::size_t n = 0;
  double alpha = 0.05;
  bool pass = true;
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;
  std::string note;   // in-memory only
  std::string claim;  // claim-catalog label, carried into summaries

  static TestReport make(std::string name, double statistic, double p_value,
                         std::size_t n, double alpha) {
    TestReport r;
    r.name = std::move(name);
    r.statistic = statistic;
    r.p_value = std::fmin(1.0, std::fmax(0.0, p_value));
    r.n = n;
    r.alpha = alpha;
    r.pass = r.p_value >= alpha;
    return r;
  }

  nlohmann::json to_json() const {
    return nlohmann::json{{"name", name}, {"statistic", statistic},
                          {"p_value", p_value}, {"n", n},
                          {"alpha", alpha},     {"pass", pass},
                          {"seed", seed},       {"stream", stream}};
  }
};

namespace detail {

inline double ks_scaled_statistic(double d, double n_eff) {
  const double rn = std::sqrt(n_eff);
  if (n_eff >= 1000.0) return rn * d;
  return d * (rn + 0.12 + 0.11 / rn);
}

}  // namespace detail

// One-sample KS against an evaluable cdf.
inline TestReport ks_test(std::vector<double> sample,
                          const std::function<double(double)>& cdf_fn,
                          double alpha = 0.05, std::string name = "ks") {
  if (sample.size() < 20) throw std::invalid_argument("ks_test: need n >= 20");
  if (!cdf_fn) throw std::invalid_argument("ks_test: cdf not evaluable");
  std::sort(sample.begin(), sample.end());
  const double n = static_cast<double>(sample.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const double f = cdf_fn(sample[i]);
    if (std::isnan(f)) throw std::invalid_argument("ks_test: cdf not evaluable");
    d = std::fmax(d, std::fmax((i + 1) / n - f, f - i / n));
  }
  const double p = kolmogorov_sf(detail::ks_scaled_statistic(d, n));
  return TestReport::make(std::move(name), d, p, sample.size(), alpha);
}

// Two-sample KS (asymptotic, effective size nm/(n+m)).
inline TestReport two_sample_ks_test(std::vector<double> a, std::vector<double> b,
                                     double alpha = 0.05,
                                     std::string name = "ks2") {
  if (a.size() < 20 || b.size() < 20)
    throw std::invalid_argument("two_sample_ks_test: need n, m >= 20");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  double d = 0.0;
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i] <= b[j])
      ++i;
    else
      ++j;
    d = std::fmax(d, std::fabs(i / na - j / nb));
  }
  const double n_eff = na * nb / (na + nb);
  const double p = kolmogorov_sf(detail::ks_scaled_statistic(d, n_eff));
  return TestReport::make(std::move(name), d, p, a.size() + b.size(), alpha);
}

// Index-of-dispersion test: (n-1) s^2 / mean against chi-square(n-1),
// two-sided so both under- and over-dispersion reject.
inline TestReport poisson_dispersion_test(const std::vector<std::int64_t>& counts,
                                          double alpha = 0.05,
                                          std::string name = "dispersion") {
  if (counts.size() < 10)
    throw std::invalid_argument("poisson_dispersion_test: need >= 10 counts");
  const double n = static_cast<double>(counts.size());
  double mean = 0.0;
  for (auto c : counts) {
    if (c < 0) throw std::invalid_argument("poisson_dispersion_test: negative count");
    mean += static_cast<double>(c);
  }
  mean /= n;
  if (mean == 0.0) {
    auto r = TestReport::make(std::move(name), 0.0, 1.0, counts.size(), alpha);
    r.note = "inconclusive: all counts zero";
    return r;
  }
  double ss = 0.0;
  for (auto c : counts) {
    const double d = static_cast<double>(c) - mean;
    ss += d * d;
  }
  const double stat = ss / mean;  // (n-1) s^2 / mean
  const double df = n - 1.0;
  const double lower = chi_square_cdf(stat, df);
  const double upper = chi_square_sf(stat, df);
  const double p = std::fmin(1.0, 2.0 * std::fmin(lower, upper));
  return TestReport::make(std::move(name), stat, p, counts.size(), alpha);
}

namespace detail {

inline double abs_pearson(const std::vector<double>& x, const std::vector<double>& y,
                          bool* degenerate = nullptr) {
  const double n = static_cast<double>(x.size());
  double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxx = 0, syy = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx, dy = y[i] - my;
    sxx += dx * dx;
    syy += dy * dy;
    sxy += dx * dy;
  }
  if (sxx <= 0 || syy <= 0) {
    if (degenerate) *degenerate = true;
    return 0.0;
  }
  return std::fabs(sxy / std::sqrt(sxx * syy));
}

}  // namespace detail

// Permutation p-value for the absolute Pearson correlation under n_perm
// random re-pairings.
inline TestReport independence_test(const std::vector<double>& x,
                                    const std::vector<double>& y,
                                    std::size_t n_perm, RngStream& rng,
                                    double alpha = 0.05,
                                    std::string name = "independence") {
  if (x.size() != y.size()) throw std::invalid_argument("independence_test: length mismatch");
  if (x.size() < 50) throw std::invalid_argument("independence_test: need n >= 50");
  if (n_perm < 1) throw std::invalid_argument("independence_test: n_perm >= 1");
  bool degenerate = false;
  const double r_obs = detail::abs_pearson(x, y, &degenerate);
  if (degenerate) {
    auto r = TestReport::make(std::move(name), 0.0, 1.0, x.size(), alpha);
    r.note = "inconclusive: zero variance";
    r.seed = rng.seed();
    r.stream = rng.stream();
    return r;
  }
  std::vector<double> perm = y;
  std::size_t at_least = 0;
  for (std::size_t k = 0; k < n_perm; ++k) {
    for (std::size_t i = perm.size() - 1; i > 0; --i) {
      const auto j = static_cast<std::size_t>(rng.next_uniform() * (i + 1));
      std::swap(perm[i], perm[j]);
    }
    if (detail::abs_pearson(x, perm) >= r_obs - 1e-15) ++at_least;
  }
  const double p = (1.0 + at_least) / (n_perm + 1.0);
  auto r = TestReport::make(std::move(name), r_obs, p, x.size(), alpha);
  r.seed = rng.seed();
  r.stream = rng.stream();
  return r;
}

// Chi-square against fixed (a priori) expectations; df = number of kept bins.
inline TestReport chi_square_test(const std::vector<double>& observed,
                                  const std::vector<double>& expected,
                                  double alpha = 0.05,
                                  std::string name = "chi-square") {
  if (observed.size() != expected.size() || observed.empty())
    throw std::invalid_argument("chi_square_test: size mismatch");
  double stat = 0.0;
  std::size_t df = 0;
  double total = 0.0;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    total += observed[i];
    if (expected[i] <= 1e-12) {
      if (observed[i] > 0) {
        auto r = TestReport::make(std::move(name),
                                  std::numeric_limits<double>::infinity(), 0.0,
                                  static_cast<std::size_t>(total), alpha);
        r.note = "observed mass where none expected";
        return r;
      }
      continue;
    }
    const double d = observed[i] - expected[i];
    stat += d * d / expected[i];
    ++df;
  }
  const double p = df == 0 ? 1.0 : chi_square_sf(stat, static_cast<double>(df));
  return TestReport::make(std::move(name), stat, p, static_cast<std::size_t>(total),
                          alpha);
}

// theta-hat = N / log(hi/lo); unbiased for a rate-theta scale-invariant PPP
// and exactly scale-equivariant.
inline double estimate_rate(const PointSet& ps) {
  if (!(ps.window().hi > ps.window().lo))
    throw std::invalid_argument("estimate_rate: zero-length window");
  if (ps.empty()) return 0.0;
  return static_cast<double>(ps.size()) / ps.window().log_ratio();
}

}  // namespace ssalab
