#pragma once

// The named constructions: the exact gamma chain above a level, the
// multiplicative series representation of selfdecomposable marginals, corner
// sets of the time-inverted gamma staircase and their joint density, the
// concave majorant of Brownian motion, extremal processes, and the
// inhomogeneous Bernoulli record coupling.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "ssalab/distributions.hpp"
#include "ssalab/pointproc.hpp"
#include "ssalab/rng.hpp"
#include "ssalab/ssa.hpp"

namespace ssalab {

// Normalized gamma-key chain: T_0 = 1, S_n = (gamma_theta prod beta_i)^-1,
// T_n = T_{n-1} + S_n eps_n, with unit-rate exponential jumps.
struct GammaChain {
  double theta = 1.0;
  double lambda = 1.0;
  std::vector<double> times;   // S_1..S_n
  std::vector<double> values;  // T_0..T_n, values[0] == 1
};

inline GammaChain gamma_chain(double theta, std::size_t n, RngStream& rng) {
  if (!(theta > 0)) throw std::invalid_argument("gamma_chain: theta > 0");
  if (n < 1) throw std::invalid_argument("gamma_chain: n >= 1");
  GammaChain chain;
  chain.theta = theta;
  chain.times.reserve(n);
  chain.values.reserve(n + 1);
  chain.values.push_back(1.0);
  chain.times.push_back(1.0 / sample_gamma(theta, 1.0, rng));
  for (std::size_t i = 1; i <= n; ++i) {
    chain.values.push_back(chain.values.back() + chain.times.back() * rng.next_exponential());
    if (i < n) chain.times.push_back(chain.times.back() / sample_beta_theta1(theta, rng));
  }
  return chain;
}

// One draw of sum_{n>=1} (prod_{k<=n} beta_k) J_n, truncated at the first n
// with the running product below trunc_eps (bias of order trunc_eps * E J).
inline double series_representation_sample(double theta, const JumpLaw& jump,
                                           double trunc_eps, RngStream& rng) {
  if (!(theta > 0)) throw std::invalid_argument("series_representation_sample: theta > 0");
  if (!(trunc_eps > 0) || !(trunc_eps < 1))
    throw std::invalid_argument("series_representation_sample: trunc_eps in (0,1)");
  if (!jump.finite_log_moment())
    throw std::invalid_argument("series_representation_sample: jump needs a finite log+ moment");
  return series_sum(theta, jump, trunc_eps, rng);
}

// Corners of the time-inverted staircase: s strictly decreasing, t strictly
// increasing. The two coordinate projections are the (inverted) jump times
// and the range of the original path.
struct CornerSet {
  std::vector<std::pair<double, double>> corners;

  std::string to_csv() const {
    std::string out = "s,t\n";
    char buf[80];
    for (const auto& [s, t] : corners) {
      std::snprintf(buf, sizeof(buf), "%.17g,%.17g\n", s, t);
      out += buf;
    }
    return out;
  }
};

// n consecutive corners of the time-inverted unit-rate gamma staircase,
// seeded from the exact crossing law at level 1: corner z is
// (1/S_{z+1}, T_z).
inline CornerSet corner_set(double theta, std::size_t n_corners, RngStream& rng) {
  if (!(theta > 0)) throw std::invalid_argument("corner_set: theta > 0");
  if (n_corners < 2) throw std::invalid_argument("corner_set: n_corners >= 2");
  const double t0 = sample_beta_theta1(theta, rng);
  double s = 1.0 / sample_gamma(theta, 1.0, rng);
  double t;
  do {
    t = 1.0 + s * rng.next_exponential();
  } while (t <= 1.0);

  CornerSet cs;
  cs.corners.reserve(n_corners);
  cs.corners.emplace_back(1.0 / s, t0);
  for (std::size_t z = 1; z < n_corners; ++z) {
    const double t_prev = t;
    s /= sample_beta_theta1(theta, rng);
    t += s * rng.next_exponential();
    cs.corners.emplace_back(1.0 / s, t_prev);
  }
  return cs;
}

// Joint density p_N of N consecutive corners (s_1,t_1)..(s_N,t_N), s
// decreasing and t increasing:
//   p_N = theta^N / Gamma(theta) * (t_1 s_N)^(theta-1)
//         * exp( sum_{n<N} s_n t_n - sum_{n<N} s_n t_{n+1} - s_1 t_1 ).
// The value is invariant under (s_1..s_N, t_1..t_N) -> (t_N..t_1, s_N..s_1).
inline double corner_density(double theta,
                             const std::vector<std::pair<double, double>>& corners) {
  if (!(theta > 0)) throw std::invalid_argument("corner_density: theta > 0");
  const std::size_t n = corners.size();
  if (n == 0) throw std::domain_error("corner_density: empty configuration");
  for (std::size_t i = 0; i < n; ++i) {
    if (!(corners[i].first > 0) || !(corners[i].second > 0))
      throw std::domain_error("corner_density: coordinates must be positive");
    if (i > 0 && (!(corners[i].first < corners[i - 1].first) ||
                  !(corners[i].second > corners[i - 1].second)))
      throw std::domain_error("corner_density: need s decreasing, t increasing");
  }
  double expo = -corners.front().first * corners.front().second;
  for (std::size_t i = 0; i + 1 < n; ++i)
    expo += corners[i].first * (corners[i].second - corners[i + 1].second);
  return std::pow(theta, static_cast<double>(n)) / std::tgamma(theta) *
         std::pow(corners.front().second * corners.back().first, theta - 1.0) *
         std::exp(expo);
}

namespace detail {

// Indices of the upper concave hull of (t_i, w_i) with t strictly increasing.
inline std::vector<std::size_t> upper_hull(const std::vector<double>& t,
                                           const std::vector<double>& w) {
  std::vector<std::size_t> h;
  h.reserve(64);
  for (std::size_t i = 0; i < t.size(); ++i) {
    while (h.size() >= 2) {
      const std::size_t o = h[h.size() - 2];
      const std::size_t p = h[h.size() - 1];
      if ((t[p] - t[o]) * (w[i] - w[o]) - (w[p] - w[o]) * (t[i] - t[o]) >= 0.0)
        h.pop_back();
      else
        break;
    }
    h.push_back(i);
  }
  return h;
}

}  // namespace detail

// Vertex times, inside the requested window, of the least concave majorant of
// a Brownian path. The path is simulated on a geometric grid refined below
// the window and extended well past it so the in-window hull is settled by
// the time the horizon is reached.
inline PointSet concave_majorant_vertices(std::size_t grid_n, const Window& w,
                                          RngStream& rng) {
  if (grid_n < 1024) throw std::invalid_argument("concave_majorant_vertices: grid_n >= 2^10");
  if (!(w.lo > 0) || !(w.hi > w.lo))
    throw std::invalid_argument("concave_majorant_vertices: need 0 < lo < hi");

  std::vector<double> ts;
  const auto append_geometric = [&ts](double lo, double hi, std::size_t m) {
    const double span = std::log(hi / lo);
    for (std::size_t k = 1; k <= m; ++k)
      ts.push_back(lo * std::exp(span * static_cast<double>(k) / m));
  };
  // at least 64 grid points per factor of 2 everywhere
  const auto octaves = static_cast<std::size_t>(std::ceil(std::log2(w.hi / w.lo)));
  const std::size_t core_n = std::max(grid_n, 64 * octaves);
  ts.reserve(core_n + core_n / 8 + core_n / 4 + 1100);
  append_geometric(w.lo / 64.0, w.lo, std::max<std::size_t>(384, core_n / 8));
  append_geometric(w.lo, w.hi, core_n);
  append_geometric(w.hi, 1024.0 * w.hi, std::max<std::size_t>(640, core_n / 4));
  ts.erase(std::unique(ts.begin(), ts.end()), ts.end());

  // Brownian path on {0} followed by the grid, anchored at the origin.
  std::vector<double> path_t(ts.size() + 1), path_w(ts.size() + 1);
  path_t[0] = 0.0;
  path_w[0] = 0.0;
  double prev_t = w.lo / 64.0;
  double level = rng.next_normal() * std::sqrt(prev_t);
  for (std::size_t i = 0; i < ts.size(); ++i) {
    level += rng.next_normal() * std::sqrt(ts[i] - prev_t);
    path_t[i + 1] = ts[i];
    path_w[i + 1] = level;
    prev_t = ts[i];
  }

  const auto hull = detail::upper_hull(path_t, path_w);

  // A hull point is a vertex iff the slope change is numerically genuine.
  std::vector<double> vertices;
  for (std::size_t i = 1; i + 1 < hull.size(); ++i) {
    const std::size_t a = hull[i - 1], b = hull[i], c = hull[i + 1];
    const double s_prev = (path_w[b] - path_w[a]) / (path_t[b] - path_t[a]);
    const double s_next = (path_w[c] - path_w[b]) / (path_t[c] - path_t[b]);
    const double scale = std::fmax(std::fabs(s_prev), std::fabs(s_next));
    if (s_prev - s_next > 1e-9 * std::fmax(scale, 1e-300) && path_t[b] > w.lo &&
        path_t[b] <= w.hi)
      vertices.push_back(path_t[b]);
  }
  return PointSet(std::move(vertices), w);
}

// Extremal process specification: a continuous cdf F with its quantile
// function, and the rate pair Q = -log F, Q^{-1} supplied in closed form so
// holds and jumps do not lose precision near the top of the support.
struct ExtremalSpec {
  std::string name;
  std::function<double(double)> cdf;
  std::function<double(double)> quantile;
  std::function<double(double)> rate;
  std::function<double(double)> rate_inv;

  static ExtremalSpec gnedenko() {
    return {"gnedenko",
            [](double y) { return y <= 0 ? 0.0 : std::exp(-1.0 / y); },
            [](double p) { return -1.0 / std::log(p); },
            [](double x) { return 1.0 / x; },
            [](double q) { return 1.0 / q; }};
  }

  static ExtremalSpec uniform01() {
    return {"uniform01",
            [](double y) { return std::fmin(1.0, std::fmax(0.0, y)); },
            [](double p) { return p; },
            [](double x) { return -std::log(x); },
            [](double q) { return std::exp(-q); }};
  }

  static ExtremalSpec exponential(double lambda) {
    return {"exponential",
            [lambda](double y) { return y <= 0 ? 0.0 : -std::expm1(-lambda * y); },
            [lambda](double p) { return -std::log1p(-p) / lambda; },
            [lambda](double x) { return -std::log(-std::expm1(-lambda * x)); },
            [lambda](double q) { return -std::log1p(-std::exp(-q)) / lambda; }};
  }
};

// Hold-jump simulation of the extremal process: hold at level x for an
// exponential time with rate Q(x), jump to L with P(L > b) = Q(b)/Q(x).
// Entrance at start_time via the cdf power F^t when no start level is given.
// Returns (time, level) states starting with the entrance state; stops early
// at the top of the support (Q below 1e-300).
inline std::vector<std::pair<double, double>> extremal_process(
    const ExtremalSpec& spec, double start_time, std::optional<double> start_level,
    std::size_t n_jumps, RngStream& rng) {
  if (!(start_time > 0)) throw std::invalid_argument("extremal_process: start_time > 0");
  if (n_jumps < 1) throw std::invalid_argument("extremal_process: n_jumps >= 1");
  double t = start_time;
  double x = start_level ? *start_level
                         : spec.quantile(std::pow(rng.next_uniform(), 1.0 / start_time));
  std::vector<std::pair<double, double>> out;
  out.reserve(n_jumps + 1);
  out.emplace_back(t, x);
  for (std::size_t k = 0; k < n_jumps; ++k) {
    const double q = spec.rate(x);
    if (!(q > 1e-300)) break;  // absorbing at the top of the support
    t += rng.next_exponential() / q;
    double xn = spec.rate_inv(rng.next_uniform() * q);
    if (xn <= x) xn = std::nextafter(x, std::numeric_limits<double>::infinity());
    x = xn;
    out.emplace_back(t, x);
  }
  return out;
}

inline std::string extremal_path_to_csv(
    const std::vector<std::pair<double, double>>& path) {
  std::string out = "time,level\n";
  char buf[80];
  for (const auto& [t, x] : path) {
    std::snprintf(buf, sizeof(buf), "%.17g,%.17g\n", t, x);
    out += buf;
  }
  return out;
}

// Inhomogeneous Markov sequence whose maximum indicators are independent
// Bernoulli(theta / (theta + n - 1)). Given the running maximum at x, the
// next draw is, with probability 1 - F(x), a new record whose conditional
// upper-tail survival is boosted to the power theta, and otherwise a draw
// from F restricted below x. The base law defaults to Uniform(0,1).
struct RecordSequence {
  double theta = 1.0;
  std::vector<double> draws;    // X_n
  std::vector<int> indicators;  // B_n
  std::vector<double> maxima;   // M_n

  std::string to_csv() const {
    std::string out = "n,X,B,M\n";
    char buf[100];
    for (std::size_t i = 0; i < draws.size(); ++i) {
      std::snprintf(buf, sizeof(buf), "%zu,%.17g,%d,%.17g\n", i + 1, draws[i],
                    indicators[i], maxima[i]);
      out += buf;
    }
    return out;
  }
};

inline RecordSequence inhomogeneous_records(
    double theta, std::size_t n, RngStream& rng,
    const std::function<double(double)>& cdf = {},
    const std::function<double(double)>& quantile = {}) {
  if (!(theta > 0)) throw std::invalid_argument("inhomogeneous_records: theta > 0");
  if (n < 1) throw std::invalid_argument("inhomogeneous_records: n >= 1");
  const auto F = cdf ? cdf : [](double y) { return y; };
  const auto Finv = quantile ? quantile : [](double p) { return p; };

  RecordSequence seq;
  seq.theta = theta;
  seq.draws.reserve(n);
  seq.indicators.reserve(n);
  seq.maxima.reserve(n);

  double x = Finv(1.0 - sample_beta_theta1(theta, rng));
  double m = x;
  seq.draws.push_back(x);
  seq.indicators.push_back(1);
  seq.maxima.push_back(m);

  for (std::size_t k = 1; k < n; ++k) {
    const double fm = F(m);
    if (rng.next_uniform() < 1.0 - fm) {
      x = Finv(1.0 - (1.0 - fm) * sample_beta_theta1(theta, rng));
    } else {
      x = Finv(rng.next_uniform() * fm);
    }
    const bool record = x > m;
    seq.draws.push_back(x);
    seq.indicators.push_back(record ? 1 : 0);
    if (record) m = x;
    seq.maxima.push_back(m);
  }
  return seq;
}

}  // namespace ssalab
