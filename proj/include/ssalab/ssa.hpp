#pragma once

// Hold-jump engine for non-decreasing self-similar additive processes with
// finite rate. A process is specified by its key pair (rate theta, generic
// jump law J) with k(x) = theta * P(J > x). The engine seeds a path at a
// level crossing, extends it jump by jump (hold at the current level until
// s' = s / beta with beta ~ beta(theta,1), then jump up by s' * J), and
// extracts ranges, jump times and jump sizes as point sets. Keys with an
// exponential generic jump admit an exact crossing law; all other keys are
// seeded by forward simulation from a tolerance-calibrated start time, with
// total-variation bias bounded by the tolerance.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "ssalab/distributions.hpp"
#include "ssalab/pointproc.hpp"
#include "ssalab/rng.hpp"
#include "ssalab/special.hpp"
#include "ssalab/stats.hpp"

namespace ssalab {

// Piecewise-constant right-continuous tail function: P(J > t) = tail[i] on
// [x[i], x[i+1]), with x.front() == 0. A final tail value > 0 leaves mass at
// +infinity; such a table fails the log-moment check and cannot be sampled.
struct TabulatedTail {
  std::vector<double> x;
  std::vector<double> tail;

  TabulatedTail(std::vector<double> xs, std::vector<double> tails)
      : x(std::move(xs)), tail(std::move(tails)) {
    if (x.empty() || x.size() != tail.size())
      throw std::invalid_argument("TabulatedTail: need matching non-empty vectors");
    if (x.front() != 0.0)
      throw std::invalid_argument("TabulatedTail: first breakpoint must be 0");
    for (std::size_t i = 0; i < x.size(); ++i) {
      if (!(tail[i] >= 0.0) || !(tail[i] <= 1.0))
        throw std::invalid_argument("TabulatedTail: tail values in [0,1]");
      if (i > 0 && (!(x[i] > x[i - 1]) || tail[i] > tail[i - 1]))
        throw std::invalid_argument("TabulatedTail: breakpoints increasing, tail non-increasing");
    }
  }

  double operator()(double t) const {
    if (t < 0.0) return 1.0;
    const auto it = std::upper_bound(x.begin(), x.end(), t);
    return tail[static_cast<std::size_t>(it - x.begin()) - 1];
  }

  bool proper() const { return tail.back() == 0.0; }

  double sample(RngStream& rng) const {
    const double u = rng.next_uniform();
    // J = inf{ t : P(J > t) < u }
    for (std::size_t k = 0; k < tail.size(); ++k)
      if (tail[k] < u) return x[k];
    throw std::domain_error("TabulatedTail: sampling a tail with mass at infinity");
  }

  double mean() const {
    if (!proper()) return std::numeric_limits<double>::infinity();
    double m = 0.0;
    for (std::size_t i = 0; i + 1 < x.size(); ++i) m += tail[i] * (x[i + 1] - x[i]);
    return m;
  }

  // integral_1^inf P(J > t) / t dt, exact for the piecewise-constant tail;
  // +infinity when the tail never reaches zero.
  double log_plus_integral() const {
    if (!proper()) return std::numeric_limits<double>::infinity();
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < x.size(); ++i) {
      const double lo = std::fmax(1.0, x[i]);
      const double hi = std::fmax(1.0, x[i + 1]);
      if (hi > lo) acc += tail[i] * std::log(hi / lo);
    }
    return acc;
  }
};

// Parametric or tabulated generic-jump law.
class JumpLaw {
 public:
  JumpLaw(DistSpec spec) : dist_(spec) {}         // NOLINT: implicit by design
  JumpLaw(TabulatedTail table) : table_(std::move(table)) {}  // NOLINT

  bool parametric() const { return dist_.has_value(); }
  const DistSpec* dist() const { return dist_ ? &*dist_ : nullptr; }
  const TabulatedTail* table() const { return table_ ? &*table_ : nullptr; }

  double sample(RngStream& rng) const {
    return dist_ ? ssalab::sample(*dist_, rng) : table_->sample(rng);
  }

  double tail(double t) const {
    return dist_ ? ssalab::tail(*dist_, t) : (*table_)(t);
  }

  double tail_at_zero() const { return dist_ ? 1.0 : table_->tail.front(); }

  double mean() const { return dist_ ? ssalab::mean(*dist_) : table_->mean(); }

  bool finite_log_moment() const {
    if (dist_) return true;  // all built-in laws have at worst a power tail
    return std::isfinite(table_->log_plus_integral());
  }

  std::string to_string() const {
    if (dist_) return dist_->to_string();
    return "tabulated[" + std::to_string(table_->x.size()) + "]";
  }

 private:
  std::optional<DistSpec> dist_;
  std::optional<TabulatedTail> table_;
};

// Key pair (theta, J) with k(x) = theta * P(J > x); k(0+) = theta requires
// the generic jump to be strictly positive.
struct KeyFunction {
  double theta;
  JumpLaw jump;

  KeyFunction(double theta_, JumpLaw jump_) : theta(theta_), jump(std::move(jump_)) {
    if (!(theta > 0) || !std::isfinite(theta))
      throw std::invalid_argument("KeyFunction: rate must be strictly positive and finite");
    if (jump.tail_at_zero() != 1.0)
      throw std::invalid_argument("KeyFunction: generic jump must satisfy P(J > 0) = 1");
  }

  // Builds a key from tabulated k values: theta = k(0+), jump tail = k/theta.
  static KeyFunction from_key_table(std::vector<double> xs, std::vector<double> ks) {
    if (xs.empty() || xs.size() != ks.size())
      throw std::invalid_argument("KeyFunction: need matching non-empty tables");
    if (xs.front() != 0.0)
      throw std::invalid_argument("KeyFunction: key table must start at x = 0");
    const double theta = ks.front();
    if (!std::isfinite(theta) || !(theta > 0))
      throw std::domain_error("KeyFunction: k(0+) unbounded; infinite-rate keys are unsupported");
    for (double& k : ks) k /= theta;
    return KeyFunction(theta, TabulatedTail(std::move(xs), std::move(ks)));
  }

  double k(double x) const { return theta * jump.tail(x); }

  bool exponential_jump() const {
    return jump.parametric() && jump.dist()->kind == DistKind::kExponential;
  }
};

inline double rate_of(const KeyFunction& key) { return key.theta * key.jump.tail_at_zero(); }

inline bool validate_log_moment(const KeyFunction& key) {
  return key.jump.finite_log_moment();
}

// One hold-jump transition from state (s, t): s' = s/beta, t' = t + s' J.
inline std::pair<double, double> hold_jump_step(double s, double t,
                                                const KeyFunction& key,
                                                RngStream& rng) {
  if (!(s > 0) || !(t >= 0)) throw std::invalid_argument("hold_jump_step: need s > 0, t >= 0");
  const double beta = sample_beta_theta1(key.theta, rng);
  const double s2 = s / beta;
  const double j = key.jump.sample(rng);
  double t2 = t + s2 * j;
  if (t2 <= t) t2 = std::nextafter(t, std::numeric_limits<double>::infinity());
  return {s2, t2};
}

struct LevelCrossing {
  double level = 0;  // the level crossed
  double time = 0;   // S(t), the crossing time
  double pre = 0;    // G = T(S-) <= level
  double post = 0;   // D = T(S) > level
};

// A staircase path segment (S_1..S_n, T_1..T_n) above a level, with the
// pre-crossing value T_0 and a note recording how it was seeded.
struct SsaPath {
  std::vector<double> times;
  std::vector<double> values;
  double pre_level_value = 0;
  double level = 0;
  std::string origin;

  double theta = 0;
  std::string jump_desc;
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;

  void validate() const {
    if (times.size() != values.size()) throw std::logic_error("SsaPath: size mismatch");
    double s_prev = 0.0, t_prev = pre_level_value;
    for (std::size_t i = 0; i < times.size(); ++i) {
      if (!(times[i] > s_prev) || !(values[i] > t_prev))
        throw std::logic_error("SsaPath: times and values must strictly increase");
      s_prev = times[i];
      t_prev = values[i];
    }
  }

  std::string to_csv() const {
    char buf[160];
    std::snprintf(buf, sizeof(buf), "# theta=%.17g jump=%s seed=%llu stream=%llu level=%.17g\n",
                  theta, jump_desc.c_str(), static_cast<unsigned long long>(seed),
                  static_cast<unsigned long long>(stream), level);
    std::string out = buf;
    out += "index,S,T\n";
    std::snprintf(buf, sizeof(buf), "0,,%.17g\n", pre_level_value);
    out += buf;
    for (std::size_t i = 0; i < times.size(); ++i) {
      std::snprintf(buf, sizeof(buf), "%zu,%.17g,%.17g\n", i + 1, times[i], values[i]);
      out += buf;
    }
    return out;
  }
};

// T(1) sampled through the multiplicative series sum_n (prod_{k<=n} beta_k) J_n,
// truncated once the running beta-product drops below trunc_eps.
inline double series_sum(double theta, const JumpLaw& jump, double trunc_eps,
                         RngStream& rng) {
  double prod = 1.0;
  double acc = 0.0;
  for (long n = 0; n < 1000000; ++n) {
    prod *= sample_beta_theta1(theta, rng);
    if (prod < trunc_eps) break;
    acc += prod * jump.sample(rng);
  }
  return acc;
}

namespace detail {

// Start time for forward seeding: small enough that P(T(s0) > tol*level) <= tol.
// Finite-mean jumps use the Markov bound through E T(1) = theta E J; otherwise
// the (1-tol) quantile of T(1) is estimated once from the multiplicative series.
inline double seed_start_time(const KeyFunction& key, double level, double tol,
                              RngStream& rng) {
  const double ej = key.jump.mean();
  if (std::isfinite(ej))
    return std::fmax(1e-280, tol * tol * level / std::fmax(key.theta * ej, 1.0));
  const std::size_t k = std::max<std::size_t>(
      2000, static_cast<std::size_t>(std::llround(20.0 / tol)));
  std::vector<double> draws(k);
  for (auto& d : draws) d = series_sum(key.theta, key.jump, 1e-12, rng);
  const auto q_at = draws.begin() + static_cast<std::ptrdiff_t>(
                                        std::ceil((1.0 - tol) * (k - 1)));
  std::nth_element(draws.begin(), q_at, draws.end());
  return std::fmax(1e-280, tol * level / std::fmax(*q_at, 1e-280));
}

}  // namespace detail

// Seeds a path at the jump over `level`. Exponential-jump keys use the exact
// factorized crossing law; general keys run a forward simulation from a small
// start time, biased by at most tol in total variation.
inline std::pair<LevelCrossing, SsaPath> seed_at_level_crossing(double level,
                                                                const KeyFunction& key,
                                                                RngStream& rng,
                                                                double tol = 1e-3) {
  if (!(level > 0) || !std::isfinite(level))
    throw std::invalid_argument("seed_at_level_crossing: level must be positive");
  if (!(tol > 0) || !(tol < 1))
    throw std::invalid_argument("seed_at_level_crossing: tol in (0,1)");

  LevelCrossing cross;
  cross.level = level;
  std::string origin;

  if (key.exponential_jump()) {
    const double lambda = key.jump.dist()->a;
    const double b = sample_beta_theta1(key.theta, rng);
    const double g = sample_gamma(key.theta, 1.0, rng);
    cross.pre = level * b;
    cross.time = lambda * level / g;
    do {
      cross.post = level + cross.time * rng.next_exponential() / lambda;
    } while (cross.post <= level);
    origin = "exact exponential-jump crossing";
  } else {
    const double s0 = detail::seed_start_time(key, level, tol, rng);
    double s = s0, t = 0.0;
    bool found = false;
    for (long step = 0; step < 100000000; ++step) {
      const auto [s2, t2] = hold_jump_step(s, t, key, rng);
      if (t2 > level) {
        cross.time = s2;
        cross.pre = t;
        cross.post = t2;
        found = true;
        break;
      }
      s = s2;
      t = t2;
    }
    if (!found) throw std::runtime_error("seed_at_level_crossing: no crossing reached");
    char buf[96];
    std::snprintf(buf, sizeof(buf), "forward seed s0=%.3g tol=%.3g", s0, tol);
    origin = buf;
  }

  SsaPath path;
  path.times = {cross.time};
  path.values = {cross.post};
  path.pre_level_value = cross.pre;
  path.level = level;
  path.origin = origin;
  path.theta = key.theta;
  path.jump_desc = key.jump.to_string();
  path.seed = rng.seed();
  path.stream = rng.stream();
  return {cross, std::move(path)};
}

// Seeds at the crossing of `level` and extends by n_jumps - 1 hold-jump steps.
inline SsaPath simulate_above_level(double level, std::size_t n_jumps,
                                    const KeyFunction& key, RngStream& rng,
                                    double tol = 1e-3) {
  if (n_jumps < 1) throw std::invalid_argument("simulate_above_level: n_jumps >= 1");
  auto [cross, path] = seed_at_level_crossing(level, key, rng, tol);
  path.times.reserve(n_jumps);
  path.values.reserve(n_jumps);
  for (std::size_t i = 1; i < n_jumps; ++i) {
    const auto [s2, t2] = hold_jump_step(path.times.back(), path.values.back(), key, rng);
    if (!std::isfinite(s2) || !std::isfinite(t2))
      throw std::overflow_error(
          "simulate_above_level: path left double range; split the run into "
          "replicate segments on separate streams");
    path.times.push_back(s2);
    path.values.push_back(t2);
  }
  return path;
}

inline PointSet range_of(const SsaPath& path) {
  if (path.values.empty()) return PointSet({}, Window(0.0, 0.0));
  return PointSet(path.values, Window(path.pre_level_value, path.values.back()));
}

inline PointSet jump_sizes_of(const SsaPath& path) {
  if (path.values.empty()) return PointSet({}, Window(0.0, 0.0));
  std::vector<double> sizes;
  sizes.reserve(path.values.size());
  double prev = path.pre_level_value;
  for (double v : path.values) {
    sizes.push_back(v - prev);
    prev = v;
  }
  std::sort(sizes.begin(), sizes.end());
  return PointSet(sizes, Window(0.0, sizes.back()));
}

// Atoms (s, w, x) of the three-parameter Poisson field with intensity
// theta s^-1 ds P(sJ in dx) dw, restricted to s in s_window, w in (0, w_max].
struct JumpField {
  struct Atom {
    double s, w, x;
  };
  std::vector<Atom> atoms;
  Window s_window;
  double w_max = 0;

  // T(s, w): total jump mass with time <= s and second parameter <= w.
  double value_at(double s, double w) const {
    double acc = 0.0;
    for (const auto& a : atoms)
      if (a.s <= s && a.w <= w) acc += a.x;
    return acc;
  }

  std::string to_csv() const {
    std::string out = "s,w,x\n";
    char buf[120];
    for (const auto& a : atoms) {
      std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g\n", a.s, a.w, a.x);
      out += buf;
    }
    return out;
  }
};

inline JumpField simulate_two_parameter(const KeyFunction& key, const Window& s_window,
                                        double w_max, RngStream& rng) {
  if (!(w_max >= 0)) throw std::invalid_argument("simulate_two_parameter: w_max >= 0");
  JumpField field;
  field.s_window = s_window;
  field.w_max = w_max;
  if (w_max == 0.0 || s_window.lo == s_window.hi) return field;
  const double span = s_window.log_ratio();
  const long n = sample_poisson(key.theta * w_max * span, rng);
  field.atoms.reserve(static_cast<std::size_t>(n));
  for (long i = 0; i < n; ++i) {
    const double s = s_window.lo * std::exp(rng.next_uniform() * span);
    const double w = rng.next_uniform() * w_max;
    field.atoms.push_back({s, w, s * key.jump.sample(rng)});
  }
  std::sort(field.atoms.begin(), field.atoms.end(),
            [](const JumpField::Atom& a, const JumpField::Atom& b) { return a.s < b.s; });
  return field;
}

// Verifies the size-coordinate projection of the jump field: atoms (s, sJ)
// with s in (0, a] restricted to sizes in (b_lo, b_hi] have intensity
// theta P(J > x/a) / x dx. Observed bin counts over n_fields replicate fields
// are compared by chi-square against that integral.
inline TestReport intensity_projection_check(const KeyFunction& key, double a,
                                             std::size_t n_fields, RngStream& rng,
                                             double b_lo = 0.0, double b_hi = 0.0,
                                             std::size_t n_bins = 8,
                                             double alpha = 0.01) {
  if (!(a > 0)) throw std::invalid_argument("intensity_projection_check: a > 0");
  if (n_fields < 1) throw std::invalid_argument("intensity_projection_check: n_fields >= 1");
  if (b_lo <= 0.0) b_lo = a;
  if (b_hi <= 0.0) b_hi = 2.0 * a;
  if (!(b_hi > b_lo)) throw std::invalid_argument("intensity_projection_check: bad test set");

  // Jump sizes below b_lo cannot come from times below b_lo / x*, where the
  // jump tail beyond x* is negligible.
  double x_star = 1.0;
  while (key.jump.tail(x_star) > 1e-15 && x_star < 1e200) x_star *= 2.0;
  const double s_min = b_lo / x_star;

  std::vector<double> edges(n_bins + 1);
  const double bspan = std::log(b_hi / b_lo);
  for (std::size_t k = 0; k <= n_bins; ++k)
    edges[k] = b_lo * std::exp(bspan * static_cast<double>(k) / n_bins);
  edges[0] = b_lo;
  edges[n_bins] = b_hi;

  std::vector<double> expected(n_bins);
  for (std::size_t k = 0; k < n_bins; ++k)
    expected[k] = static_cast<double>(n_fields) * key.theta *
                  integrate([&](double x) { return key.jump.tail(x / a) / x; },
                            edges[k], edges[k + 1], 1e-12);

  std::vector<double> observed(n_bins, 0.0);
  if (s_min < a) {
    const double span = std::log(a / s_min);
    for (std::size_t f = 0; f < n_fields; ++f) {
      const long n = sample_poisson(key.theta * span, rng);
      for (long i = 0; i < n; ++i) {
        const double s = s_min * std::exp(rng.next_uniform() * span);
        const double x = s * key.jump.sample(rng);
        if (x <= b_lo || x > b_hi) continue;
        const auto it = std::lower_bound(edges.begin() + 1, edges.end(), x);
        auto idx = static_cast<std::size_t>(it - edges.begin()) - 1;
        if (idx >= n_bins) idx = n_bins - 1;
        observed[idx] += 1.0;
      }
    }
  }
  auto report = chi_square_test(observed, expected, alpha, "intensity projection");
  report.seed = rng.seed();
  report.stream = rng.stream();
  return report;
}

}  // namespace ssalab
