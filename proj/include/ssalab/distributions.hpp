#pragma once

// Seed-deterministic samplers for the laws the constructions require:
// beta(theta,1), gamma, exponential and inverse gamma, plus the beta-gamma
// algebra helper and an exact Poisson counter. Samplers are pure functions of
// (spec, stream state).
//
// beta(theta,1) uses the exact inverse transform U^{1/theta}. Gamma uses the
// Marsaglia-Tsang squeeze for shape >= 1 (exact rejection); shape < 1 goes
// through the boost identity Gamma(s) = Gamma(s+1) * U^{1/s}. Inverse-gamma
// draws are the exact reciprocals of gamma draws from the same stream
// position.

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "ssalab/rng.hpp"
#include "ssalab/special.hpp"

namespace ssalab {

enum class DistKind { kBetaTheta1, kGamma, kExponential, kInverseGamma };

// Canonical text forms: beta1:T, gamma:S,R, exp:R, invgamma:S,R.
struct DistSpec {
  DistKind kind = DistKind::kExponential;
  double a = 1.0;  // theta for beta1, shape for gamma/invgamma, rate for exp
  double b = 0.0;  // rate for gamma/invgamma

  static DistSpec beta_theta1(double theta) {
    require_positive(theta, "beta1 theta");
    return {DistKind::kBetaTheta1, theta, 0.0};
  }
  static DistSpec gamma(double shape, double rate) {
    require_positive(shape, "gamma shape");
    require_positive(rate, "gamma rate");
    return {DistKind::kGamma, shape, rate};
  }
  static DistSpec exponential(double rate) {
    require_positive(rate, "exp rate");
    return {DistKind::kExponential, rate, 0.0};
  }
  static DistSpec inverse_gamma(double shape, double rate) {
    require_positive(shape, "invgamma shape");
    require_positive(rate, "invgamma rate");
    return {DistKind::kInverseGamma, shape, rate};
  }

  static DistSpec parse(const std::string& text);
  std::string to_string() const;

 private:
  static void require_positive(double v, const char* what) {
    if (!(v > 0) || !std::isfinite(v))
      throw std::invalid_argument(std::string(what) + " must be strictly positive");
  }
};

namespace detail {

inline std::string format_param(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g", v);
  return buf;
}

}  // namespace detail

inline DistSpec DistSpec::parse(const std::string& text) {
  const auto colon = text.find(':');
  if (colon == std::string::npos)
    throw std::invalid_argument("DistSpec: expected '<kind>:<params>', got '" + text + "'");
  const std::string kind = text.substr(0, colon);
  const std::string params = text.substr(colon + 1);
  const auto comma = params.find(',');
  const auto parse_num = [&](const std::string& s) {
    std::size_t used = 0;
    double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument("DistSpec: bad number '" + s + "'");
    return v;
  };
  if (kind == "beta1") {
    if (comma != std::string::npos) throw std::invalid_argument("beta1 takes one parameter");
    return beta_theta1(parse_num(params));
  }
  if (kind == "exp") {
    if (comma != std::string::npos) throw std::invalid_argument("exp takes one parameter");
    return exponential(parse_num(params));
  }
  if (kind == "gamma" || kind == "invgamma") {
    if (comma == std::string::npos)
      throw std::invalid_argument(kind + " takes two parameters 'shape,rate'");
    const double shape = parse_num(params.substr(0, comma));
    const double rate = parse_num(params.substr(comma + 1));
    return kind == "gamma" ? gamma(shape, rate) : inverse_gamma(shape, rate);
  }
  throw std::invalid_argument("DistSpec: unknown kind '" + kind + "'");
}

inline std::string DistSpec::to_string() const {
  switch (kind) {
    case DistKind::kBetaTheta1:
      return "beta1:" + detail::format_param(a);
    case DistKind::kExponential:
      return "exp:" + detail::format_param(a);
    case DistKind::kGamma:
      return "gamma:" + detail::format_param(a) + "," + detail::format_param(b);
    case DistKind::kInverseGamma:
      return "invgamma:" + detail::format_param(a) + "," + detail::format_param(b);
  }
  return "?";
}

inline double sample_beta_theta1(double theta, RngStream& rng) {
  return std::pow(rng.next_uniform(), 1.0 / theta);
}

inline double sample_gamma(double shape, double rate, RngStream& rng) {
  if (shape < 1.0) {
    const double g = sample_gamma(shape + 1.0, rate, rng);
    return g * std::pow(rng.next_uniform(), 1.0 / shape);
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x, v;
    do {
      x = rng.next_normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = rng.next_uniform();
    if (u < 1.0 - 0.0331 * x * x * x * x) return d * v / rate;
    if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v / rate;
  }
}

inline double sample(const DistSpec& spec, RngStream& rng) {
  switch (spec.kind) {
    case DistKind::kBetaTheta1:
      return sample_beta_theta1(spec.a, rng);
    case DistKind::kExponential:
      return rng.next_exponential() / spec.a;
    case DistKind::kGamma:
      return sample_gamma(spec.a, spec.b, rng);
    case DistKind::kInverseGamma:
      return 1.0 / sample_gamma(spec.a, spec.b, rng);
  }
  throw std::logic_error("DistSpec: bad kind");
}

inline double cdf(const DistSpec& spec, double x) {
  switch (spec.kind) {
    case DistKind::kBetaTheta1:
      if (x <= 0) return 0.0;
      if (x >= 1) return 1.0;
      return std::pow(x, spec.a);
    case DistKind::kExponential:
      return x <= 0 ? 0.0 : -std::expm1(-spec.a * x);
    case DistKind::kGamma:
      return x <= 0 ? 0.0 : regularized_gamma_p(spec.a, spec.b * x);
    case DistKind::kInverseGamma:
      return x <= 0 ? 0.0 : regularized_gamma_q(spec.a, spec.b / x);
  }
  throw std::logic_error("DistSpec: bad kind");
}

inline double tail(const DistSpec& spec, double x) {
  switch (spec.kind) {
    case DistKind::kBetaTheta1:
      if (x <= 0) return 1.0;
      if (x >= 1) return 0.0;
      return 1.0 - std::pow(x, spec.a);
    case DistKind::kExponential:
      return x <= 0 ? 1.0 : std::exp(-spec.a * x);
    case DistKind::kGamma:
      return x <= 0 ? 1.0 : regularized_gamma_q(spec.a, spec.b * x);
    case DistKind::kInverseGamma:
      return x <= 0 ? 1.0 : regularized_gamma_p(spec.a, spec.b / x);
  }
  throw std::logic_error("DistSpec: bad kind");
}

// Mean of the law; +infinity for inverse gamma with shape <= 1.
inline double mean(const DistSpec& spec) {
  switch (spec.kind) {
    case DistKind::kBetaTheta1:
      return spec.a / (spec.a + 1.0);
    case DistKind::kExponential:
      return 1.0 / spec.a;
    case DistKind::kGamma:
      return spec.a / spec.b;
    case DistKind::kInverseGamma:
      return spec.a > 1.0 ? spec.b / (spec.a - 1.0)
                          : std::numeric_limits<double>::infinity();
  }
  throw std::logic_error("DistSpec: bad kind");
}

// Draws gamma(theta,1) and exp(1) independently; returns
// (gamma/(gamma+eps), gamma+eps) pairs. The first coordinate is beta(theta,1),
// the second gamma(theta+1,1), and the two are independent.
inline std::vector<std::pair<double, double>> beta_gamma_compose(double theta,
                                                                 std::size_t n,
                                                                 RngStream& rng) {
  if (!(theta > 0)) throw std::invalid_argument("beta_gamma_compose: theta > 0");
  if (n < 1) throw std::invalid_argument("beta_gamma_compose: n >= 1");
  std::vector<std::pair<double, double>> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double g = sample_gamma(theta, 1.0, rng);
    const double e = rng.next_exponential();
    out.emplace_back(g / (g + e), g + e);
  }
  return out;
}

// Exact Poisson(mu) draw: sum-of-exponentials for small mu, Hormann's
// transformed rejection (PTRS) for large mu.
inline long sample_poisson(double mu, RngStream& rng) {
  if (!(mu >= 0) || !std::isfinite(mu))
    throw std::invalid_argument("sample_poisson: mean must be finite and >= 0");
  if (mu == 0) return 0;
  if (mu < 60.0) {
    double acc = rng.next_exponential();
    long k = 0;
    while (acc <= mu) {
      acc += rng.next_exponential();
      ++k;
    }
    return k;
  }
  const double b = 0.931 + 2.53 * std::sqrt(mu);
  const double a = -0.059 + 0.02483 * b;
  const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
  const double v_r = 0.9277 - 3.6224 / (b - 2.0);
  const double log_mu = std::log(mu);
  for (;;) {
    const double u = rng.next_uniform() - 0.5;
    const double v = rng.next_uniform();
    const double us = 0.5 - std::fabs(u);
    const double kf = std::floor((2.0 * a / us + b) * u + mu + 0.43);
    if (us >= 0.07 && v <= v_r) return static_cast<long>(kf);
    if (kf < 0 || (us < 0.013 && v > us)) continue;
    if (std::log(v * inv_alpha / (a / (us * us) + b)) <=
        kf * log_mu - mu - std::lgamma(kf + 1.0))
      return static_cast<long>(kf);
  }
}

}  // namespace ssalab
