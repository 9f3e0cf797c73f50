#pragma once

// Scale-invariant Poisson point processes on finite windows, and the point-set
// transformations (spacings, inversion, log-bin counts) the distributional
// tests are built from. PointSet values are immutable after construction.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "ssalab/distributions.hpp"
#include "ssalab/rng.hpp"

namespace ssalab {

// Half-open window (lo, hi]. lo == 0 is permitted so that derived sets
// (spacings, jump sizes) have a home; the log-scale operations require lo > 0.
struct Window {
  double lo = 0.0;
  double hi = 0.0;

  Window() = default;
  Window(double lo_, double hi_) : lo(lo_), hi(hi_) {
    if (!(lo >= 0) || !(hi >= lo) || !std::isfinite(hi))
      throw std::invalid_argument("Window: need 0 <= lo <= hi < inf");
  }

  double log_ratio() const {
    if (!(lo > 0)) throw std::invalid_argument("Window: log scale needs lo > 0");
    return std::log(hi / lo);
  }
};

// A finite simple point set on a declared window: strictly increasing positive
// points, all inside (lo, hi]. Exact duplicates are rejected rather than
// merged; a tie in floating point indicates stream misuse, not a sample.
class PointSet {
 public:
  PointSet() = default;

  PointSet(std::vector<double> pts, Window w) : points_(std::move(pts)), window_(w) {
    for (std::size_t i = 0; i < points_.size(); ++i) {
      const double x = points_[i];
      if (!(x > window_.lo) || !(x <= window_.hi))
        throw std::invalid_argument("PointSet: point outside (lo, hi]");
      if (i > 0 && !(points_[i - 1] < x))
        throw std::invalid_argument(points_[i - 1] == x
                                        ? "PointSet: duplicate point"
                                        : "PointSet: points must be increasing");
    }
  }

  const std::vector<double>& points() const { return points_; }
  const Window& window() const { return window_; }
  std::size_t size() const { return points_.size(); }
  bool empty() const { return points_.empty(); }

  std::string to_csv() const {
    std::string out;
    char buf[40];
    for (double x : points_) {
      std::snprintf(buf, sizeof(buf), "%.17g\n", x);
      out += buf;
    }
    return out;
  }

  nlohmann::json to_json() const {
    return nlohmann::json{{"window", {window_.lo, window_.hi}}, {"points", points_}};
  }

 private:
  std::vector<double> points_;
  Window window_;
};

// N ~ Poisson(theta * log(hi/lo)) points, i.i.d. with density proportional to
// 1/x on (lo, hi] (log-uniform), returned sorted.
inline PointSet sample_scale_invariant_ppp(double theta, const Window& w,
                                           RngStream& rng) {
  if (!(theta > 0)) throw std::invalid_argument("sample_scale_invariant_ppp: theta > 0");
  if (w.lo == w.hi) return PointSet({}, w);
  const double span = w.log_ratio();
  const long n = sample_poisson(theta * span, rng);
  std::vector<double> pts;
  pts.reserve(static_cast<std::size_t>(n));
  for (long i = 0; i < n; ++i) {
    double x = w.lo * std::exp(rng.next_uniform() * span);
    if (x <= w.lo) x = std::nextafter(w.lo, w.hi);
    if (x > w.hi) x = w.hi;
    pts.push_back(x);
  }
  std::sort(pts.begin(), pts.end());
  return PointSet(std::move(pts), w);
}

// Consecutive differences, sorted ascending, on window (0, hi - lo].
inline PointSet spacings(const PointSet& ps) {
  const Window out_w(0.0, ps.window().hi - ps.window().lo);
  if (ps.size() < 2) return PointSet({}, out_w);
  std::vector<double> d;
  d.reserve(ps.size() - 1);
  const auto& x = ps.points();
  for (std::size_t i = 1; i < x.size(); ++i) d.push_back(x[i] - x[i - 1]);
  std::sort(d.begin(), d.end());
  return PointSet(std::move(d), out_w);
}

// Pointwise reciprocal, sorted, on window (1/hi, 1/lo].
inline PointSet invert(const PointSet& ps) {
  double wlo = ps.window().hi > 0 ? 1.0 / ps.window().hi : 0.0;
  const double whi = ps.window().lo > 0 ? 1.0 / ps.window().lo
                                        : std::numeric_limits<double>::max();
  std::vector<double> inv;
  inv.reserve(ps.size());
  for (auto it = ps.points().rbegin(); it != ps.points().rend(); ++it)
    inv.push_back(1.0 / *it);
  if (!inv.empty() && inv.front() <= wlo) wlo = std::nextafter(wlo, 0.0);
  return PointSet(std::move(inv), Window(wlo, whi));
}

// Counts per geometric sub-window; the counts always sum to the point total.
inline std::vector<std::int64_t> counts_in_log_bins(const PointSet& ps,
                                                    std::size_t n_bins) {
  if (n_bins < 1) throw std::invalid_argument("counts_in_log_bins: n_bins >= 1");
  const Window& w = ps.window();
  const double span = w.log_ratio();
  std::vector<double> edges(n_bins + 1);
  edges[0] = w.lo;
  edges[n_bins] = w.hi;
  for (std::size_t k = 1; k < n_bins; ++k)
    edges[k] = w.lo * std::exp(span * static_cast<double>(k) / n_bins);
  std::vector<std::int64_t> counts(n_bins, 0);
  for (double x : ps.points()) {
    const auto it = std::lower_bound(edges.begin() + 1, edges.end(), x);
    auto idx = static_cast<std::size_t>(it - edges.begin()) - 1;
    if (idx >= n_bins) idx = n_bins - 1;
    ++counts[idx];
  }
  return counts;
}

}  // namespace ssalab
