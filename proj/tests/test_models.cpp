#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "ssalab/models.hpp"
#include "ssalab/ssa.hpp"
#include "ssalab/stats.hpp"

using namespace ssalab;

namespace {

double beta_cdf_at(double theta, double u) { return cdf(DistSpec::beta_theta1(theta), u); }

}  // namespace

TEST_CASE("gamma chain: base ratio and remainder laws") {
  const double theta = 2.0;
  std::vector<double> r1, t1_over_s1;
  for (int r = 0; r < 8000; ++r) {
    RngStream rng(501, static_cast<std::uint64_t>(r));
    const auto chain = gamma_chain(theta, 1, rng);
    REQUIRE(chain.values[0] == 1.0);
    r1.push_back(chain.values[0] / chain.values[1]);
    t1_over_s1.push_back(chain.values[1] / chain.times[0]);
  }
  REQUIRE(ks_test(r1, [theta](double u) { return beta_cdf_at(theta, u); }, 0.01).pass);
  REQUIRE(ks_test(t1_over_s1,
                  [theta](double x) { return cdf(DistSpec::gamma(theta + 1.0, 1.0), x); }, 0.01)
              .pass);
  RngStream perm(501, 1ull << 32);
  REQUIRE(independence_test(r1, t1_over_s1, 200, perm, 0.01).pass);
}

TEST_CASE("gamma chain: consecutive ratios up to n = 6 are jointly clean") {
  const double theta = 1.0;
  const std::size_t n = 6;
  std::vector<std::vector<double>> ratios(n);
  std::vector<double> last;
  for (int r = 0; r < 6000; ++r) {
    RngStream rng(531, static_cast<std::uint64_t>(r));
    const auto chain = gamma_chain(theta, n, rng);
    for (std::size_t i = 0; i < n; ++i)
      ratios[i].push_back(chain.values[i] / chain.values[i + 1]);
    last.push_back(chain.values[n] / chain.times[n - 1]);
  }
  for (std::size_t i = 0; i < n; ++i) {
    INFO("ratio index " << i);
    REQUIRE(ks_test(ratios[i], [theta](double u) { return beta_cdf_at(theta, u); }, 0.005).pass);
  }
  REQUIRE(ks_test(last,
                  [theta](double x) { return cdf(DistSpec::gamma(theta + 1.0, 1.0), x); }, 0.005)
              .pass);
  int stream = 0;
  for (const auto& [i, j] : std::vector<std::pair<int, int>>{{0, 1}, {2, 5}, {1, 4}}) {
    RngStream perm(531, (1ull << 32) + static_cast<std::uint64_t>(++stream));
    REQUIRE(independence_test(ratios[static_cast<std::size_t>(i)],
                              ratios[static_cast<std::size_t>(j)], 200, perm, 0.005)
                .pass);
  }
}

TEST_CASE("chain and crossing-seeded path agree in law at the first level") {
  const double theta = 1.5;
  const KeyFunction key(theta, DistSpec::exponential(1.0));
  std::vector<double> from_chain, from_path;
  for (int r = 0; r < 5000; ++r) {
    RngStream a(503, static_cast<std::uint64_t>(r));
    RngStream b(504, static_cast<std::uint64_t>(r));
    from_chain.push_back(std::log(gamma_chain(theta, 1, a).values[1]));
    from_path.push_back(std::log(seed_at_level_crossing(1.0, key, b).first.post));
  }
  // the chain is normalized to T0 = 1; the memoryless overshoot makes
  // log T1 match the crossing law's log post-value in distribution
  REQUIRE(two_sample_ks_test(from_chain, from_path, 0.01).pass);
}

TEST_CASE("series representation: exponential fixed point and gamma target") {
  const JumpLaw exp1(DistSpec::exponential(1.0));
  std::vector<double> s1;
  double mean = 0;
  for (int r = 0; r < 10000; ++r) {
    RngStream rng(505, static_cast<std::uint64_t>(r));
    s1.push_back(series_representation_sample(1.0, exp1, 1e-12, rng));
    mean += s1.back();
  }
  mean /= s1.size();
  REQUIRE(ks_test(s1, [](double x) { return -std::expm1(-x); }, 0.01).pass);
  REQUIRE(std::fabs(mean - 1.0) < 4.0 / std::sqrt(10000.0));

  const JumpLaw exp3(DistSpec::exponential(3.0));
  std::vector<double> s2;
  for (int r = 0; r < 6000; ++r) {
    RngStream rng(506, static_cast<std::uint64_t>(r));
    s2.push_back(series_representation_sample(2.0, exp3, 1e-12, rng));
  }
  REQUIRE(ks_test(s2, [](double x) { return cdf(DistSpec::gamma(2.0, 3.0), x); }, 0.01).pass);
}

TEST_CASE("series representation: degenerate jump gives exactly zero") {
  const JumpLaw zero_jump(TabulatedTail({0.0}, {0.0}));
  RngStream rng(507, 0);
  REQUIRE(series_representation_sample(1.5, zero_jump, 1e-12, rng) == 0.0);
}

TEST_CASE("series truncation: halving eps moves the mean below the bias bound") {
  const JumpLaw exp3(DistSpec::exponential(3.0));
  const double eps = 1e-12;
  double m1 = 0, m2 = 0;
  const int n = 4000;
  for (int r = 0; r < n; ++r) {
    RngStream a(508, static_cast<std::uint64_t>(r));
    RngStream b(508, static_cast<std::uint64_t>(r));
    m1 += series_representation_sample(2.0, exp3, eps, a);
    m2 += series_representation_sample(2.0, exp3, eps / 2.0, b);
  }
  REQUIRE(std::fabs(m1 - m2) / n < 1e-10);
}

TEST_CASE("series representation rejects invalid input") {
  RngStream rng(509, 0);
  const JumpLaw exp1(DistSpec::exponential(1.0));
  REQUIRE_THROWS_AS(series_representation_sample(-1.0, exp1, 1e-12, rng),
                    std::invalid_argument);
  REQUIRE_THROWS_AS(series_representation_sample(1.0, exp1, 2.0, rng), std::invalid_argument);
  const JumpLaw heavy(TabulatedTail({0.0, 10.0}, {1.0, 0.5}));
  REQUIRE_THROWS_AS(series_representation_sample(1.0, heavy, 1e-12, rng),
                    std::invalid_argument);
}

TEST_CASE("corner sets: monotone coordinates and beta spacings in both projections") {
  // The first t-ratio straddles the seeding level; its gap is size-biased
  // (a product of two betas), so the beta law holds from the second ratio on.
  const double theta = 1.0;
  std::vector<double> s_ratios, t_ratios, s_gaps, t_gaps;
  for (int r = 0; r < 500; ++r) {
    RngStream rng(510, static_cast<std::uint64_t>(r));
    const auto cs = corner_set(theta, 24, rng);
    REQUIRE(cs.corners.size() == 24);
    for (std::size_t i = 0; i + 1 < cs.corners.size(); ++i) {
      REQUIRE(cs.corners[i + 1].first < cs.corners[i].first);
      REQUIRE(cs.corners[i + 1].second > cs.corners[i].second);
      s_ratios.push_back(cs.corners[i + 1].first / cs.corners[i].first);
      if (i >= 1) t_ratios.push_back(cs.corners[i].second / cs.corners[i + 1].second);
      if (i + 2 < cs.corners.size()) {
        s_gaps.push_back(std::log(cs.corners[i].first / cs.corners[i + 1].first));
        t_gaps.push_back(std::log(cs.corners[i + 2].second / cs.corners[i + 1].second));
      }
    }
  }
  REQUIRE(ks_test(s_ratios, [theta](double u) { return beta_cdf_at(theta, u); }, 0.01).pass);
  REQUIRE(ks_test(t_ratios, [theta](double u) { return beta_cdf_at(theta, u); }, 0.01).pass);
  REQUIRE(two_sample_ks_test(s_gaps, t_gaps, 0.01).pass);
}

TEST_CASE("the ratio straddling the seeding level is a product of two betas") {
  const double theta = 1.0;
  std::vector<double> straddle;
  for (int r = 0; r < 6000; ++r) {
    RngStream rng(525, static_cast<std::uint64_t>(r));
    const auto cs = corner_set(theta, 2, rng);
    straddle.push_back(cs.corners[0].second / cs.corners[1].second);  // T0/T1
  }
  // product of independent beta(1,1)'s: cdf u - u log u
  REQUIRE(ks_test(straddle, [](double u) {
            return u <= 0 ? 0.0 : (u >= 1 ? 1.0 : u - u * std::log(u));
          }).pass);
  // and decidedly not beta(1,1) itself
  REQUIRE_FALSE(ks_test(straddle, [theta](double u) { return beta_cdf_at(theta, u); }).pass);
}

TEST_CASE("corner density: closed form at N = 1 and ordering checks") {
  REQUIRE(corner_density(1.0, {{0.7, 1.3}}) == Catch::Approx(std::exp(-0.7 * 1.3)).epsilon(1e-14));
  const double theta = 2.5;
  const double s = 0.9, t = 1.4;
  const double expected = std::pow(theta, 1.0) / std::tgamma(theta) *
                          std::pow(t * s, theta - 1.0) * std::exp(-s * t);
  REQUIRE(corner_density(theta, {{s, t}}) == Catch::Approx(expected).epsilon(1e-14));

  REQUIRE_THROWS_AS(corner_density(1.0, {}), std::domain_error);
  REQUIRE_THROWS_AS(corner_density(1.0, {{1.0, 1.0}, {2.0, 2.0}}), std::domain_error);
  REQUIRE_THROWS_AS(corner_density(1.0, {{2.0, 2.0}, {1.0, 1.5}}), std::domain_error);
  REQUIRE_THROWS_AS(corner_density(1.0, {{-1.0, 1.0}}), std::domain_error);
}

TEST_CASE("corner density is invariant under the bisectrix swap") {
  RngStream rng(511, 0);
  double max_rel = 0.0;
  for (int c = 0; c < 1000; ++c) {
    const std::size_t n = 1 + static_cast<std::size_t>(rng.next_u64() % 8);
    std::vector<double> ss(n), tt(n);
    for (auto& v : ss) v = 0.1 + 2.9 * rng.next_uniform();
    for (auto& v : tt) v = 0.1 + 2.9 * rng.next_uniform();
    std::sort(ss.begin(), ss.end(), std::greater<>());
    std::sort(tt.begin(), tt.end());
    std::vector<std::pair<double, double>> corners(n), swapped(n);
    for (std::size_t i = 0; i < n; ++i) corners[i] = {ss[i], tt[i]};
    for (std::size_t i = 0; i < n; ++i) swapped[i] = {tt[n - 1 - i], ss[n - 1 - i]};
    const double p1 = corner_density(1.7, corners);
    const double p2 = corner_density(1.7, swapped);
    max_rel = std::fmax(max_rel, std::fabs(p1 - p2) / std::fmax(p1, 1e-300));
  }
  REQUIRE(max_rel <= 1e-12);
}

TEST_CASE("corner pair frequencies match the quadrature of the joint density") {
  // box inside {t1 <= 1 < t2, s1 > s2}; at theta = 1 the density is
  // exp(-s1 t2) and the box probability factorizes
  const double p_box = 0.2 * 0.2 *
                       integrate(
                           [](double s) {
                             return (std::exp(-1.2 * s) - std::exp(-1.6 * s)) / s;
                           },
                           0.8, 1.2, 1e-12);
  const int reps = 200000;
  int hits = 0;
  for (int r = 0; r < reps; ++r) {
    RngStream rng(512, static_cast<std::uint64_t>(r));
    const auto cs = corner_set(1.0, 2, rng);
    const auto& [s1, t1] = cs.corners[0];
    const auto& [s2, t2] = cs.corners[1];
    hits += s1 > 0.8 && s1 <= 1.2 && t1 > 0.4 && t1 <= 0.6 && s2 > 0.3 && s2 <= 0.5 &&
            t2 > 1.2 && t2 <= 1.6;
  }
  const double freq = static_cast<double>(hits) / reps;
  const double se = std::sqrt(p_box * (1 - p_box) / reps);
  REQUIRE(std::fabs(freq - p_box) < 3.0 * se);
}

TEST_CASE("upper hull dominates the path with decreasing slopes") {
  RngStream rng(513, 0);
  std::vector<double> t(400), w(400);
  double level = 0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    t[i] = static_cast<double>(i + 1);
    level += rng.next_normal();
    w[i] = level;
  }
  const auto hull = detail::upper_hull(t, w);
  REQUIRE(hull.front() == 0);
  REQUIRE(hull.back() == t.size() - 1);
  for (std::size_t i = 0; i + 1 < hull.size(); ++i) {
    const std::size_t a = hull[i], b = hull[i + 1];
    const double slope = (w[b] - w[a]) / (t[b] - t[a]);
    for (std::size_t k = a + 1; k < b; ++k)
      REQUIRE(w[a] + slope * (t[k] - t[a]) >= w[k] - 1e-9);
    if (i + 2 < hull.size()) {
      const std::size_t c = hull[i + 2];
      REQUIRE(slope > (w[c] - w[b]) / (t[c] - t[b]));
    }
  }
}

TEST_CASE("concave majorant vertex rate is one half per log-time") {
  REQUIRE_THROWS_AS(
      [&] {
        RngStream rng(514, 0);
        concave_majorant_vertices(512, Window(0.01, 1.0), rng);
      }(),
      std::invalid_argument);

  const Window w(0.01, 1.0);
  const int reps = 150;
  double total = 0;
  for (int r = 0; r < reps; ++r) {
    RngStream rng(515, static_cast<std::uint64_t>(r));
    total += static_cast<double>(concave_majorant_vertices(1 << 15, w, rng).size());
  }
  const double mean = total / reps;
  const double expected = 0.5 * std::log(100.0);  // ~2.303
  REQUIRE(std::fabs(mean - expected) < 0.45);
}

TEST_CASE("vertex-time surrogate key passes the rate-1/2 jump-time test") {
  const KeyFunction key(0.5, DistSpec::gamma(0.5, 0.5));
  std::vector<double> ratios;
  for (int r = 0; r < 80; ++r) {
    RngStream rng(516, static_cast<std::uint64_t>(r));
    const auto path = simulate_above_level(1.0, 101, key, rng);
    for (std::size_t i = 0; i + 1 < path.times.size(); ++i)
      ratios.push_back(path.times[i] / path.times[i + 1]);
  }
  REQUIRE(ks_test(ratios, [](double u) { return beta_cdf_at(0.5, u); }, 0.01).pass);
}

TEST_CASE("extremal process: entrance law and record geometry") {
  const auto spec = ExtremalSpec::gnedenko();
  std::vector<double> entrance, time_ratios, level_ratios;
  for (int r = 0; r < 4000; ++r) {
    RngStream rng(517, static_cast<std::uint64_t>(r));
    const auto path = extremal_process(spec, 1.0, std::nullopt, 8, rng);
    entrance.push_back(path.front().second);
    for (std::size_t i = 0; i + 1 < path.size(); ++i) {
      REQUIRE(path[i + 1].first > path[i].first);
      REQUIRE(path[i + 1].second > path[i].second);
      time_ratios.push_back(path[i].first / path[i + 1].first);
      level_ratios.push_back(path[i].second / path[i + 1].second);
    }
  }
  REQUIRE(ks_test(entrance, [](double y) { return std::exp(-1.0 / y); }, 0.01).pass);
  const auto unif = [](double u) { return u <= 0 ? 0.0 : (u >= 1 ? 1.0 : u); };
  REQUIRE(ks_test(time_ratios, unif, 0.01).pass);
  REQUIRE(ks_test(level_ratios, unif, 0.01).pass);
}

TEST_CASE("extremal process stops at the top of the support") {
  const auto spec = ExtremalSpec::uniform01();
  RngStream rng(518, 0);
  const auto path = extremal_process(spec, 1.0, 1.0, 50, rng);
  REQUIRE(path.size() == 1);  // Q(1) = 0: absorbing immediately
}

TEST_CASE("extremal record times are rate-1 for other continuous base laws") {
  const auto spec = ExtremalSpec::exponential(2.0);
  std::vector<double> time_ratios;
  for (int r = 0; r < 2000; ++r) {
    RngStream rng(519, static_cast<std::uint64_t>(r));
    const auto path = extremal_process(spec, 1.0, std::nullopt, 6, rng);
    for (std::size_t i = 0; i + 1 < path.size(); ++i)
      time_ratios.push_back(path[i].first / path[i + 1].first);
  }
  const auto unif = [](double u) { return u <= 0 ? 0.0 : (u >= 1 ? 1.0 : u); };
  REQUIRE(ks_test(time_ratios, unif, 0.01).pass);
}

TEST_CASE("records: classical case and the theta-boosted frequencies") {
  const int reps = 10000;
  const std::size_t len = 6;

  // theta = 1 reduces to i.i.d. records: E B_n = 1/n
  std::vector<double> hits1(len, 0);
  for (int r = 0; r < reps; ++r) {
    RngStream rng(520, static_cast<std::uint64_t>(r));
    const auto seq = inhomogeneous_records(1.0, len, rng);
    REQUIRE(seq.indicators[0] == 1);
    for (std::size_t i = 0; i < len; ++i) hits1[i] += seq.indicators[i];
  }
  REQUIRE(hits1[0] == reps);
  for (std::size_t i = 1; i < len; ++i) {
    const double p = 1.0 / static_cast<double>(i + 1);
    REQUIRE(std::fabs(hits1[i] / reps - p) < 3.5 * std::sqrt(p * (1 - p) / reps));
  }

  // theta = 2: E B_3 = 0.5 and B_2, B_3 independent
  double b2 = 0, b3 = 0, b23 = 0;
  for (int r = 0; r < reps; ++r) {
    RngStream rng(521, static_cast<std::uint64_t>(r));
    const auto seq = inhomogeneous_records(2.0, 3, rng);
    b2 += seq.indicators[1];
    b3 += seq.indicators[2];
    b23 += seq.indicators[1] && seq.indicators[2];
  }
  REQUIRE(std::fabs(b3 / reps - 0.5) < 3.0 * std::sqrt(0.25 / reps));
  REQUIRE(std::fabs(b2 / reps - 2.0 / 3.0) < 3.0 * std::sqrt(2.0 / 9.0 / reps));
  const double joint = 0.5 * 2.0 / 3.0;
  REQUIRE(std::fabs(b23 / reps - joint) < 3.0 * std::sqrt(joint * (1 - joint) / reps));
}

TEST_CASE("records: maxima bookkeeping and the exponential base smoke case") {
  RngStream rng(522, 0);
  const auto seq = inhomogeneous_records(2.0, 50, rng);
  double m = -1;
  for (std::size_t i = 0; i < seq.draws.size(); ++i) {
    const bool is_record = seq.draws[i] > m;
    REQUIRE(seq.indicators[i] == (is_record ? 1 : 0));
    if (is_record) m = seq.draws[i];
    REQUIRE(seq.maxima[i] == m);
  }

  // record frequencies are distribution-free: exponential base behaves alike
  const auto F = [](double y) { return y <= 0 ? 0.0 : -std::expm1(-y); };
  const auto Finv = [](double p) { return -std::log1p(-p); };
  const int reps = 10000;
  double b3 = 0;
  for (int r = 0; r < reps; ++r) {
    RngStream rr(523, static_cast<std::uint64_t>(r));
    b3 += inhomogeneous_records(2.0, 3, rr, F, Finv).indicators[2];
  }
  REQUIRE(std::fabs(b3 / reps - 0.5) < 3.0 * std::sqrt(0.25 / reps));
}

TEST_CASE("csv shapes for corner sets, record sequences and extremal paths") {
  RngStream rng(524, 0);
  const auto cs = corner_set(1.0, 3, rng);
  REQUIRE(cs.to_csv().rfind("s,t\n", 0) == 0);
  const auto seq = inhomogeneous_records(1.0, 2, rng);
  REQUIRE(seq.to_csv().rfind("n,X,B,M\n", 0) == 0);
  const auto path = extremal_process(ExtremalSpec::gnedenko(), 1.0, std::nullopt, 3, rng);
  const auto csv = extremal_path_to_csv(path);
  REQUIRE(csv.rfind("time,level\n", 0) == 0);
  REQUIRE(std::count(csv.begin(), csv.end(), '\n') == 1 + static_cast<long>(path.size()));
}
