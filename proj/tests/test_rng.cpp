#include <catch2/catch_amalgamated.hpp>

#include <vector>

#include "ssalab/rng.hpp"
#include "ssalab/special.hpp"

using ssalab::RngStream;

TEST_CASE("known-answer block for the zero key and counter") {
  // philox4x32-10 reference output for an all-zero counter and key
  RngStream r(0, 0);
  REQUIRE(r.next_u64() == 0xe169c58d6627e8d5ull);
  REQUIRE(r.next_u64() == 0x9b00dbd8bc57ac4cull);
}

TEST_CASE("identical (seed, stream) replays the same sequence") {
  RngStream a(42, 7), b(42, 7);
  for (int i = 0; i < 1000; ++i) REQUIRE(a.next_u64() == b.next_u64());
}

TEST_CASE("distinct streams and seeds differ") {
  RngStream a(42, 0), b(42, 1), c(43, 0);
  int same_ab = 0, same_ac = 0;
  for (int i = 0; i < 256; ++i) {
    const auto x = a.next_u64();
    same_ab += x == b.next_u64();
    same_ac += x == c.next_u64();
  }
  REQUIRE(same_ab == 0);
  REQUIRE(same_ac == 0);
}

TEST_CASE("uniform draws live strictly inside (0,1) and look uniform") {
  RngStream rng(1, 0);
  const int n = 10000;
  double d = 0.0;
  std::vector<double> u(n);
  for (auto& v : u) {
    v = rng.next_uniform();
    REQUIRE(v > 0.0);
    REQUIRE(v < 1.0);
  }
  std::sort(u.begin(), u.end());
  for (int i = 0; i < n; ++i) {
    d = std::max(d, std::max((i + 1.0) / n - u[i], u[i] - static_cast<double>(i) / n));
  }
  // asymptotic 0.1% critical value ~ 1.95/sqrt(n)
  REQUIRE(d < 1.95 / std::sqrt(static_cast<double>(n)));
}

TEST_CASE("normal draws match the standard normal cdf") {
  RngStream rng(5, 11);
  const int n = 20000;
  std::vector<double> z(n);
  for (auto& v : z) v = rng.next_normal();
  std::sort(z.begin(), z.end());
  double d = 0.0;
  for (int i = 0; i < n; ++i) {
    const double f = ssalab::normal_cdf(z[i]);
    d = std::max(d, std::max((i + 1.0) / n - f, f - static_cast<double>(i) / n));
  }
  REQUIRE(d < 1.95 / std::sqrt(static_cast<double>(n)));
}

TEST_CASE("copying a stream forks its position deterministically") {
  RngStream a(123, 9);
  a.next_u64();
  RngStream b = a;
  REQUIRE(a.next_u64() == b.next_u64());
}
