#pragma once

// Counter-based pseudo-random streams (Philox4x32-10).
//
// A stream is identified by (seed, stream id). Equal identifiers replay the
// same draw sequence; distinct stream ids give statistically independent
// streams, so replicate-level parallelism never couples sequences. Streams
// are small value types; a stream must not be shared between threads, but
// distinct streams may run concurrently.

#include <array>
#include <cmath>
#include <cstdint>

namespace ssalab {

class RngStream {
 public:
  RngStream() = default;
  RngStream(std::uint64_t seed, std::uint64_t stream)
      : seed_(seed), stream_(stream) {}

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream() const { return stream_; }

  std::uint64_t next_u64() {
    if (pos_ >= 2) refill();
    return out_[pos_++];
  }

  // Uniform on the open interval (0,1); never returns an endpoint.
  double next_uniform() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  double next_exponential() { return -std::log(next_uniform()); }

  double next_normal() {
    if (have_cached_) {
      have_cached_ = false;
      return cached_;
    }
    const double r = std::sqrt(-2.0 * std::log(next_uniform()));
    const double a = 2.0 * 3.14159265358979323846 * next_uniform();
    cached_ = r * std::sin(a);
    have_cached_ = true;
    return r * std::cos(a);
  }

 private:
  void refill() {
    std::array<std::uint32_t, 4> c{
        static_cast<std::uint32_t>(block_),
        static_cast<std::uint32_t>(block_ >> 32),
        static_cast<std::uint32_t>(stream_),
        static_cast<std::uint32_t>(stream_ >> 32)};
    std::uint32_t k0 = static_cast<std::uint32_t>(seed_);
    std::uint32_t k1 = static_cast<std::uint32_t>(seed_ >> 32);
    for (int round = 0; round < 10; ++round) {
      const std::uint64_t p0 = std::uint64_t{0xD2511F53u} * c[0];
      const std::uint64_t p1 = std::uint64_t{0xCD9E8D57u} * c[2];
      c = {static_cast<std::uint32_t>(p1 >> 32) ^ c[1] ^ k0,
           static_cast<std::uint32_t>(p1),
           static_cast<std::uint32_t>(p0 >> 32) ^ c[3] ^ k1,
           static_cast<std::uint32_t>(p0)};
      k0 += 0x9E3779B9u;
      k1 += 0xBB67AE85u;
    }
    out_[0] = c[0] | (std::uint64_t{c[1]} << 32);
    out_[1] = c[2] | (std::uint64_t{c[3]} << 32);
    ++block_;
    pos_ = 0;
  }

  std::uint64_t seed_ = 0;
  std::uint64_t stream_ = 0;
  std::uint64_t block_ = 0;
  std::array<std::uint64_t, 2> out_{};
  int pos_ = 2;
  double cached_ = 0.0;
  bool have_cached_ = false;
};

}  // namespace ssalab
