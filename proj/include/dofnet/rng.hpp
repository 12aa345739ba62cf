// Counter-based deterministic random stream. A draw is a pure function of
// (seed, stream id, counter), so any (seed, stream) pair replays the same
// sequence regardless of call interleaving, and independent Monte Carlo
// trials can each take their own stream id.
#pragma once

#include <cmath>
#include <complex>
#include <cstdint>

namespace dofnet {

class RandomStream {
public:
  RandomStream(uint64_t seed, uint64_t stream_id = 0)
      : seed_(seed), stream_(stream_id), counter_(0) {}

  uint64_t seed() const { return seed_; }
  uint64_t stream_id() const { return stream_; }

  double uniform01() {
    uint64_t u = word(counter_++);
    return (static_cast<double>(u >> 11) + 0.5) * 0x1.0p-53;  // strictly inside (0,1)
  }

  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = uniform01();
    double u2 = uniform01();
    double r = std::sqrt(-2.0 * std::log(u1));
    double a = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

  // independent standard normal real and imaginary parts
  std::complex<double> complex_normal() {
    double re = normal();
    double im = normal();
    return {re, im};
  }

  // nonzero draw; an exactly-zero complex normal has probability zero but
  // floating point can in principle produce it
  std::complex<double> nonzero_complex_normal() {
    std::complex<double> z = complex_normal();
    while (z == std::complex<double>(0.0)) z = complex_normal();
    return z;
  }

private:
  uint64_t seed_, stream_, counter_;
  bool have_spare_ = false;
  double spare_ = 0.0;

  static uint64_t mix(uint64_t x) {
    x ^= x >> 30;
    x *= 0xbf58476d1ce4e5b9ull;
    x ^= x >> 27;
    x *= 0x94d049bb133111ebull;
    x ^= x >> 31;
    return x;
  }
  uint64_t word(uint64_t i) const {
    uint64_t h = mix(seed_ + 0x9e3779b97f4a7c15ull);
    h = mix(h ^ (stream_ + 0xd1b54a32d192ed03ull));
    return mix(h ^ (i + 0x2545f4914f6cdd1dull));
  }
};

}  // namespace dofnet
