// Copyright 2026 The sasbss Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "sasbss/types.hpp"

namespace sasbss {

// All randomness in the library flows through this wrapper so that every
// seeded computation is reproducible bit-for-bit. The transforms below are
// written out explicitly because the std:: distribution objects are
// implementation-defined.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // [0, 1)
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  // (0, 1); never returns an endpoint, safe under log().
  double uniform_open() {
    return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
  }

  double uniform_in(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Box-Muller.
  double normal() {
    const double u = uniform_open();
    const double v = uniform();
    return std::sqrt(-2.0 * std::log(u)) * std::cos(kTwoPi * v);
  }

  // Circular complex Gaussian with E|z|^2 = 1.
  cplx cnormal() {
    const double u = uniform_open();
    const double v = uniform();
    const double r = std::sqrt(-std::log(u));
    return {r * std::cos(kTwoPi * v), r * std::sin(kTwoPi * v)};
  }

  double exponential() { return -std::log(uniform_open()); }

  // Integer in [0, n).
  std::uint64_t below(std::uint64_t n) {
    const auto i = static_cast<std::uint64_t>(uniform() * static_cast<double>(n));
    return i < n ? i : n - 1;
  }

  // Substream derivation (splitmix64 finalizer); used to give independent
  // deterministic streams to frequency bins, restarts and trials.
  static std::uint64_t derive(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

 private:
  static constexpr double kTwoPi = 6.28318530717958647692528676655900577;
  std::mt19937_64 engine_;
};

}  // namespace sasbss
