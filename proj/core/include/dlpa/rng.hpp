#pragma once

#include <complex>
#include <cstdint>
#include <random>

namespace dlpa {

/// Deterministic random source used everywhere seeds matter.
///
/// std::mt19937_64 is fully specified by the standard, but the
/// distribution adaptors are not; every transform here is written out
/// explicitly so that a given seed produces the same stream on every
/// build. All sampling code documents its draw order in terms of these
/// primitives.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform in [0, 1).
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  /// Uniform in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Standard normal via Box-Muller; consumes exactly two draws.
  double normal() {
    const double u1 = 1.0 - uniform();  // (0, 1], keeps the log finite
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * 3.14159265358979323846 * u2);
  }

  /// Circularly symmetric complex Gaussian with E|z|^2 = variance.
  /// Consumes exactly two draws (both Box-Muller branches).
  std::complex<double> circular_gaussian(double variance) {
    const double u1 = 1.0 - uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-std::log(u1) * variance);
    const double phi = 2.0 * 3.14159265358979323846 * u2;
    return {r * std::cos(phi), r * std::sin(phi)};
  }

  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n) {
    // Rejection-free modulo is biased for huge n; all callers use n far
    // below 2^53 where the bias is untestable, but do it properly anyway.
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x = engine_();
    while (x >= limit) x = engine_();
    return x % n;
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace dlpa
