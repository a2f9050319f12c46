#pragma once

#include <cstdint>
#include <random>

namespace hybridloc {

/// Seeded random generator with explicitly implemented transforms, so that
/// streams are reproducible across standard library versions (the stdlib
/// distribution objects are implementation-defined). Not thread-safe; use
/// one Rng per worker.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform01() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  double uniform(double a, double b) { return a + (b - a) * uniform01(); }

  /// Uniform integer in [0, n), n >= 1. Rejection keeps it unbiased.
  int uniform_int(int n);

  /// Standard normal via the Marsaglia polar method (pairs cached).
  double normal();
  double normal(double mu, double sigma) { return mu + sigma * normal(); }

  /// Gamma(shape, 1) for shape >= 1 (Marsaglia-Tsang squeeze).
  double gamma(double shape);

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

/// Mix a base seed with an index (trial number, worker id) into an
/// independent stream seed. splitmix64 finalizer over base ^ golden*index;
/// documented so campaigns can be reproduced piecewise.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index);

}  // namespace hybridloc
