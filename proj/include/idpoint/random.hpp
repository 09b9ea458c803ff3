#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace idpoint {

/// Root seed of an experiment. Replicate streams are derived from it so that
/// results never depend on execution order or worker count.
class Seed {
public:
  constexpr explicit Seed(std::uint64_t value) : value_(value) {}

  constexpr std::uint64_t value() const { return value_; }

  /// Child seed for replicate (or task) `index`.
  Seed derive(std::uint64_t index) const;

  friend constexpr bool operator==(Seed, Seed) = default;

private:
  std::uint64_t value_;
};

/// splitmix64 finalizer; used to decorrelate derived seeds.
std::uint64_t mix64(std::uint64_t x);

/// A seeded random stream. Transforms from raw bits are written out here
/// rather than taken from <random> distributions so that draws are identical
/// across standard library implementations.
class Stream {
public:
  explicit Stream(Seed seed) : engine_(mix64(seed.value())) {}

  std::uint64_t bits() { return engine_(); }

  /// Uniform on (0, 1]; never returns 0 so logs and negative powers are safe.
  double uniform() {
    return static_cast<double>((engine_() >> 11) + 1) * 0x1.0p-53;
  }

  /// Uniform on [0, 1).
  double uniform_closed_open() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  double exponential() { return -std::log(uniform()); }

  double normal();

  /// Poisson variate; inversion for small means, PTRS for large means.
  std::uint64_t poisson(double mean);

  /// Uniform integer in [0, bound).
  std::uint64_t below(std::uint64_t bound);

  /// Exact Pareto on [1, inf): P(Z > x) = x^-alpha.
  double pareto(double alpha) { return std::pow(uniform(), -1.0 / alpha); }

private:
  std::mt19937_64 engine_;
  double spare_normal_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace idpoint
