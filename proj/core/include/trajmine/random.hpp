#pragma once

#include <cstdint>
#include <random>

namespace trajmine {

/// Seeded generator with platform-independent draws. std::mt19937_64 is fully
/// specified by the standard; the std distributions are not, so the
/// conversions below are done by hand.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  /// Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Uniform in [lo, hi]; returns lo when the range is collapsed.
  double uniform(double lo, double hi) { return lo == hi ? lo : lo + (hi - lo) * uniform(); }

  /// Uniform integer in [lo, hi].
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
    const auto span = static_cast<std::uint64_t>(hi - lo) + 1;
    return lo + static_cast<std::int64_t>(engine_() % span);
  }

  bool bernoulli(double p) { return uniform() < p; }

  /// Standard normal via Box-Muller (one value per call).
  double normal();

  /// N(0, sigma^2) restricted to [-k sigma, k sigma] by rejection.
  double truncated_normal(double sigma, double k = 3.0);

 private:
  std::mt19937_64 engine_;
};

/// Stateless 64-bit mix for deriving sub-seeds.
std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) noexcept;

}  // namespace trajmine
