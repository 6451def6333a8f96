#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <span>

namespace flashsim {

/// Reproducible random stream. Per-trajectory streams are derived from a
/// master seed and the trajectory index, so ensemble results do not depend on
/// scheduling.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

  static Rng stream(std::uint64_t master_seed, std::uint64_t index) {
    std::seed_seq seq{static_cast<std::uint32_t>(master_seed), static_cast<std::uint32_t>(master_seed >> 32),
                      static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32),
                      0x666c6173u};
    Rng r;
    r.engine_.seed(seq);
    return r;
  }

  /// Uniform on [0, 1) with 53 random bits; platform independent, unlike
  /// std::uniform_real_distribution.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  /// Uniform on (0, 1].
  double uniform_open0() { return 1.0 - uniform(); }
  double exponential(double mean) { return -mean * std::log(uniform_open0()); }
  double normal() {
    // Box-Muller, one value per call.
    const double u1 = uniform_open0(), u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
  }

  /// Index drawn from unnormalized nonnegative weights by inverse CDF.
  std::size_t discrete(std::span<const double> weights) {
    double total = 0;
    for (double w : weights) total += w;
    double target = uniform() * total;
    for (std::size_t i = 0; i < weights.size(); ++i) {
      target -= weights[i];
      if (target < 0) return i;
    }
    for (std::size_t i = weights.size(); i-- > 0;)
      if (weights[i] > 0) return i;
    return 0;
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace flashsim
