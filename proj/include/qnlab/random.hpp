#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace qnlab {

/// std::mt19937_64 with 53-bit uniforms and Box–Muller normals, so sequences
/// depend only on the seed and not on the standard library's distributions.
class SeededRng {
 public:
  explicit SeededRng(std::uint64_t seed) : gen_(seed) {}
  explicit SeededRng(std::seed_seq& seq) : gen_(seq) {}

  /// Uniform in [0, 1).
  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1p-53; }

  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double t = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(t);
    has_spare_ = true;
    return r * std::cos(t);
  }

 private:
  std::mt19937_64 gen_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

/// Generator keyed by (seed, index), for draws that are fresh per iteration.
inline SeededRng keyed_rng(std::uint64_t seed, std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
  return SeededRng(seq);
}

}  // namespace qnlab
