#pragma once

// Seeded generation of correlated-Gaussian paired samples with a mean shift
// on the trailing block of features.
//
// Random stream: xoshiro256** seeded through SplitMix64. Normals come from
// the basic Box-Muller transform, one (cos, sin) pair per (subject, feature):
// the first feeds x, the second the mixing noise. Features are generated in
// column order, subjects in row order. Integer arithmetic is portable; the
// doubles depend only on std::log, std::sqrt, std::cos and std::sin.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <string>

#include "pairedtest/error.hpp"
#include "pairedtest/stattypes.hpp"

namespace pairedtest {

inline constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Per-trial seed: SplitMix64 folded over (master, scenario, shift, trial).
/// Independent of which methods run, so adding a method never perturbs data.
inline constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t scenario,
                                           std::uint64_t shift, std::uint64_t trial) noexcept {
  std::uint64_t h = splitmix64(master);
  h = splitmix64(h ^ scenario);
  h = splitmix64(h ^ (shift + 0x1000000ULL));
  h = splitmix64(h ^ (trial + 0x2000000000ULL));
  return h;
}

class Xoshiro256 {
 public:
  explicit Xoshiro256(std::uint64_t seed) noexcept {
    std::uint64_t s = seed;
    for (auto& word : state_) {
      word = splitmix64(s);
      s += 0x9E3779B97F4A7C15ULL;
    }
  }

  std::uint64_t next() noexcept {
    const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  /// Uniform on (0, 1].
  double uniform_open0() noexcept {
    return static_cast<double>((next() >> 11) + 1) * 0x1.0p-53;
  }
  /// Uniform on [0, 1).
  double uniform() noexcept { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  /// Two independent standard normals.
  std::pair<double, double> normal_pair() noexcept {
    const double r = std::sqrt(-2.0 * std::log(uniform_open0()));
    const double angle = 2.0 * std::numbers::pi * uniform();
    return {r * std::cos(angle), r * std::sin(angle)};
  }

 private:
  static constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept {
    return (x << k) | (x >> (64 - k));
  }
  std::uint64_t state_[4]{};
};

struct ScenarioConfig {
  int n = 30;
  int d = 10;
  double std = 1.0;
  double rho = 0.5;
  double shift = 0.0;
  double shifted_fraction = 0.10;
  std::uint64_t seed = 0;

  /// round-half-up of shifted_fraction * d.
  int shifted_dims() const {
    return static_cast<int>(std::floor(shifted_fraction * static_cast<double>(d) + 0.5));
  }

  void validate() const {
    if (n < 2) throw DomainError("scenario n must be >= 2");
    if (d < 1) throw DomainError("scenario d must be >= 1");
    if (!(std > 0.0) || !std::isfinite(std)) throw DomainError("scenario std must be > 0");
    if (!(rho >= -1.0 && rho <= 1.0)) throw DomainError("scenario rho must lie in [-1, 1]");
    if (!(shifted_fraction >= 0.0 && shifted_fraction <= 1.0))
      throw DomainError("scenario shifted_fraction must lie in [0, 1]");
    if (!std::isfinite(shift)) throw DomainError("scenario shift must be finite");
  }
};

/// x ~ N(0, std^2); y = rho x + sqrt(1 - rho^2) e + delta_k with e ~ N(0, std^2)
/// and delta_k = shift on the trailing shifted_dims() features.
inline PairedSample generate_scenario(const ScenarioConfig& cfg) {
  cfg.validate();
  Xoshiro256 rng(cfg.seed);
  Matrix x(cfg.n, cfg.d), y(cfg.n, cfg.d);
  const double mix = std::sqrt(std::max(0.0, 1.0 - cfg.rho * cfg.rho));
  const int first_shifted = cfg.d - cfg.shifted_dims();
  for (int k = 0; k < cfg.d; ++k) {
    const double delta = k >= first_shifted ? cfg.shift : 0.0;
    for (int i = 0; i < cfg.n; ++i) {
      const auto [a, e] = rng.normal_pair();
      const double xv = cfg.std * a;
      x(i, k) = xv;
      y(i, k) = cfg.rho * xv + mix * (cfg.std * e) + delta;
    }
  }
  return PairedSample(std::move(x), std::move(y));
}

}  // namespace pairedtest
