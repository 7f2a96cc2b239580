#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>

namespace landscape {

/// splitmix64 step: advances the state and returns a well-mixed 64-bit word.
/// Used as the core generator because its output is fully specified by the
/// seed (no engine-implementation leeway), which keeps every sampled value
/// byte-stable across platforms and runs.
inline std::uint64_t splitmix64_next(std::uint64_t& state) {
  state += 0x9E3779B97F4A7C15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// Derives an independent child seed from a base seed and an index.
/// Sample fleets use `base + index` streams; this helper additionally mixes
/// the pair for contexts that need decorrelated sub-streams.
inline std::uint64_t mix_seed(std::uint64_t base, std::uint64_t index) {
  std::uint64_t s = base ^ (0xD1B54A32D192ED03ULL * (index + 1));
  return splitmix64_next(s);
}

/// Deterministic Gaussian stream: splitmix64 uniforms fed through Box-Muller.
/// A fixed seed reproduces the exact same sequence of doubles.
class GaussianStream {
 public:
  explicit GaussianStream(std::uint64_t seed) : state_(seed) {}

  /// Uniform double in (0, 1] (never exactly 0, so log() is safe).
  double uniform_open0() {
    return (static_cast<double>(splitmix64_next(state_) >> 11) + 1.0) *
           0x1.0p-53;
  }

  /// Uniform double in [0, 1).
  double uniform() {
    return static_cast<double>(splitmix64_next(state_) >> 11) * 0x1.0p-53;
  }

  /// Standard normal draw (Box-Muller, pair-cached).
  double gaussian() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double u1 = uniform_open0();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * M_PI * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

  /// Vector of d i.i.d. standard normal draws.
  Eigen::VectorXd gaussian_vector(int d) {
    Eigen::VectorXd v(d);
    for (int i = 0; i < d; ++i) v[i] = gaussian();
    return v;
  }

 private:
  std::uint64_t state_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace landscape
