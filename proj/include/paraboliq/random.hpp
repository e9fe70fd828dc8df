#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <span>
#include <vector>

#include "paraboliq/types.hpp"

namespace paraboliq {

inline constexpr const char* kRngAlgorithm = "mt19937_64 per block, seeded by splitmix64(seed, block)";

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

/// Independent sub-stream for (seed, stream). Draws are produced from raw
/// 64-bit words so results do not depend on the standard library's
/// distribution implementations.
class StreamRng {
 public:
  StreamRng(std::uint64_t seed, std::uint64_t stream)
      : engine_(splitmix64(seed ^ splitmix64(stream + 0x632BE59BD9B4E019ull))) {}

  /// Uniform on (0, 1].
  double uniform_open0() { return (static_cast<double>(engine_() >> 11) + 1.0) * 0x1.0p-53; }

  /// Uniform on [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

 private:
  std::mt19937_64 engine_;
};

/// Uniform point in the closed polydisc prod {|z_j| <= radii_j}.
inline std::vector<Complex> uniform_polydisc_point(StreamRng& rng, std::span<const double> radii) {
  std::vector<Complex> z(radii.size());
  for (std::size_t j = 0; j < radii.size(); ++j) {
    const Real rho = static_cast<Real>(radii[j]) * std::sqrt(static_cast<Real>(rng.uniform_open0()));
    const Real theta = 2 * std::numbers::pi_v<Real> * static_cast<Real>(rng.uniform());
    z[j] = std::polar(rho, theta);
  }
  return z;
}

}  // namespace paraboliq
