#pragma once

#include <cstdint>
#include <random>

#include "goursat2d/grid.hpp"

namespace goursat2d {

/// Default seed recorded in reports when the caller does not provide one.
inline constexpr std::uint64_t kDefaultSeed = 20240917;

/// Seeded generator whose doubles are bit-reproducible across standard
/// libraries (no std distributions involved).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  /// Uniform on [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

 private:
  std::mt19937_64 engine_;
};

/// A smooth random field: a random cosine series of low degree in x and y
/// per component, with amplitude of order `amplitude`.
GridField random_smooth_field(const Grid& grid, int dim, Rng& rng, double amplitude = 1.0);

}  // namespace goursat2d
