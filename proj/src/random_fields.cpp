#include "goursat2d/random_fields.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <vector>

namespace goursat2d {

GridField random_smooth_field(const Grid& grid, int dim, Rng& rng, double amplitude) {
  constexpr int kModes = 4;
  std::vector<std::array<double, kModes * kModes>> coeffs(static_cast<std::size_t>(dim));
  for (auto& c : coeffs) {
    for (int p = 0; p < kModes; ++p) {
      for (int q = 0; q < kModes; ++q) {
        c[static_cast<std::size_t>(p * kModes + q)] =
            amplitude * rng.uniform(-1.0, 1.0) / (1.0 + p + q);
      }
    }
  }
  return GridField::sample(grid, dim, [&](double x, double y, std::span<double> out) {
    for (int k = 0; k < dim; ++k) {
      const auto& c = coeffs[static_cast<std::size_t>(k)];
      double s = 0.0;
      for (int p = 0; p < kModes; ++p) {
        const double cx = std::cos(p * std::numbers::pi * x);
        for (int q = 0; q < kModes; ++q) {
          s += c[static_cast<std::size_t>(p * kModes + q)] * cx * std::cos(q * std::numbers::pi * y);
        }
      }
      out[static_cast<std::size_t>(k)] = s;
    }
  });
}

}  // namespace goursat2d
