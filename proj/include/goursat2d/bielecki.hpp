#pragma once

#include <array>
#include <string_view>
#include <vector>

#include "goursat2d/grid.hpp"

namespace goursat2d {

/// Node weights e^{-m(x_i + y_j)} for one (grid, m) pair.
class WeightedNorms {
 public:
  /// Throws InvalidArgument for negative or non-finite m.
  WeightedNorms(const Grid& grid, double m);

  double m() const noexcept { return m_; }
  const Grid& grid() const noexcept { return grid_; }
  double kernel(int i, int j) const noexcept {
    return kernel_[static_cast<std::size_t>(i) * static_cast<std::size_t>(grid_.nodes_per_axis()) +
                   static_cast<std::size_t>(j)];
  }

  /// (integral of e^{-m(x+y)} |f|^2)^{1/2} with the kernel folded into the trapezoid rule.
  double l2(const GridField& f) const;

 private:
  Grid grid_;
  double m_;
  std::vector<double> kernel_;
};

/// Weighted L2 norm of f; m = 0 gives the classical L2 norm.
double weighted_l2_norm(const GridField& f, double m);

/// Bielecki norm of the state whose mixed derivative is g (the weighted L2 norm of g).
double ac_norm(const GridField& g, double m);

/// <z1, z2> = integral of <g1, g2> for states given by their mixed derivatives.
double inner_product(const GridField& g1, const GridField& g2);

struct NormEquivalenceReport {
  double m = 0.0;
  double lower = 0.0;     // e^{-2m} * classical
  double weighted = 0.0;  // Bielecki norm
  double classical = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

/// Evaluates e^{-2m}||z|| <= ||z||_m <= ||z||.
NormEquivalenceReport check_norm_equivalence(const GridField& g, double m);

/// One inequality of the weighted estimates: lhs <= (2/m) ||z||_{AC,m}.
struct EstimateCheck {
  std::string_view name;
  double lhs = 0.0;
  double margin = 0.0;  // bound - lhs
  bool pass = false;
};

struct Lemma31Report {
  double m = 0.0;
  double ac_norm = 0.0;
  double bound = 0.0;  // (2/m) * ac_norm
  double tolerance = 0.0;
  /// z, w0 = J|z|, w1 = J|z_x|, w2 = J|z_y| in that order.
  std::array<EstimateCheck, 4> checks{};
  bool pass = false;
};

/// Slack allowed on discretized inequalities: 10 h^2 times the field scale.
double discretization_tolerance(const Grid& grid, double scale);

/// Checks the four weighted estimates for the state with mixed derivative g.
/// Throws InvalidArgument when m <= 0.
Lemma31Report verify_lemma31(const GridField& g, double m);

}  // namespace goursat2d
