#include "goursat2d/bielecki.hpp"

#include <cmath>
#include <string>

#include "goursat2d/error.hpp"

namespace goursat2d {
namespace {

void require_weight(double m) {
  if (!(m >= 0.0) || !std::isfinite(m)) {
    throw InvalidArgument("invalid weight: m must be a finite nonnegative number, got " +
                          std::to_string(m));
  }
}

}  // namespace

WeightedNorms::WeightedNorms(const Grid& grid, double m) : grid_(grid), m_(m) {
  require_weight(m);
  const int nodes = grid.nodes_per_axis();
  std::vector<double> axis(static_cast<std::size_t>(nodes));
  for (int i = 0; i < nodes; ++i) axis[static_cast<std::size_t>(i)] = std::exp(-m * grid.coord(i));
  kernel_.resize(grid.node_count());
  for (int i = 0; i < nodes; ++i) {
    for (int j = 0; j < nodes; ++j) {
      kernel_[static_cast<std::size_t>(i * nodes + j)] =
          axis[static_cast<std::size_t>(i)] * axis[static_cast<std::size_t>(j)];
    }
  }
}

double WeightedNorms::l2(const GridField& f) const {
  if (!(f.grid() == grid_)) throw ShapeError("weighted norm: field lives on a different grid");
  const int nodes = grid_.nodes_per_axis();
  double sum = 0.0;
  for (int i = 0; i < nodes; ++i) {
    double row = 0.0;
    for (int j = 0; j < nodes; ++j) {
      double sq = 0.0;
      for (double v : f.at(i, j)) sq += v * v;
      row += grid_.trapezoid_weight(j) * kernel(i, j) * sq;
    }
    sum += grid_.trapezoid_weight(i) * row;
  }
  return std::sqrt(sum);
}

double weighted_l2_norm(const GridField& f, double m) { return WeightedNorms(f.grid(), m).l2(f); }

double ac_norm(const GridField& g, double m) { return weighted_l2_norm(g, m); }

double inner_product(const GridField& g1, const GridField& g2) {
  return quad_2d_scalar(pointwise_dot(g1, g2));
}

NormEquivalenceReport check_norm_equivalence(const GridField& g, double m) {
  require_weight(m);
  NormEquivalenceReport r;
  r.m = m;
  r.classical = ac_norm(g, 0.0);
  r.weighted = ac_norm(g, m);
  r.lower = std::exp(-2.0 * m) * r.classical;
  r.tolerance = 1e-12 * r.classical;
  r.pass = r.lower <= r.weighted + r.tolerance && r.weighted <= r.classical + r.tolerance;
  return r;
}

double discretization_tolerance(const Grid& grid, double scale) {
  const double h = grid.spacing();
  return 10.0 * h * h * scale;
}

Lemma31Report verify_lemma31(const GridField& g, double m) {
  if (!(m > 0.0) || !std::isfinite(m)) {
    throw InvalidArgument("invalid weight: the weighted estimates need m > 0, got " +
                          std::to_string(m));
  }
  const StateTriple state = reconstruct_state(g);
  const WeightedNorms norms(g.grid(), m);

  Lemma31Report r;
  r.m = m;
  r.ac_norm = norms.l2(g);
  r.bound = (2.0 / m) * r.ac_norm;
  r.tolerance = discretization_tolerance(g.grid(), ac_norm(g, 0.0));

  const double lhs[4] = {
      norms.l2(state.z),
      norms.l2(cum_integral_2d(magnitude(state.z))),
      norms.l2(cum_integral_2d(magnitude(state.zx))),
      norms.l2(cum_integral_2d(magnitude(state.zy))),
  };
  constexpr std::string_view names[4] = {"z", "w0", "w1", "w2"};
  r.pass = true;
  for (std::size_t k = 0; k < 4; ++k) {
    EstimateCheck& c = r.checks[k];
    c.name = names[k];
    c.lhs = lhs[k];
    c.margin = r.bound - lhs[k];
    c.pass = c.margin >= -r.tolerance;
    r.pass = r.pass && c.pass;
  }
  return r;
}

}  // namespace goursat2d
