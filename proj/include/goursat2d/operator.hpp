#pragma once

#include <array>
#include <memory>
#include <span>
#include <vector>

#include "goursat2d/bielecki.hpp"
#include "goursat2d/grid.hpp"
#include "goursat2d/problem.hpp"

namespace goursat2d {

/// A spec bound to a grid and a Bielecki weight, with the z-independent
/// coefficient fields (A1, A2, A1x, A2y, b) sampled once.
class OperatorContext {
 public:
  OperatorContext(std::shared_ptr<const ProblemSpec> spec, const Grid& grid, double m = 0.0);
  OperatorContext(const ProblemSpec& spec, const Grid& grid, double m = 0.0);

  const ProblemSpec& spec() const noexcept { return *spec_; }
  std::shared_ptr<const ProblemSpec> spec_ptr() const noexcept { return spec_; }
  const Grid& grid() const noexcept { return grid_; }
  int dim() const noexcept { return spec_->n; }
  double m() const noexcept { return norms_.m(); }
  const WeightedNorms& norms() const noexcept { return norms_; }

  /// Same spec and grid (sharing the coefficient caches) with another weight.
  OperatorContext with_weight(double m) const;

  /// n*n row-major coefficient matrices at node (i, j).
  std::span<const double> A1(int i, int j) const { return coeffs_->A1.at(i, j); }
  std::span<const double> A2(int i, int j) const { return coeffs_->A2.at(i, j); }
  const GridField& A1_field() const noexcept { return coeffs_->A1; }
  const GridField& A2_field() const noexcept { return coeffs_->A2; }
  const GridField& A1x_field() const noexcept { return coeffs_->A1x; }
  const GridField& A2y_field() const noexcept { return coeffs_->A2y; }
  /// The growth majorant b sampled at the nodes.
  const GridField& b_field() const noexcept { return coeffs_->b; }

 private:
  struct Coefficients {
    GridField A1, A2, A1x, A2y, b;
  };
  OperatorContext(std::shared_ptr<const ProblemSpec> spec, const Grid& grid,
                  std::shared_ptr<const Coefficients> coeffs, double m);

  std::shared_ptr<const ProblemSpec> spec_;
  Grid grid_;
  std::shared_ptr<const Coefficients> coeffs_;
  WeightedNorms norms_;
};

/// F(z) for the state with mixed derivative g:
///   g + f1(x, y, z) + J(f2(., ., z) + A1 z_x + A2 z_y).
/// Expression faults are rethrown with node coordinates.
GridField apply_F(const OperatorContext& ctx, const GridField& g);

struct Residual {
  GridField field;
  double classical = 0.0;
  double weighted = 0.0;  // at ctx.m()
};

/// F(z) - v and its classical and weighted L2 norms.
Residual residual(const OperatorContext& ctx, const GridField& g, const GridField& v);

/// Half the squared classical L2 norm of F(z) - v.
double merit(const OperatorContext& ctx, const GridField& g, const GridField& v);
double merit_from(const Residual& r);

/// z-Jacobians of f1 and f2 at every node of a state, as n*n row-major fields.
class Linearization {
 public:
  Linearization(const OperatorContext& ctx, const StateTriple& state);

  const GridField& jacobian_f1() const noexcept { return jf1_; }
  const GridField& jacobian_f2() const noexcept { return jf2_; }
  /// Largest spectral norm of either Jacobian over the nodes.
  double sup_norm() const noexcept { return sup_norm_; }
  /// abs was differentiated at its kink somewhere.
  bool kink() const noexcept { return kink_; }

 private:
  GridField jf1_;
  GridField jf2_;
  double sup_norm_ = 0.0;
  bool kink_ = false;
};

/// F'(z) h for h given by its mixed derivative h_g:
///   h_g + f1_z h + J(f2_z h + A1 h_x + A2 h_y).
GridField apply_Fprime(const OperatorContext& ctx, const StateTriple& z_state, const GridField& h_g);
GridField apply_Fprime(const OperatorContext& ctx, const Linearization& lin, const GridField& h_g);

struct CoercivitySample {
  double lhs = 0.0;    // ||F(z)||_m
  double bound = 0.0;  // (1 - 8B/m) ||z||_m - D
  double margin = 0.0;
  double tolerance = 0.0;
  bool pass = false;
  std::array<double, 3> ray{};  // ||F(t g)||_m for t = 1, 10, 100
  bool ray_increasing = true;
};

struct CoercivityReport {
  double m = 0.0;
  double B = 0.0;
  double D = 0.0;  // 2 ||b||_m
  double factor = 0.0;  // 1 - 8B/m
  std::vector<CoercivitySample> samples;
  bool pass = true;
};

/// Checks ||F(z)||_m >= (1 - 8B/m) ||z||_m - 2||b||_m on each sample and the
/// growth of ||F(t g)||_m along rays. Throws ThresholdError unless m > 8B.
CoercivityReport coercivity_probe(const OperatorContext& ctx, std::span<const GridField> samples,
                                  double m);

}  // namespace goursat2d
