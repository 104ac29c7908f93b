#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace goursat2d {

/// Uniform tensor mesh on the unit square with N cells per axis.
class Grid {
 public:
  explicit Grid(int cells);

  int cells() const noexcept { return cells_; }
  int nodes_per_axis() const noexcept { return cells_ + 1; }
  std::size_t node_count() const noexcept {
    return static_cast<std::size_t>(nodes_per_axis()) * static_cast<std::size_t>(nodes_per_axis());
  }
  double spacing() const noexcept { return 1.0 / cells_; }
  /// Node coordinate i/N; exact at both ends.
  double coord(int i) const noexcept { return static_cast<double>(i) / cells_; }
  /// Composite trapezoid weight of node i on [0, 1].
  double trapezoid_weight(int i) const noexcept {
    return (i == 0 || i == cells_) ? 0.5 * spacing() : spacing();
  }

  friend bool operator==(const Grid&, const Grid&) = default;

 private:
  int cells_;
};

/// Throws InvalidArgument when cells < 2.
Grid build_grid(int cells);

/// R^n-valued samples at the nodes of a grid, stored node-major with i (the
/// x index) outermost: entry (i, j, k) lives at ((i*(N+1) + j)*n + k).
class GridField {
 public:
  /// Empty placeholder (dimension 0, no values).
  GridField() : grid_(2), dim_(0) {}
  GridField(Grid grid, int dim, double fill = 0.0);

  /// Samples fn(x, y, out) at every node; out has `dim` entries.
  static GridField sample(const Grid& grid, int dim,
                          const std::function<void(double, double, std::span<double>)>& fn);

  const Grid& grid() const noexcept { return grid_; }
  int dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return values_.size(); }

  std::size_t offset(int i, int j) const noexcept {
    return (static_cast<std::size_t>(i) * static_cast<std::size_t>(grid_.nodes_per_axis()) +
            static_cast<std::size_t>(j)) *
           static_cast<std::size_t>(dim_);
  }
  double& operator()(int i, int j, int k = 0) noexcept { return values_[offset(i, j) + k]; }
  double operator()(int i, int j, int k = 0) const noexcept { return values_[offset(i, j) + k]; }
  std::span<double> at(int i, int j) noexcept {
    return {values_.data() + offset(i, j), static_cast<std::size_t>(dim_)};
  }
  std::span<const double> at(int i, int j) const noexcept {
    return {values_.data() + offset(i, j), static_cast<std::size_t>(dim_)};
  }
  std::span<double> values() noexcept { return values_; }
  std::span<const double> values() const noexcept { return values_; }

  bool all_finite() const noexcept;
  /// Largest absolute entry.
  double max_abs() const noexcept;

  GridField& operator+=(const GridField& other);
  GridField& operator-=(const GridField& other);
  GridField& operator*=(double factor) noexcept;
  /// this += factor * other
  GridField& axpy(double factor, const GridField& other);

  friend GridField operator+(GridField a, const GridField& b) { return a += b; }
  friend GridField operator-(GridField a, const GridField& b) { return a -= b; }
  friend GridField operator*(double c, GridField a) { return a *= c; }
  friend bool operator==(const GridField&, const GridField&) = default;

 private:
  Grid grid_;
  int dim_;
  std::vector<double> values_;
};

/// Throws ShapeError unless both fields share grid and dimension.
void require_same_shape(const GridField& a, const GridField& b, const char* context);

/// (z, z_x, z_y) on a common grid.
struct StateTriple {
  GridField z;
  GridField zx;
  GridField zy;
};

/// Result of integrating a field over the unit square.
struct Quadrature {
  std::vector<double> components;
  /// Euclidean combination of the component integrals.
  double total = 0.0;
};

/// Composite 2D trapezoid rule; exact for fields bilinear on each cell.
Quadrature quad_2d(const GridField& f);

/// Composite 2D trapezoid rule for a scalar field.
double quad_2d_scalar(const GridField& f);

/// (Jg)(x_i, y_j): cumulative trapezoid integral over [0, x_i] x [0, y_j],
/// assembled from per-cell 4-corner averages. Row i = 0 and column j = 0 are zero.
GridField cum_integral_2d(const GridField& g);

/// Integral of g(s, y_j) over s in [0, x_i].
GridField cum_integral_x(const GridField& g);

/// Integral of g(x_i, t) over t in [0, y_j].
GridField cum_integral_y(const GridField& g);

/// The state with mixed derivative g and homogeneous Goursat data:
/// z = Jg, z_x = integral of g in y, z_y = integral of g in x.
StateTriple reconstruct_state(const GridField& g);

/// Pointwise Euclidean magnitude |f| as a scalar field.
GridField magnitude(const GridField& f);

/// Pointwise Euclidean inner product of two fields as a scalar field.
GridField pointwise_dot(const GridField& a, const GridField& b);

/// Samples a field of a finer grid at the nodes of `coarse`. The fine cell
/// count must be a multiple of the coarse one.
GridField restrict_to(const GridField& fine, const Grid& coarse);

}  // namespace goursat2d
