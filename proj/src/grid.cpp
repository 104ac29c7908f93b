#include "goursat2d/grid.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "goursat2d/error.hpp"
#include "goursat2d/parallel.hpp"

namespace goursat2d {

Grid::Grid(int cells) : cells_(cells) {
  if (cells < 2) {
    throw InvalidArgument("invalid resolution: need at least 2 cells per axis, got " +
                          std::to_string(cells));
  }
}

Grid build_grid(int cells) { return Grid(cells); }

GridField::GridField(Grid grid, int dim, double fill)
    : grid_(grid), dim_(dim), values_() {
  if (dim < 1) throw InvalidArgument("state dimension must be positive");
  values_.assign(grid_.node_count() * static_cast<std::size_t>(dim), fill);
}

GridField GridField::sample(const Grid& grid, int dim,
                            const std::function<void(double, double, std::span<double>)>& fn) {
  GridField out(grid, dim);
  const int nodes = grid.nodes_per_axis();
  parallel_for(static_cast<std::size_t>(nodes), [&](std::size_t row) {
    const int i = static_cast<int>(row);
    for (int j = 0; j < nodes; ++j) fn(grid.coord(i), grid.coord(j), out.at(i, j));
  });
  return out;
}

bool GridField::all_finite() const noexcept {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

double GridField::max_abs() const noexcept {
  double m = 0.0;
  for (double v : values_) m = std::max(m, std::abs(v));
  return m;
}

GridField& GridField::operator+=(const GridField& other) {
  require_same_shape(*this, other, "field addition");
  for (std::size_t k = 0; k < values_.size(); ++k) values_[k] += other.values_[k];
  return *this;
}

GridField& GridField::operator-=(const GridField& other) {
  require_same_shape(*this, other, "field subtraction");
  for (std::size_t k = 0; k < values_.size(); ++k) values_[k] -= other.values_[k];
  return *this;
}

GridField& GridField::operator*=(double factor) noexcept {
  for (double& v : values_) v *= factor;
  return *this;
}

GridField& GridField::axpy(double factor, const GridField& other) {
  require_same_shape(*this, other, "field axpy");
  for (std::size_t k = 0; k < values_.size(); ++k) values_[k] += factor * other.values_[k];
  return *this;
}

void require_same_shape(const GridField& a, const GridField& b, const char* context) {
  if (!(a.grid() == b.grid())) {
    throw ShapeError(std::string(context) + ": grids differ (N=" +
                     std::to_string(a.grid().cells()) + " vs N=" +
                     std::to_string(b.grid().cells()) + ")");
  }
  if (a.dim() != b.dim()) {
    throw ShapeError(std::string(context) + ": state dimensions differ (n=" +
                     std::to_string(a.dim()) + " vs n=" + std::to_string(b.dim()) + ")");
  }
}

Quadrature quad_2d(const GridField& f) {
  const Grid& grid = f.grid();
  const int nodes = grid.nodes_per_axis();
  Quadrature q;
  q.components.assign(static_cast<std::size_t>(f.dim()), 0.0);
  for (int k = 0; k < f.dim(); ++k) {
    double sum = 0.0;
    for (int i = 0; i < nodes; ++i) {
      double row = 0.0;
      for (int j = 0; j < nodes; ++j) row += grid.trapezoid_weight(j) * f(i, j, k);
      sum += grid.trapezoid_weight(i) * row;
    }
    q.components[static_cast<std::size_t>(k)] = sum;
  }
  double squares = 0.0;
  for (double c : q.components) squares += c * c;
  q.total = std::sqrt(squares);
  return q;
}

double quad_2d_scalar(const GridField& f) {
  if (f.dim() != 1) throw ShapeError("quad_2d_scalar: expected a scalar field");
  return quad_2d(f).components.front();
}

GridField cum_integral_2d(const GridField& g) {
  const Grid& grid = g.grid();
  const int nodes = grid.nodes_per_axis();
  const int n = g.dim();
  const double quarter_area = 0.25 * grid.spacing() * grid.spacing();
  GridField out(grid, n);
  // Row pass: prefix sums over j of the cells whose upper-right corner is (i, j).
  parallel_for(static_cast<std::size_t>(nodes - 1), [&](std::size_t row) {
    const int i = static_cast<int>(row) + 1;
    for (int k = 0; k < n; ++k) {
      double acc = 0.0;
      for (int j = 1; j < nodes; ++j) {
        acc += quarter_area * (g(i - 1, j - 1, k) + g(i - 1, j, k) + g(i, j - 1, k) + g(i, j, k));
        out(i, j, k) = acc;
      }
    }
  });
  // Column pass: prefix sums over i.
  parallel_for(static_cast<std::size_t>(nodes - 1), [&](std::size_t col) {
    const int j = static_cast<int>(col) + 1;
    for (int k = 0; k < n; ++k) {
      for (int i = 2; i < nodes; ++i) out(i, j, k) += out(i - 1, j, k);
    }
  });
  return out;
}

GridField cum_integral_x(const GridField& g) {
  const Grid& grid = g.grid();
  const int nodes = grid.nodes_per_axis();
  const int n = g.dim();
  const double half_h = 0.5 * grid.spacing();
  GridField out(grid, n);
  parallel_for(static_cast<std::size_t>(nodes), [&](std::size_t col) {
    const int j = static_cast<int>(col);
    for (int k = 0; k < n; ++k) {
      double acc = 0.0;
      for (int i = 1; i < nodes; ++i) {
        acc += half_h * (g(i - 1, j, k) + g(i, j, k));
        out(i, j, k) = acc;
      }
    }
  });
  return out;
}

GridField cum_integral_y(const GridField& g) {
  const Grid& grid = g.grid();
  const int nodes = grid.nodes_per_axis();
  const int n = g.dim();
  const double half_h = 0.5 * grid.spacing();
  GridField out(grid, n);
  parallel_for(static_cast<std::size_t>(nodes), [&](std::size_t row) {
    const int i = static_cast<int>(row);
    for (int k = 0; k < n; ++k) {
      double acc = 0.0;
      for (int j = 1; j < nodes; ++j) {
        acc += half_h * (g(i, j - 1, k) + g(i, j, k));
        out(i, j, k) = acc;
      }
    }
  });
  return out;
}

StateTriple reconstruct_state(const GridField& g) {
  return StateTriple{cum_integral_2d(g), cum_integral_y(g), cum_integral_x(g)};
}

GridField magnitude(const GridField& f) {
  GridField out(f.grid(), 1);
  const int nodes = f.grid().nodes_per_axis();
  for (int i = 0; i < nodes; ++i) {
    for (int j = 0; j < nodes; ++j) {
      double s = 0.0;
      for (double v : f.at(i, j)) s += v * v;
      out(i, j) = std::sqrt(s);
    }
  }
  return out;
}

GridField pointwise_dot(const GridField& a, const GridField& b) {
  require_same_shape(a, b, "pointwise inner product");
  GridField out(a.grid(), 1);
  const int nodes = a.grid().nodes_per_axis();
  for (int i = 0; i < nodes; ++i) {
    for (int j = 0; j < nodes; ++j) {
      double s = 0.0;
      for (int k = 0; k < a.dim(); ++k) s += a(i, j, k) * b(i, j, k);
      out(i, j) = s;
    }
  }
  return out;
}

GridField restrict_to(const GridField& fine, const Grid& coarse) {
  const int fine_cells = fine.grid().cells();
  if (fine_cells % coarse.cells() != 0) {
    throw ShapeError("cannot restrict N=" + std::to_string(fine_cells) + " to N=" +
                     std::to_string(coarse.cells()) + ": incompatible resolutions");
  }
  const int stride = fine_cells / coarse.cells();
  GridField out(coarse, fine.dim());
  const int nodes = coarse.nodes_per_axis();
  for (int i = 0; i < nodes; ++i) {
    for (int j = 0; j < nodes; ++j) {
      const auto src = fine.at(i * stride, j * stride);
      std::copy(src.begin(), src.end(), out.at(i, j).begin());
    }
  }
  return out;
}

}  // namespace goursat2d
