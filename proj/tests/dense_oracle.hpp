#pragma once

// Dense direct-elimination oracle for the discretized linearized operator.
// Assembles F'(z0) as an explicit matrix from 1D cumulative trapezoid
// matrices and solves with partial-pivoting LU. Independent of the library's
// operator code: only grids, expressions and fields are shared.

#include <Eigen/Dense>

#include <vector>

#include "goursat2d/grid.hpp"
#include "goursat2d/problem.hpp"

namespace oracle {

// Lower-triangular cumulative trapezoid matrix on N+1 nodes with spacing h.
inline Eigen::MatrixXd cumulative_trapezoid(int cells, double h) {
  const int nodes = cells + 1;
  Eigen::MatrixXd T = Eigen::MatrixXd::Zero(nodes, nodes);
  for (int i = 1; i < nodes; ++i) {
    T(i, 0) = 0.5 * h;
    for (int k = 1; k < i; ++k) T(i, k) = h;
    T(i, i) = 0.5 * h;
  }
  return T;
}

struct DenseOperator {
  Eigen::MatrixXd M;        // F'(z0)
  Eigen::VectorXd offset;   // f1(., ., 0) + J f2(., ., 0), i.e. F(0)
};

inline Eigen::VectorXd to_vector(const goursat2d::GridField& f) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(f.values().size()));
  for (std::size_t k = 0; k < f.values().size(); ++k) v(static_cast<Eigen::Index>(k)) = f.values()[k];
  return v;
}

inline goursat2d::GridField to_field(const Eigen::VectorXd& v, const goursat2d::Grid& grid, int n) {
  goursat2d::GridField f(grid, n);
  for (std::size_t k = 0; k < f.values().size(); ++k) f.values()[k] = v(static_cast<Eigen::Index>(k));
  return f;
}

// Unknowns are ordered like GridField storage: ((i*(N+1) + j)*n + c).
inline DenseOperator assemble(const goursat2d::ProblemSpec& spec, const goursat2d::Grid& grid,
                              const goursat2d::GridField& z0) {
  const int n = spec.n;
  const int nodes = grid.nodes_per_axis();
  const Eigen::Index P = static_cast<Eigen::Index>(nodes) * nodes * n;
  const Eigen::MatrixXd T = cumulative_trapezoid(grid.cells(), grid.spacing());
  const Eigen::MatrixXd I_nodes = Eigen::MatrixXd::Identity(nodes, nodes);
  const Eigen::MatrixXd I_n = Eigen::MatrixXd::Identity(n, n);
  auto kron = [](const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
    Eigen::MatrixXd out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index r = 0; r < a.rows(); ++r) {
      for (Eigen::Index c = 0; c < a.cols(); ++c) out.block(r * b.rows(), c * b.cols(), b.rows(), b.cols()) = a(r, c) * b;
    }
    return out;
  };
  // Integration over x acts on the outer index i, over y on j.
  const Eigen::MatrixXd Kx = kron(kron(T, I_nodes), I_n);
  const Eigen::MatrixXd Ky = kron(kron(I_nodes, T), I_n);
  const Eigen::MatrixXd J = Kx * Ky;

  Eigen::MatrixXd C1 = Eigen::MatrixXd::Zero(P, P), C2 = C1, D1 = C1, D2 = C1;
  Eigen::VectorXd f1_0(P), f2_0(P);
  std::vector<double> z(static_cast<std::size_t>(n)), zero(static_cast<std::size_t>(n), 0.0);
  std::vector<double> a(static_cast<std::size_t>(n * n));
  for (int i = 0; i < nodes; ++i) {
    for (int j = 0; j < nodes; ++j) {
      const double x = grid.coord(i);
      const double y = grid.coord(j);
      const Eigen::Index base = (static_cast<Eigen::Index>(i) * nodes + j) * n;
      for (int c = 0; c < n; ++c) z[static_cast<std::size_t>(c)] = z0(i, j, c);
      for (int r = 0; r < n; ++r) {
        const auto d1 = spec.f1[static_cast<std::size_t>(r)].eval_dual(x, y, z);
        const auto d2 = spec.f2[static_cast<std::size_t>(r)].eval_dual(x, y, z);
        for (int c = 0; c < n; ++c) {
          C1(base + r, base + c) = d1.partials[static_cast<std::size_t>(c)];
          C2(base + r, base + c) = d2.partials[static_cast<std::size_t>(c)];
        }
        f1_0(base + r) = spec.f1[static_cast<std::size_t>(r)].eval(x, y, zero);
        f2_0(base + r) = spec.f2[static_cast<std::size_t>(r)].eval(x, y, zero);
      }
      goursat2d::eval_matrix(spec.A1, x, y, a);
      for (int r = 0; r < n; ++r) {
        for (int c = 0; c < n; ++c) D1(base + r, base + c) = a[static_cast<std::size_t>(r * n + c)];
      }
      goursat2d::eval_matrix(spec.A2, x, y, a);
      for (int r = 0; r < n; ++r) {
        for (int c = 0; c < n; ++c) D2(base + r, base + c) = a[static_cast<std::size_t>(r * n + c)];
      }
    }
  }
  DenseOperator op;
  // h = J g, h_x = Ky g, h_y = Kx g.
  op.M = Eigen::MatrixXd::Identity(P, P) + C1 * J + J * (C2 * J + D1 * Ky + D2 * Kx);
  op.offset = f1_0 + J * f2_0;
  return op;
}

// Mixed derivative h_g with F'(z0) h = rhs.
inline goursat2d::GridField solve_linearized(const goursat2d::ProblemSpec& spec, const goursat2d::GridField& z0,
                                             const goursat2d::GridField& rhs) {
  const DenseOperator op = assemble(spec, rhs.grid(), z0);
  return to_field(op.M.partialPivLu().solve(to_vector(rhs)), rhs.grid(), spec.n);
}

// Mixed derivative g with F(z) = v for a spec affine in z.
inline goursat2d::GridField solve_affine(const goursat2d::ProblemSpec& spec, const goursat2d::GridField& v) {
  const DenseOperator op = assemble(spec, v.grid(), goursat2d::GridField(v.grid(), spec.n));
  return to_field(op.M.partialPivLu().solve(to_vector(v) - op.offset), v.grid(), spec.n);
}

}  // namespace oracle
