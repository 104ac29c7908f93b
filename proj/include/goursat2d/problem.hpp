#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "goursat2d/expr.hpp"
#include "goursat2d/grid.hpp"

namespace goursat2d {

/// One expression per state component.
using ExprVector = std::vector<Expr>;

/// n x n expressions of (x, y), row-major.
struct ExprMatrix {
  int n = 0;
  std::vector<Expr> entries;

  const Expr& operator()(int row, int col) const {
    return entries[static_cast<std::size_t>(row * n + col)];
  }
};

/// Right-hand side: absent, expressions of (x, y), or a sampled field.
using Rhs = std::variant<std::monostate, ExprVector, GridField>;

/// Data of the system
///   z_xy + f1(x, y, z) + J(f2(., ., z) + A1 z_x + A2 z_y) = v,
/// with homogeneous Goursat data and growth constants B, b.
struct ProblemSpec {
  int n = 1;
  ExprVector f1;
  ExprVector f2;
  ExprMatrix A1;
  ExprMatrix A2;
  ExprMatrix A1x;
  ExprMatrix A2y;
  double B = 0.0;
  Expr b = Expr::parse("0", 0);
  Rhs v;
  /// Mixed derivative of a manufactured exact solution; empty when absent.
  ExprVector zstar_xy;

  bool has_rhs() const noexcept { return !std::holds_alternative<std::monostate>(v); }
};

/// The zero problem of dimension n (all coefficients vanish, B = 0, b = 0, no rhs).
ProblemSpec zero_problem(int n = 1);

/// Builds a spec from expression strings (rows of matrices flattened row-major).
/// Throws ParseError (with the field name prepended) or SchemaError.
ProblemSpec make_problem(int n, const std::vector<std::string>& f1, const std::vector<std::string>& f2,
                         const std::vector<std::string>& A1, const std::vector<std::string>& A2,
                         const std::vector<std::string>& A1x, const std::vector<std::string>& A2y,
                         double B, const std::string& b);

/// Parses and validates a problem document (JSON). Grid-file right-hand sides
/// are resolved relative to `base_dir`.
ProblemSpec load_problem(std::string_view document, const std::filesystem::path& base_dir = {});
ProblemSpec load_problem_file(const std::filesystem::path& path);

/// Problem document text. Sampled right-hand sides cannot be serialized and
/// are omitted.
std::string serialize_problem(const ProblemSpec& spec);

/// Kernels with bounded growth but unbounded derivatives, n = 1:
///   f1 = w1 (z^3/(1+z^2) + cos z^k),  f2 = w2 (z-1)/(1+z^2) + sin z^l,
/// with polynomial w1, w2, A1, A2. A1x, A2y, B and b are derived from the polynomials.
struct KernelExampleParams {
  int k = 2;
  int l = 2;
  std::string w1 = "1";
  std::string w2 = "1";
  std::string A1 = "0";
  std::string A2 = "0";
};
ProblemSpec make_kernel_example(const KernelExampleParams& params);

void eval_vector(const ExprVector& exprs, double x, double y, std::span<const double> z,
                 std::span<double> out);
/// Writes the n*n entries of m(x, y) row-major into out.
void eval_matrix(const ExprMatrix& m, double x, double y, std::span<double> out);

/// Largest singular value of a small row-major square matrix (power iteration).
double spectral_norm(std::span<const double> matrix, int n);

/// Right-hand side sampled on `grid`. Throws InvalidArgument when the problem has none.
GridField rhs_on(const ProblemSpec& spec, const Grid& grid);

struct RadiusProbe {
  double rho = 0.0;
  double sup_fz1 = 0.0;  // sup of spectral norm of the z-Jacobian of f1 over |z| <= rho
  double sup_fz2 = 0.0;
  double M = 0.0;        // max of the two
};

/// Sampled check of the structural assumptions on a spec.
struct AssumptionReport {
  int samples = 0;
  double B = 0.0;
  // Growth |f^i(x,y,z)| <= B|z| + b(x,y): worst ratio |f^i| / (B|z| + b).
  double growth_ratio_f1 = 0.0;
  double growth_ratio_f2 = 0.0;
  bool growth_pass = true;
  double b_min = 0.0;
  bool b_nonnegative = true;
  // Coefficient bounds |A| <= B (spectral norms).
  double sup_A1 = 0.0;
  double sup_A2 = 0.0;
  double sup_A1x = 0.0;
  double sup_A2y = 0.0;
  bool coefficient_pass = true;
  // Boundedness of f_z on balls.
  std::vector<RadiusProbe> radii;
  // Consistency of A1x with d/dx A1 and A2y with d/dy A2 (centered differences).
  double derivative_residual_A1x = 0.0;
  double derivative_residual_A2y = 0.0;
  bool derivative_pass = true;
  bool kink_flagged = false;
  /// Names of failed conditions, e.g. "(C2) growth".
  std::vector<std::string> failures;
  bool pass = true;

  /// M for the smallest probed radius >= rho, or a negative value if none.
  double M_for(double rho) const;
};

/// Quasi-random probes (Halton sequence, fixed) of the growth, boundedness and
/// differentiability assumptions. Throws InvalidArgument when sample_count < 1,
/// EvalFault with sample coordinates when an expression faults.
AssumptionReport probe_assumptions(const ProblemSpec& spec, int sample_count,
                                   std::span<const double> radii);

/// Sets v := F(z*) with z* given by its mixed derivative, evaluating the
/// operator on a grid 4x finer than `grid` and restricting the result.
ProblemSpec manufacture_problem(const ProblemSpec& base, const Grid& grid, const ExprVector& zstar_xy);

/// True when the z-Jacobians of f1 and f2 agree (to 1e-12 relative) at
/// quasi-random points with |z| <= 10, i.e. the problem is affine in z as far as
/// sampling can tell.
bool is_affine_in_z(const ProblemSpec& spec, int sample_count = 64);

/// Parses mixed-derivative expressions of (x, y) for a manufactured solution.
ExprVector parse_field_exprs(const std::vector<std::string>& sources, int n);

/// Samples expressions of (x, y) on a grid.
GridField sample_exprs(const ExprVector& exprs, const Grid& grid);

}  // namespace goursat2d
