#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "goursat2d/solvers.hpp"

namespace goursat2d {

struct FdError {
  double eps = 0.0;
  /// ||(g_{v + eps dv} - g_v)/eps - h|| / ||h|| in the classical norm (absolute when h = 0).
  double error = 0.0;
  /// Solver noise level 10 tol / (eps ||h||) below which errors plateau.
  double floor = 0.0;
  bool converged = true;
};

struct SensitivityReport {
  GridField h;
  std::vector<FdError> fd_errors;
  bool monotone = false;
  bool pass = false;

  // Stability part.
  double m = 0.0;
  double dv_classical = 0.0;
  double dv_weighted = 0.0;
  /// ||g1 - g2||, the AC norm of z1 - z2.
  double dg_classical = 0.0;
  double dg_weighted = 0.0;
  /// L2 norm of the state difference z1 - z2 itself.
  double dz_classical = 0.0;
  double dz_weighted = 0.0;
  double ratio_classical = 0.0;
  double ratio_weighted = 0.0;
  double state_ratio_classical = 0.0;
  double state_ratio_weighted = 0.0;
  bool degenerate = false;
  /// (1 - 8B/m)^{-1} for specs affine in z with m > 8B.
  std::optional<double> linear_bound;
  double tolerance = 0.0;
  bool within_bound = true;

  /// False when any inner solve failed to converge.
  bool valid = true;
  std::vector<std::string> invalid_reasons;
};

/// Directional derivative of v -> z_v at a converged solve: h solving
/// F'(z_v) h = dv, returned as its mixed derivative.
GridField frechet_apply(const OperatorContext& ctx, const SolveReport& solved, const GridField& deltav,
                        const SolverConfig& cfg);

/// Smallest eps accepted for a solver tolerance.
double eps_floor(double tol) noexcept;

/// Compares finite-difference quotients of the solution map with frechet_apply.
/// Throws InvalidArgument unless eps_list has >= 3 strictly decreasing entries
/// all >= eps_floor(cfg.tol).
SensitivityReport validate_frechet(const OperatorContext& ctx, const GridField& v, const GridField& deltav,
                                   std::span<const double> eps_list, const SolverConfig& cfg);

/// Ratios ||z1 - z2|| / ||v1 - v2|| for the solutions of F(z) = v1 and F(z) = v2.
SensitivityReport stability_probe(const OperatorContext& ctx, const GridField& v1, const GridField& v2,
                                  const SolverConfig& cfg);

}  // namespace goursat2d
