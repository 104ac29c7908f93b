#include "goursat2d/sensitivity.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace goursat2d {

namespace {

SolverConfig inner_config(const SolverConfig& cfg, double m) {
  SolverConfig inner;
  inner.m = cfg.m.value_or(m);
  inner.tol = cfg.inner_tol;
  inner.max_iter = cfg.inner_max_iter;
  inner.probe_samples = cfg.probe_samples;
  return inner;
}

}  // namespace

GridField frechet_apply(const OperatorContext& ctx, const SolveReport& solved, const GridField& deltav,
                        const SolverConfig& cfg) {
  if (!solved.converged) throw InvalidArgument("frechet_apply needs a converged solve");
  return solve_linearized(ctx, solved.state, deltav, inner_config(cfg, solved.m_used)).g;
}

double eps_floor(double tol) noexcept { return 100.0 * tol; }

SensitivityReport validate_frechet(const OperatorContext& ctx, const GridField& v, const GridField& deltav,
                                   std::span<const double> eps_list, const SolverConfig& cfg) {
  if (eps_list.size() < 3) throw InvalidArgument("eps list needs at least 3 entries");
  for (std::size_t k = 0; k < eps_list.size(); ++k) {
    if (!(eps_list[k] > 0.0) || (k > 0 && !(eps_list[k] < eps_list[k - 1]))) {
      throw InvalidArgument("eps list must be positive and strictly decreasing");
    }
    if (eps_list[k] < eps_floor(cfg.tol)) {
      std::ostringstream ss;
      ss << "eps = " << eps_list[k] << " is below the floor 100*tol = " << eps_floor(cfg.tol);
      throw InvalidArgument(ss.str());
    }
  }

  // The quotients divide solver error by eps, so these solves run well below
  // cfg.tol, down to a rounding floor scaled by the data.
  SolverConfig fd = cfg;
  const double rounding = 64.0 * std::numeric_limits<double>::epsilon() * (1.0 + weighted_l2_norm(v, 0.0));
  fd.tol = std::min(cfg.tol, std::max(cfg.tol * eps_list.back() * 1e-2, rounding));
  fd.inner_tol = std::min(cfg.inner_tol, fd.tol);

  SensitivityReport rep;
  SolveReport base;
  try {
    base = solve(ctx, v, fd);
  } catch (const SolveFailure& e) {
    rep.valid = false;
    rep.invalid_reasons.push_back(std::string("base solve failed: ") + e.what());
    for (double eps : eps_list) {
      rep.fd_errors.push_back({eps, std::numeric_limits<double>::quiet_NaN(), 0.0, false});
    }
    return rep;
  }
  rep.m = base.m_used;
  rep.h = frechet_apply(ctx, base, deltav, fd);
  const double h_norm = weighted_l2_norm(rep.h, 0.0);

  SolverConfig perturbed = fd;
  perturbed.initial = base.g;
  for (double eps : eps_list) {
    FdError fe;
    fe.eps = eps;
    fe.floor = h_norm > 0.0 ? 10.0 * fd.tol / (eps * h_norm) : 10.0 * fd.tol / eps;
    GridField ve = v;
    ve.axpy(eps, deltav);
    try {
      GridField q = solve(ctx, ve, perturbed).g;
      q -= base.g;
      q *= 1.0 / eps;
      q -= rep.h;
      const double err = weighted_l2_norm(q, 0.0);
      fe.error = h_norm > 0.0 ? err / h_norm : err;
    } catch (const SolveFailure& e) {
      fe.converged = false;
      fe.error = std::numeric_limits<double>::quiet_NaN();
      rep.valid = false;
      rep.invalid_reasons.push_back("solve at eps = " + std::to_string(eps) + " failed: " + e.what());
    }
    rep.fd_errors.push_back(fe);
  }

  rep.monotone = true;
  double smallest = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < rep.fd_errors.size(); ++k) {
    const FdError& fe = rep.fd_errors[k];
    smallest = std::min(smallest, fe.error);
    if (k > 0 && !(fe.error < rep.fd_errors[k - 1].error) && !(fe.error <= fe.floor)) rep.monotone = false;
  }
  rep.pass = rep.valid && rep.monotone && smallest <= 0.05;
  return rep;
}

SensitivityReport stability_probe(const OperatorContext& ctx, const GridField& v1, const GridField& v2,
                                  const SolverConfig& cfg) {
  SensitivityReport rep;
  SolveReport s1, s2;
  try {
    s1 = solve(ctx, v1, cfg);
    s2 = solve(ctx, v2, cfg);
  } catch (const SolveFailure& e) {
    rep.valid = false;
    rep.invalid_reasons.push_back(e.what());
    return rep;
  }
  rep.m = cfg.m.value_or(std::max(s1.m_used, s2.m_used));
  const WeightedNorms norms(ctx.grid(), rep.m);
  const GridField dv = v1 - v2;
  const GridField dg = s1.g - s2.g;
  const GridField dz = s1.state.z - s2.state.z;
  rep.dv_classical = weighted_l2_norm(dv, 0.0);
  rep.dv_weighted = norms.l2(dv);
  rep.dg_classical = weighted_l2_norm(dg, 0.0);
  rep.dg_weighted = norms.l2(dg);
  rep.dz_classical = weighted_l2_norm(dz, 0.0);
  rep.dz_weighted = norms.l2(dz);
  rep.tolerance = discretization_tolerance(ctx.grid(), rep.dv_classical) + 10.0 * cfg.tol;
  if (rep.dv_classical == 0.0) {
    rep.degenerate = true;
    return rep;
  }
  rep.ratio_classical = rep.dg_classical / rep.dv_classical;
  rep.ratio_weighted = rep.dg_weighted / rep.dv_weighted;
  rep.state_ratio_classical = rep.dz_classical / rep.dv_classical;
  rep.state_ratio_weighted = rep.dz_weighted / rep.dv_weighted;
  const double B = ctx.spec().B;
  if (rep.m > 8.0 * B && is_affine_in_z(ctx.spec())) {
    rep.linear_bound = 1.0 / (1.0 - 8.0 * B / rep.m);
    rep.within_bound = rep.dg_weighted <= *rep.linear_bound * rep.dv_weighted + rep.tolerance;
  }
  return rep;
}

}  // namespace goursat2d
