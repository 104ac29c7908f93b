#include "goursat2d/solvers.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace goursat2d {

namespace {

std::string fmt(double value) {
  std::ostringstream ss;
  ss.precision(6);
  ss << value;
  return ss.str();
}

void check_rhs(const OperatorContext& ctx, const GridField& v) {
  if (!(v.grid() == ctx.grid()) || v.dim() != ctx.dim()) {
    throw ShapeError("right-hand side does not match the grid or the state dimension");
  }
}

struct ResolvedWeight {
  double m = 0.0;
  WeightChoice choice;
  std::vector<std::string> warnings;
};

ResolvedWeight resolve_weight(const ProblemSpec& spec, const StateTriple& z, const SolverConfig& cfg,
                              bool linear) {
  ResolvedWeight w;
  w.choice = auto_weight(spec, &z, cfg.probe_samples);
  w.m = cfg.m.value_or(w.choice.m);
  if (cfg.m) {
    const double lin_threshold = 2.0 * std::sqrt(w.choice.d);
    if (!(w.m > lin_threshold)) {
      w.warnings.push_back("m = " + fmt(w.m) + " does not exceed 2*sqrt(d) = " + fmt(lin_threshold) +
                           " (d = " + fmt(w.choice.d) + "); contraction of the linear iteration is not guaranteed");
    }
    if (!linear && !(w.m > 8.0 * spec.B)) {
      w.warnings.push_back("m = " + fmt(w.m) + " does not exceed 8B = " + fmt(8.0 * spec.B) +
                           "; coercivity bound does not apply");
    }
  }
  return w;
}

SolveReport start_report(const ResolvedWeight& w) {
  SolveReport rep;
  rep.m_used = w.m;
  rep.warnings = w.warnings;
  rep.weight = w.choice;
  return rep;
}

[[noreturn]] void fail(SolveFailure::Kind kind, const std::string& what, SolveReport rep) {
  rep.state = reconstruct_state(rep.g);
  throw SolveFailure(kind, what, std::make_shared<const SolveReport>(std::move(rep)));
}

double sup_state(const StateTriple* state) {
  return state ? magnitude(state->z).max_abs() : 0.0;
}

}  // namespace

std::string_view method_name(Method method) noexcept {
  return method == Method::picard ? "picard" : "newton";
}

Method parse_method(std::string_view name) {
  if (name == "picard") return Method::picard;
  if (name == "newton") return Method::newton;
  throw InvalidArgument("unknown method '" + std::string(name) + "' (expected picard or newton)");
}

void SolverConfig::validate() const {
  if (m && !(*m > 0.0 && std::isfinite(*m))) throw InvalidArgument("m must be a positive finite number");
  if (!(tol > 0.0)) throw InvalidArgument("tol must be > 0");
  if (max_iter < 1) throw InvalidArgument("max_iter must be >= 1");
  if (!(inner_tol > 0.0)) throw InvalidArgument("inner_tol must be > 0");
  if (inner_max_iter < 1) throw InvalidArgument("inner_max_iter must be >= 1");
  if (!(damping > 0.0 && damping <= 1.0)) throw InvalidArgument("damping must lie in (0, 1]");
  if (probe_samples < 1) throw InvalidArgument("probe_samples must be >= 1");
}

SolveFailure::SolveFailure(Kind kind, const std::string& what, std::shared_ptr<const SolveReport> report)
    : Error(what), kind_(kind), report_(std::move(report)) {}

std::string_view failure_kind_name(SolveFailure::Kind kind) noexcept {
  switch (kind) {
    case SolveFailure::Kind::divergence: return "divergence";
    case SolveFailure::Kind::no_convergence: return "no_convergence";
    case SolveFailure::Kind::stagnation: return "stagnation";
  }
  return "unknown";
}

WeightChoice choose_weight(const ProblemSpec& spec, const AssumptionReport* report, double rho) {
  if (report == nullptr) {
    throw InvalidArgument("no assumption report: probe the problem before choosing the weight");
  }
  const double M = report->M_for(rho);
  if (M < 0.0) {
    throw InvalidArgument("assumption report does not cover radius " + fmt(rho) +
                          ": probe the problem on a larger ball first");
  }
  WeightChoice w;
  w.B = spec.B;
  w.rho = rho;
  w.M_rho = M;
  w.d = std::max(M, spec.B);
  w.m = std::max(8.0 * spec.B, 2.0 * std::sqrt(w.d)) + 1.0;
  return w;
}

WeightChoice auto_weight(const ProblemSpec& spec, const StateTriple* state, int probe_samples) {
  const double rho = 1.0 + sup_state(state);
  const double radii[] = {rho};
  const AssumptionReport report = probe_assumptions(spec, probe_samples, radii);
  return choose_weight(spec, &report, rho);
}

SolveReport solve_linearized(const OperatorContext& ctx, const StateTriple& z0, const GridField& v,
                             const SolverConfig& cfg) {
  return solve_linearized(ctx, Linearization(ctx, z0), z0, v, cfg);
}

SolveReport solve_linearized(const OperatorContext& ctx, const Linearization& lin, const StateTriple& z0,
                             const GridField& v, const SolverConfig& cfg) {
  cfg.validate();
  check_rhs(ctx, v);
  const ResolvedWeight w = resolve_weight(ctx.spec(), z0, cfg, true);
  const OperatorContext wctx = ctx.with_weight(w.m);
  SolveReport rep = start_report(w);

  GridField g = cfg.initial ? *cfg.initial : v;
  check_rhs(ctx, g);
  double prev = 0.0;
  double prev_classical = 0.0;
  int growing = 0;
  for (int k = 1; k <= cfg.max_iter; ++k) {
    GridField next = v;
    next -= apply_Fprime(wctx, lin, g);
    next += g;
    // F'(z0) g - v = g - next
    const GridField r = g - next;
    TraceEntry e;
    e.iteration = k;
    e.residual_weighted = wctx.norms().l2(r);
    e.residual_classical = weighted_l2_norm(r, 0.0);
    e.ratio = k == 1 || prev == 0.0 ? 0.0 : e.residual_weighted / prev;
    rep.trace.push_back(e);
    rep.iterations = k;
    rep.residual_weighted = e.residual_weighted;
    rep.residual_classical = e.residual_classical;
    rep.g = g;
    if (e.residual_classical <= cfg.tol) {
      rep.converged = true;
      break;
    }
    if (!std::isfinite(e.residual_classical)) {
      fail(SolveFailure::Kind::divergence,
           "linear iteration produced a non-finite residual at m = " + fmt(w.m) + "; increase m", std::move(rep));
    }
    // At large m h the weighted residual can sit on its rounding floor while
    // the classical one still falls; only count steps where neither decreases.
    growing = (k > 1 && e.ratio >= 1.0 && e.residual_classical >= prev_classical) ? growing + 1 : 0;
    if (growing >= 5) {
      fail(SolveFailure::Kind::divergence,
           "linear iteration is not contracting (residual ratio >= 1 for 5 consecutive iterations at m = " +
               fmt(w.m) + "); choose m > 2*sqrt(d) = " + fmt(2.0 * std::sqrt(w.choice.d)),
           std::move(rep));
    }
    prev = e.residual_weighted;
    prev_classical = e.residual_classical;
    g = std::move(next);
  }
  if (!rep.converged) {
    fail(SolveFailure::Kind::no_convergence,
         "linear iteration did not reach tol = " + fmt(cfg.tol) + " in " + std::to_string(cfg.max_iter) +
             " iterations (residual " + fmt(rep.residual_classical) + ")",
         std::move(rep));
  }
  rep.state = reconstruct_state(rep.g);
  return rep;
}

ContractionEstimate estimate_contraction(const OperatorContext& ctx, const StateTriple& z0,
                                         const SolverConfig& cfg, int trials, Rng& rng) {
  if (trials < 1) throw InvalidArgument("estimate_contraction needs trials >= 1");
  const WeightChoice choice = auto_weight(ctx.spec(), &z0, cfg.probe_samples);
  ContractionEstimate est;
  est.m = cfg.m.value_or(choice.m);
  est.d = choice.d;
  est.bound = 4.0 * est.d / (est.m * est.m);
  est.trials = trials;
  const OperatorContext wctx = ctx.with_weight(est.m);
  const Linearization lin(wctx, z0);
  for (int t = 0; t < trials; ++t) {
    const GridField g1 = random_smooth_field(ctx.grid(), ctx.dim(), rng);
    const GridField g2 = random_smooth_field(ctx.grid(), ctx.dim(), rng);
    const GridField diff = g1 - g2;
    const double denom = wctx.norms().l2(diff);
    if (denom == 0.0) continue;
    const GridField k = apply_Fprime(wctx, lin, diff) - diff;
    est.rho_hat = std::max(est.rho_hat, wctx.norms().l2(k) / denom);
  }
  est.contractive = est.rho_hat < 1.0;
  return est;
}

SolveReport solve_picard(const OperatorContext& ctx, const GridField& v, const SolverConfig& cfg) {
  cfg.validate();
  check_rhs(ctx, v);
  GridField g = cfg.initial ? *cfg.initial : v;
  check_rhs(ctx, g);
  const ResolvedWeight w = resolve_weight(ctx.spec(), reconstruct_state(g), cfg, false);
  const OperatorContext wctx = ctx.with_weight(w.m);
  SolveReport rep = start_report(w);

  double prev = 0.0;
  double prev_classical = 0.0;
  int growing = 0;
  for (int k = 1; k <= cfg.max_iter; ++k) {
    const Residual r = residual(wctx, g, v);
    TraceEntry e;
    e.iteration = k;
    e.residual_weighted = r.weighted;
    e.residual_classical = r.classical;
    e.ratio = k == 1 || prev == 0.0 ? 0.0 : r.weighted / prev;
    e.step = cfg.damping;
    rep.trace.push_back(e);
    rep.iterations = k;
    rep.residual_weighted = r.weighted;
    rep.residual_classical = r.classical;
    rep.g = g;
    if (r.classical <= cfg.tol) {
      rep.converged = true;
      break;
    }
    growing = (k > 1 && e.ratio >= 1.0 && r.classical >= prev_classical) ? growing + 1 : 0;
    if (!std::isfinite(r.classical) || growing >= 5) {
      fail(SolveFailure::Kind::divergence,
           "Picard iteration diverges (residual ratio >= 1 for 5 consecutive iterations); "
           "reduce the damping or use the newton method",
           std::move(rep));
    }
    prev = r.weighted;
    prev_classical = r.classical;
    g.axpy(-cfg.damping, r.field);
  }
  if (!rep.converged) {
    fail(SolveFailure::Kind::no_convergence,
         "Picard iteration did not reach tol = " + fmt(cfg.tol) + " in " + std::to_string(cfg.max_iter) +
             " iterations (residual " + fmt(rep.residual_classical) + ")",
         std::move(rep));
  }
  rep.state = reconstruct_state(rep.g);
  return rep;
}

SolveReport solve_newton(const OperatorContext& ctx, const GridField& v, const SolverConfig& cfg) {
  cfg.validate();
  check_rhs(ctx, v);
  GridField g = cfg.initial ? *cfg.initial : v;
  check_rhs(ctx, g);
  StateTriple z = reconstruct_state(g);
  const ResolvedWeight w = resolve_weight(ctx.spec(), z, cfg, false);
  const OperatorContext wctx = ctx.with_weight(w.m);
  SolveReport rep = start_report(w);
  rep.g = g;

  Residual r = residual(wctx, g, v);
  double phi = merit_from(r);
  rep.residual_weighted = r.weighted;
  rep.residual_classical = r.classical;
  bool kink_warned = false;

  for (int k = 1; k <= cfg.max_iter; ++k) {
    const Linearization lin(wctx, z);
    if (lin.kink() && !kink_warned) {
      rep.warnings.push_back("a Jacobian was evaluated at a kink of abs; Newton steps use a one-sided slope");
      kink_warned = true;
    }
    SolverConfig inner;
    inner.tol = cfg.inner_tol;
    inner.max_iter = cfg.inner_max_iter;
    inner.probe_samples = cfg.probe_samples;
    inner.m = cfg.m ? *cfg.m : std::max(w.m, auto_weight(ctx.spec(), &z, cfg.probe_samples).m);

    GridField rhs = r.field;
    rhs *= -1.0;
    SolveReport step;
    try {
      step = solve_linearized(wctx, lin, z, rhs, inner);
    } catch (const SolveFailure& e) {
      fail(e.kind(), "Newton iteration " + std::to_string(k) + ": inner solve failed: " + e.what(),
           std::move(rep));
    }

    double lambda = 1.0;
    bool accepted = false;
    GridField trial = g;
    Residual rt;
    for (int halving = 0; halving <= 20 && !accepted; ++halving, lambda *= 0.5) {
      trial = g;
      trial.axpy(lambda, step.g);
      try {
        rt = residual(wctx, trial, v);
      } catch (const EvalFault&) {
        continue;
      }
      const double phi_t = merit_from(rt);
      accepted = std::isfinite(phi_t) && (phi_t < phi || rt.classical <= cfg.tol);
      if (accepted) break;
    }
    if (!accepted) {
      fail(SolveFailure::Kind::stagnation,
           "Newton line search failed: 20 halvings without decrease of the merit function at iteration " +
               std::to_string(k),
           std::move(rep));
    }

    TraceEntry e;
    e.iteration = k;
    e.residual_weighted = rt.weighted;
    e.residual_classical = rt.classical;
    e.ratio = r.weighted == 0.0 ? 0.0 : rt.weighted / r.weighted;
    e.step = lambda;
    e.inner_iterations = step.iterations;
    rep.trace.push_back(e);
    rep.iterations = k;

    g = std::move(trial);
    r = std::move(rt);
    phi = merit_from(r);
    z = reconstruct_state(g);
    rep.g = g;
    rep.residual_weighted = r.weighted;
    rep.residual_classical = r.classical;
    if (r.classical <= cfg.tol) {
      rep.converged = true;
      break;
    }
  }
  if (!rep.converged) {
    fail(SolveFailure::Kind::no_convergence,
         "Newton iteration did not reach tol = " + fmt(cfg.tol) + " in " + std::to_string(cfg.max_iter) +
             " iterations (residual " + fmt(rep.residual_classical) + ")",
         std::move(rep));
  }
  rep.state = std::move(z);
  return rep;
}

SolveReport solve(const OperatorContext& ctx, const GridField& v, const SolverConfig& cfg) {
  return cfg.method == Method::picard ? solve_picard(ctx, v, cfg) : solve_newton(ctx, v, cfg);
}

}  // namespace goursat2d
