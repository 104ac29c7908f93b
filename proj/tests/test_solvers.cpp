#include <doctest.h>

#include <cmath>
#include <vector>

#include "dense_oracle.hpp"
#include "goursat2d/solvers.hpp"
#include "test_util.hpp"

using namespace goursat2d;
using testutil::max_diff;
using testutil::problem_path;

namespace {

ProblemSpec load(const char* name) { return load_problem_file(problem_path(name)); }

double classical(const GridField& f) { return weighted_l2_norm(f, 0.0); }

}  // namespace

TEST_CASE("configuration and method names") {
  CHECK(parse_method("picard") == Method::picard);
  CHECK(parse_method("newton") == Method::newton);
  CHECK(method_name(Method::picard) == "picard");
  CHECK_THROWS_AS(parse_method("gauss"), InvalidArgument);
  SolverConfig c;
  CHECK_NOTHROW(c.validate());
  for (auto breaker : std::vector<void (*)(SolverConfig&)>{
           [](SolverConfig& s) { s.tol = 0.0; }, [](SolverConfig& s) { s.max_iter = 0; },
           [](SolverConfig& s) { s.damping = 0.0; }, [](SolverConfig& s) { s.damping = 1.5; },
           [](SolverConfig& s) { s.m = -1.0; }, [](SolverConfig& s) { s.inner_tol = -1.0; }}) {
    SolverConfig bad;
    breaker(bad);
    CHECK_THROWS_AS(bad.validate(), InvalidArgument);
  }
}

TEST_CASE("choose_weight") {
  ProblemSpec spec = load("linear_reaction");
  AssumptionReport rep;
  rep.radii.push_back({1.0, 1.0, 1.0, 1.0});
  const WeightChoice w = choose_weight(spec, &rep, 1.0);
  CHECK(w.m == 9.0);
  CHECK(w.d == 1.0);

  const ProblemSpec zero = zero_problem();
  const AssumptionReport zrep = probe_assumptions(zero, 16, std::vector<double>{1.0});
  CHECK(choose_weight(zero, &zrep, 1.0).m == 1.0);
  CHECK(auto_weight(zero, nullptr).m == 1.0);

  CHECK_THROWS_AS(choose_weight(spec, nullptr, 1.0), InvalidArgument);
  CHECK_THROWS_AS(choose_weight(spec, &rep, 2.0), InvalidArgument);

  const ProblemSpec kernel = load("kernel_example");
  const WeightChoice k = auto_weight(kernel, nullptr);
  CHECK(std::isfinite(k.m));
  CHECK(k.m > 8 * kernel.B);
  CHECK(k.rho == 1.0);
  CHECK(k.d >= k.M_rho);
}

TEST_CASE("linearized solve against the dense oracle") {
  const Grid grid(16);
  for (const char* name : {"linear_reaction", "linear_A", "rotation_2d", "kernel_example"}) {
    INFO(name);
    const ProblemSpec spec = load(name);
    const OperatorContext ctx(spec, grid);
    Rng rng(31);
    const GridField z0g = random_smooth_field(grid, spec.n, rng, 0.5);
    const StateTriple z0 = reconstruct_state(z0g);
    const GridField v = random_smooth_field(grid, spec.n, rng);
    SolverConfig cfg;
    cfg.tol = 1e-13;
    const SolveReport rep = solve_linearized(ctx, z0, v, cfg);
    CHECK(rep.converged);
    const GridField dense = oracle::solve_linearized(spec, z0.z, v);
    CHECK(classical(rep.g - dense) <= 1e-8);
    CHECK(static_cast<int>(rep.trace.size()) == rep.iterations);
  }
}

TEST_CASE("affine specs: nonlinear solvers match the dense oracle") {
  const Grid grid(16);
  for (const char* name : {"linear_reaction", "linear_A", "zero"}) {
    INFO(name);
    const ProblemSpec spec = load(name);
    const OperatorContext ctx(spec, grid);
    const GridField v = rhs_on(spec, grid);
    const GridField dense = oracle::solve_affine(spec, v);
    SolverConfig cfg;
    cfg.tol = 1e-12;
    const SolveReport newton = solve_newton(ctx, v, cfg);
    CHECK(newton.converged);
    CHECK(newton.iterations == 1);
    CHECK(classical(newton.g - dense) <= 1e-10);
    cfg.method = Method::picard;
    cfg.max_iter = 200;
    const SolveReport picard = solve(ctx, v, cfg);
    CHECK(picard.converged);
    CHECK(classical(picard.g - dense) <= 1e-10);
  }
}

TEST_CASE("zero problem") {
  const Grid grid(8);
  const OperatorContext ctx(zero_problem(), grid);
  const GridField v(grid, 1, 1.0);
  const SolveReport lin = solve_linearized(ctx, reconstruct_state(GridField(grid, 1)), v, {});
  CHECK(lin.iterations == 1);
  CHECK(lin.g == v);
  CHECK(lin.state.z == cum_integral_2d(v));

  SolverConfig cfg;
  cfg.method = Method::picard;
  const SolveReport p = solve(ctx, v, cfg);
  CHECK(p.iterations == 1);
  CHECK(p.m_used == 1.0);
  for (int i = 0; i <= 8; ++i) {
    for (int j = 0; j <= 8; ++j) CHECK(p.state.z(i, j) == doctest::Approx(grid.coord(i) * grid.coord(j)));
  }
  const SolveReport n = solve(ctx, v, {});
  CHECK(n.converged);
  CHECK(n.iterations == 1);
  CHECK(n.g == v);
}

TEST_CASE("manufactured linearized recovery") {
  const Grid grid(16);
  for (const char* name : {"kernel_example", "rotation_2d"}) {
    INFO(name);
    const ProblemSpec spec = load(name);
    const OperatorContext ctx(spec, grid);
    Rng rng(41);
    const StateTriple z0 = reconstruct_state(random_smooth_field(grid, spec.n, rng));
    const GridField h = random_smooth_field(grid, spec.n, rng);
    const GridField v = apply_Fprime(ctx, z0, h);
    SolverConfig cfg;
    cfg.tol = 1e-11;
    const SolveReport rep = solve_linearized(ctx, z0, v, cfg);
    CHECK(classical(rep.g - h) <= 10 * cfg.tol);
  }
}

TEST_CASE("Newton on the kernel example") {
  const ProblemSpec kernel = load("kernel_example");
  const ExprVector zstar = parse_field_exprs({"cos(x + 2*y)"}, 1);
  std::vector<double> errors;
  for (int N : {16, 32}) {
    const Grid grid(N);
    const ProblemSpec spec = manufacture_problem(kernel, grid, zstar);
    const OperatorContext ctx(spec, grid);
    const SolveReport rep = solve(ctx, rhs_on(spec, grid), {});
    CHECK(rep.converged);
    CHECK(rep.residual_classical <= 1e-10);
    CHECK(rep.weight.has_value());
    CHECK(rep.m_used > 8 * spec.B);
    errors.push_back(classical(rep.g - sample_exprs(zstar, grid)));
    // Superlinear tail: each ratio below the previous one once the residual is small.
    const auto& t = rep.trace;
    REQUIRE(t.size() >= 2);
    CHECK(t.back().ratio < 0.1);
    if (N == 32) {
      const double h = grid.spacing();
      CHECK(errors.back() <= 10 * h * h);
    }
  }
  const double order = std::log2(errors[0] / errors[1]);
  CHECK(order >= 1.8);
  CHECK(order <= 2.2);
}

TEST_CASE("Picard: manufactured linear problem converges at second order") {
  const ProblemSpec base = load("manufactured_linear_A");
  std::vector<double> errors;
  for (int N : {16, 32}) {
    const Grid grid(N);
    const ProblemSpec spec = manufacture_problem(base, grid, base.zstar_xy);
    const OperatorContext ctx(spec, grid);
    SolverConfig cfg;
    cfg.method = Method::picard;
    cfg.max_iter = 500;
    const SolveReport rep = solve(ctx, rhs_on(spec, grid), cfg);
    CHECK(rep.converged);
    // z* with mixed derivative exp(x) cos(y) is (exp(x) - 1) sin(y).
    const GridField exact = testutil::field(grid, [](double x, double y) { return std::expm1(x) * std::sin(y); });
    errors.push_back(classical(rep.state.z - exact));
  }
  const double ratio = errors[0] / errors[1];
  CHECK(ratio >= 3.5);
  CHECK(ratio <= 4.6);
}

TEST_CASE("odd symmetry: z(-v) = -z(v)") {
  const ProblemSpec spec = make_problem(1, {"0.5*sin(z1) + z1^3/(1 + z1^2)"}, {"atan(z1)"}, {"0"}, {"0"}, {"0"},
                                        {"0"}, 1.0, "0");
  const Grid grid(16);
  const OperatorContext ctx(spec, grid);
  Rng rng(5);
  const GridField v = random_smooth_field(grid, 1, rng, 2.0);
  const SolveReport plus = solve(ctx, v, {});
  const SolveReport minus = solve(ctx, -1.0 * v, {});
  CHECK(max_diff(plus.state.z, -1.0 * minus.state.z) <= 1e-12);
}

TEST_CASE("uniqueness: random starts agree") {
  const ProblemSpec spec = load("kernel_example");
  const Grid grid(32);
  const OperatorContext ctx(spec, grid);
  const GridField v = rhs_on(spec, grid);
  SolverConfig cfg;
  const SolveReport ref = solve(ctx, v, cfg);
  Rng rng(99);
  for (int s = 0; s < 5; ++s) {
    cfg.initial = random_smooth_field(grid, 1, rng, 3.0);
    const SolveReport rep = solve(ctx, v, cfg);
    CHECK(rep.converged);
    CHECK(classical(rep.g - ref.g) <= 10 * cfg.tol);
  }
}

TEST_CASE("contraction estimates") {
  const Grid grid(32);
  Rng rng(8);
  const ContractionEstimate z =
      estimate_contraction(OperatorContext(zero_problem(), grid), reconstruct_state(GridField(grid, 1)), {}, 8, rng);
  CHECK(z.rho_hat == 0.0);
  CHECK(z.contractive);

  for (const char* name : {"zero", "linear_reaction", "linear_A", "kernel_example", "exp_growth", "rotation_2d"}) {
    INFO(name);
    const ProblemSpec spec = load(name);
    const OperatorContext ctx(spec, grid);
    const StateTriple z0 = reconstruct_state(GridField(grid, spec.n));
    const ContractionEstimate est = estimate_contraction(ctx, z0, {}, 8, rng);
    CHECK(est.contractive);
    CHECK(est.rho_hat < 1.0);
    CHECK(est.rho_hat <= est.bound + 1e-12);

    // The linear iteration contracts at no worse than the estimate.
    SolverConfig cfg;
    cfg.m = est.m;
    cfg.tol = 1e-12;
    const SolveReport rep = solve_linearized(ctx, z0, random_smooth_field(grid, spec.n, rng), cfg);
    for (std::size_t k = 1; k < rep.trace.size(); ++k) CHECK(rep.trace[k].ratio <= est.rho_hat + 0.05);
  }

  // Doubling m on a reaction-only linear spec shrinks the estimate about fourfold.
  const ProblemSpec lin = load("linear_reaction");
  const OperatorContext ctx(lin, grid);
  const StateTriple z0 = reconstruct_state(GridField(grid, 1));
  std::vector<double> rho;
  for (double m : {5.0, 10.0, 20.0}) {
    SolverConfig cfg;
    cfg.m = m;
    Rng r(17);
    rho.push_back(estimate_contraction(ctx, z0, cfg, 8, r).rho_hat);
  }
  for (std::size_t k = 0; k + 1 < rho.size(); ++k) {
    CHECK(rho[k] / rho[k + 1] >= 3.0);
    CHECK(rho[k] / rho[k + 1] <= 5.0);
  }
  CHECK_THROWS_AS(estimate_contraction(ctx, z0, {}, 0, rng), InvalidArgument);
}

TEST_CASE("failures carry the trace") {
  const Grid grid(16);
  const ProblemSpec strong = make_problem(1, {"100*z1"}, {"0"}, {"0"}, {"0"}, {"0"}, {"0"}, 100.0, "0");
  const OperatorContext ctx(strong, grid);
  SolverConfig cfg;
  cfg.m = 1.0;
  try {
    solve_linearized(ctx, reconstruct_state(GridField(grid, 1)), GridField(grid, 1, 1.0), cfg);
    FAIL("expected divergence");
  } catch (const SolveFailure& e) {
    CHECK(e.kind() == SolveFailure::Kind::divergence);
    CHECK(failure_kind_name(e.kind()) == "divergence");
    CHECK(e.report().iterations >= 6);
    CHECK(std::string(e.what()).find("2*sqrt(d)") != std::string::npos);
  }

  SolverConfig few;
  few.tol = 1e-14;
  few.max_iter = 2;
  few.method = Method::picard;
  try {
    solve(OperatorContext(load("linear_reaction"), grid), GridField(grid, 1, 1.0), few);
    FAIL("expected no convergence");
  } catch (const SolveFailure& e) {
    CHECK(e.kind() == SolveFailure::Kind::no_convergence);
    CHECK(e.report().trace.size() == 2);
  }

  // Large data on the kernel example: Newton converges whatever Picard does.
  const ProblemSpec kernel = load("kernel_example");
  const OperatorContext kctx(kernel, grid);
  Rng rng(12);
  const GridField big = random_smooth_field(grid, 1, rng, 20.0);
  SolverConfig picard;
  picard.method = Method::picard;
  try {
    (void)solve(kctx, big, picard);
  } catch (const SolveFailure& e) {
    CHECK(e.kind() != SolveFailure::Kind::stagnation);
  }
  const SolveReport nb = solve(kctx, big, {});
  CHECK(nb.converged);
  CHECK(residual(kctx, nb.g, big).classical <= 1e-10);
  const OperatorContext sctx(strong, grid);

  // A user weight below the thresholds is reported.
  SolverConfig low;
  low.m = 2.0;
  const SolveReport warned = solve(kctx, rhs_on(kernel, grid), low);
  CHECK_FALSE(warned.warnings.empty());
  CHECK(warned.m_used == 2.0);

  CHECK_THROWS_AS(solve(sctx, GridField(grid, 2), {}), ShapeError);
}
