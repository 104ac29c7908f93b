#include "goursat2d/operator.hpp"

#include <cmath>
#include <sstream>

#include "goursat2d/error.hpp"
#include "goursat2d/parallel.hpp"

namespace goursat2d {

namespace {

std::string node_context(const Grid& grid, int i, int j, const char* what) {
  std::ostringstream ss;
  ss.precision(17);
  ss << "in " << what << " at node (i=" << i << ", j=" << j << ", x=" << grid.coord(i)
     << ", y=" << grid.coord(j) << ")";
  return ss.str();
}

// out += M v for a row-major n x n matrix.
void mat_vec_add(std::span<const double> m, std::span<const double> v, std::span<double> out) {
  const std::size_t n = v.size();
  for (std::size_t r = 0; r < n; ++r) {
    double s = 0.0;
    for (std::size_t c = 0; c < n; ++c) s += m[r * n + c] * v[c];
    out[r] += s;
  }
}

GridField sample_matrix(const ExprMatrix& m, const Grid& grid, const char* name) {
  return GridField::sample(grid, m.n * m.n, [&](double x, double y, std::span<double> out) {
    try {
      eval_matrix(m, x, y, out);
    } catch (const EvalFault& e) {
      std::ostringstream ss;
      ss.precision(17);
      ss << "in " << name << " at (x=" << x << ", y=" << y << ")";
      throw e.with_context(ss.str());
    }
  });
}

void check_input(const OperatorContext& ctx, const GridField& g, const char* what) {
  if (!(g.grid() == ctx.grid()) || g.dim() != ctx.dim()) {
    throw ShapeError(std::string(what) + ": field is " + std::to_string(g.grid().cells()) + " cells x " +
                     std::to_string(g.dim()) + " components, context expects " +
                     std::to_string(ctx.grid().cells()) + " x " + std::to_string(ctx.dim()));
  }
}

}  // namespace

OperatorContext::OperatorContext(std::shared_ptr<const ProblemSpec> spec, const Grid& grid, double m)
    : spec_(std::move(spec)), grid_(grid), norms_(grid, m) {
  auto coeffs = std::make_shared<Coefficients>(Coefficients{
      sample_matrix(spec_->A1, grid, "A1"), sample_matrix(spec_->A2, grid, "A2"),
      sample_matrix(spec_->A1x, grid, "A1x"), sample_matrix(spec_->A2y, grid, "A2y"),
      sample_exprs({spec_->b}, grid)});
  coeffs_ = std::move(coeffs);
}

OperatorContext::OperatorContext(const ProblemSpec& spec, const Grid& grid, double m)
    : OperatorContext(std::make_shared<const ProblemSpec>(spec), grid, m) {}

OperatorContext::OperatorContext(std::shared_ptr<const ProblemSpec> spec, const Grid& grid,
                                 std::shared_ptr<const Coefficients> coeffs, double m)
    : spec_(std::move(spec)), grid_(grid), coeffs_(std::move(coeffs)), norms_(grid, m) {}

OperatorContext OperatorContext::with_weight(double m) const {
  return OperatorContext(spec_, grid_, coeffs_, m);
}

GridField apply_F(const OperatorContext& ctx, const GridField& g) {
  check_input(ctx, g, "apply_F");
  const ProblemSpec& spec = ctx.spec();
  const StateTriple s = reconstruct_state(g);
  const int nodes = ctx.grid().nodes_per_axis();
  const auto n = static_cast<std::size_t>(spec.n);
  GridField out = g;
  GridField volterra(ctx.grid(), spec.n);
  parallel_for(static_cast<std::size_t>(nodes), [&](std::size_t row) {
    const int i = static_cast<int>(row);
    const double x = ctx.grid().coord(i);
    for (int j = 0; j < nodes; ++j) {
      const double y = ctx.grid().coord(j);
      const auto z = s.z.at(i, j);
      auto o = out.at(i, j);
      auto p = volterra.at(i, j);
      const char* where = "f1";
      try {
        for (std::size_t k = 0; k < n; ++k) o[k] += spec.f1[k].eval(x, y, z);
        where = "f2";
        for (std::size_t k = 0; k < n; ++k) p[k] = spec.f2[k].eval(x, y, z);
      } catch (const EvalFault& e) {
        throw e.with_context(node_context(ctx.grid(), i, j, where));
      }
      mat_vec_add(ctx.A1(i, j), s.zx.at(i, j), p);
      mat_vec_add(ctx.A2(i, j), s.zy.at(i, j), p);
    }
  });
  out += cum_integral_2d(volterra);
  return out;
}

Residual residual(const OperatorContext& ctx, const GridField& g, const GridField& v) {
  check_input(ctx, v, "residual");
  Residual r{apply_F(ctx, g) - v, 0.0, 0.0};
  r.classical = weighted_l2_norm(r.field, 0.0);
  r.weighted = ctx.norms().l2(r.field);
  return r;
}

double merit_from(const Residual& r) { return 0.5 * r.classical * r.classical; }

double merit(const OperatorContext& ctx, const GridField& g, const GridField& v) {
  return merit_from(residual(ctx, g, v));
}

Linearization::Linearization(const OperatorContext& ctx, const StateTriple& state)
    : jf1_(ctx.grid(), ctx.dim() * ctx.dim()), jf2_(ctx.grid(), ctx.dim() * ctx.dim()) {
  check_input(ctx, state.z, "Linearization");
  const ProblemSpec& spec = ctx.spec();
  const int nodes = ctx.grid().nodes_per_axis();
  const auto n = static_cast<std::size_t>(spec.n);
  std::vector<double> row_sup(static_cast<std::size_t>(nodes), 0.0);
  std::vector<char> row_kink(static_cast<std::size_t>(nodes), 0);
  parallel_for(static_cast<std::size_t>(nodes), [&](std::size_t row) {
    const int i = static_cast<int>(row);
    const double x = ctx.grid().coord(i);
    for (int j = 0; j < nodes; ++j) {
      const double y = ctx.grid().coord(j);
      const auto z = state.z.at(i, j);
      auto j1 = jf1_.at(i, j);
      auto j2 = jf2_.at(i, j);
      const char* where = "f1";
      try {
        for (std::size_t k = 0; k < n; ++k) {
          bool kink = false;
          spec.f1[k].eval_gradient(x, y, z, j1.subspan(k * n, n), &kink);
          row_kink[row] |= kink;
        }
        where = "f2";
        for (std::size_t k = 0; k < n; ++k) {
          bool kink = false;
          spec.f2[k].eval_gradient(x, y, z, j2.subspan(k * n, n), &kink);
          row_kink[row] |= kink;
        }
      } catch (const EvalFault& e) {
        throw e.with_context(node_context(ctx.grid(), i, j, where));
      }
      row_sup[row] = std::max({row_sup[row], spectral_norm(j1, spec.n), spectral_norm(j2, spec.n)});
    }
  });
  for (std::size_t r = 0; r < row_sup.size(); ++r) {
    sup_norm_ = std::max(sup_norm_, row_sup[r]);
    kink_ = kink_ || row_kink[r];
  }
}

GridField apply_Fprime(const OperatorContext& ctx, const Linearization& lin, const GridField& h_g) {
  check_input(ctx, h_g, "apply_Fprime");
  const StateTriple h = reconstruct_state(h_g);
  const int nodes = ctx.grid().nodes_per_axis();
  GridField out = h_g;
  GridField volterra(ctx.grid(), ctx.dim());
  parallel_for(static_cast<std::size_t>(nodes), [&](std::size_t row) {
    const int i = static_cast<int>(row);
    for (int j = 0; j < nodes; ++j) {
      mat_vec_add(lin.jacobian_f1().at(i, j), h.z.at(i, j), out.at(i, j));
      auto p = volterra.at(i, j);
      mat_vec_add(lin.jacobian_f2().at(i, j), h.z.at(i, j), p);
      mat_vec_add(ctx.A1(i, j), h.zx.at(i, j), p);
      mat_vec_add(ctx.A2(i, j), h.zy.at(i, j), p);
    }
  });
  out += cum_integral_2d(volterra);
  return out;
}

GridField apply_Fprime(const OperatorContext& ctx, const StateTriple& z_state, const GridField& h_g) {
  return apply_Fprime(ctx, Linearization(ctx, z_state), h_g);
}

CoercivityReport coercivity_probe(const OperatorContext& ctx, std::span<const GridField> samples,
                                  double m) {
  const double B = ctx.spec().B;
  if (!(m > 8.0 * B)) {
    std::ostringstream ss;
    ss << "coercivity requires m > 8B (m = " << m << ", 8B = " << 8.0 * B << ")";
    throw ThresholdError(ss.str());
  }
  const OperatorContext wctx = ctx.with_weight(m);
  CoercivityReport rep;
  rep.m = m;
  rep.B = B;
  rep.factor = 1.0 - 8.0 * B / m;
  rep.D = 2.0 * wctx.norms().l2(wctx.b_field());
  constexpr std::array<double, 3> kRay{1.0, 10.0, 100.0};
  for (const GridField& g : samples) {
    CoercivitySample s;
    const double zn = wctx.norms().l2(g);
    s.lhs = wctx.norms().l2(apply_F(wctx, g));
    s.bound = rep.factor * zn - rep.D;
    s.margin = s.lhs - s.bound;
    s.tolerance = discretization_tolerance(ctx.grid(), weighted_l2_norm(g, 0.0));
    s.pass = s.margin >= -s.tolerance;
    s.ray[0] = s.lhs;
    for (std::size_t t = 1; t < kRay.size(); ++t) {
      s.ray[t] = wctx.norms().l2(apply_F(wctx, kRay[t] * g));
    }
    // Growth is only guaranteed once the bound itself dominates 2D.
    for (std::size_t t = 0; t + 1 < kRay.size(); ++t) {
      if (rep.factor * kRay[t] * zn > 2.0 * rep.D && !(s.ray[t + 1] > s.ray[t])) s.ray_increasing = false;
    }
    rep.pass = rep.pass && s.pass && s.ray_increasing;
    rep.samples.push_back(s);
  }
  return rep;
}

}  // namespace goursat2d
