#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "goursat2d/error.hpp"
#include "goursat2d/operator.hpp"
#include "goursat2d/problem.hpp"
#include "goursat2d/random_fields.hpp"

namespace goursat2d {

enum class Method { picard, newton };

std::string_view method_name(Method method) noexcept;
/// Throws InvalidArgument for anything but "picard" or "newton".
Method parse_method(std::string_view name);

struct SolverConfig {
  /// Bielecki weight; chosen from the problem when empty.
  std::optional<double> m;
  double tol = 1e-10;
  int max_iter = 50;
  Method method = Method::newton;
  double inner_tol = 1e-12;
  int inner_max_iter = 200;
  /// Picard step factor in (0, 1].
  double damping = 1.0;
  /// Starting mixed derivative; v when empty.
  std::optional<GridField> initial;
  /// Quasi-random samples used to estimate d when m is chosen automatically.
  int probe_samples = 512;

  /// Throws InvalidArgument when a field is out of range.
  void validate() const;
};

/// m = max(8B, 2 sqrt(d)) + 1 together with what produced it.
struct WeightChoice {
  double m = 0.0;
  double B = 0.0;
  double d = 0.0;
  double rho = 0.0;
  double M_rho = 0.0;
};

/// d = max(M_rho, B) from a probe report covering radius rho.
/// Throws InvalidArgument when the report is missing or does not reach rho.
WeightChoice choose_weight(const ProblemSpec& spec, const AssumptionReport* report, double rho);

/// Probes the problem on the ball of radius 1 + sup|z| (z = 0 when state is null)
/// and chooses the weight from it.
WeightChoice auto_weight(const ProblemSpec& spec, const StateTriple* state, int probe_samples = 512);

struct TraceEntry {
  int iteration = 0;
  double residual_weighted = 0.0;
  double residual_classical = 0.0;
  /// Weighted residual over the previous one (0 on the first entry).
  double ratio = 0.0;
  /// Newton: accepted line-search factor and inner iterations.
  double step = 1.0;
  int inner_iterations = 0;
};

struct SolveReport {
  GridField g;
  StateTriple state;
  double residual_classical = 0.0;
  double residual_weighted = 0.0;
  int iterations = 0;
  std::vector<TraceEntry> trace;
  double m_used = 0.0;
  bool converged = false;
  std::vector<std::string> warnings;
  std::optional<WeightChoice> weight;
};

class SolveFailure : public Error {
 public:
  enum class Kind { divergence, no_convergence, stagnation };

  SolveFailure(Kind kind, const std::string& what, std::shared_ptr<const SolveReport> report);

  Kind kind() const noexcept { return kind_; }
  /// Last iterate and the trace up to the failure.
  const SolveReport& report() const noexcept { return *report_; }

 private:
  Kind kind_;
  std::shared_ptr<const SolveReport> report_;
};

std::string_view failure_kind_name(SolveFailure::Kind kind) noexcept;

/// Solves F'(z0) h = v by the fixed-point iteration g <- v - (H - I) g.
/// Converges when the classical (hence also the weighted) residual is <= tol.
SolveReport solve_linearized(const OperatorContext& ctx, const StateTriple& z0, const GridField& v,
                             const SolverConfig& cfg);
SolveReport solve_linearized(const OperatorContext& ctx, const Linearization& lin, const StateTriple& z0,
                             const GridField& v, const SolverConfig& cfg);

struct ContractionEstimate {
  double rho_hat = 0.0;
  double bound = 0.0;  // 4d/m^2
  double m = 0.0;
  double d = 0.0;
  int trials = 0;
  bool contractive = false;
};

/// Largest ||(H - I)(g1 - g2)||_m / ||g1 - g2||_m over random smooth pairs at z0.
/// Uses cfg.m, or the automatic weight at z0.
ContractionEstimate estimate_contraction(const OperatorContext& ctx, const StateTriple& z0,
                                         const SolverConfig& cfg, int trials, Rng& rng);

/// g <- g - damping (F(z) - v).
SolveReport solve_picard(const OperatorContext& ctx, const GridField& v, const SolverConfig& cfg);

/// Newton iteration with backtracking on the merit function.
SolveReport solve_newton(const OperatorContext& ctx, const GridField& v, const SolverConfig& cfg);

/// Dispatches on cfg.method.
SolveReport solve(const OperatorContext& ctx, const GridField& v, const SolverConfig& cfg);

}  // namespace goursat2d
