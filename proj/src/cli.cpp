#include "goursat2d/cli.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "goursat2d/bielecki.hpp"
#include "goursat2d/io.hpp"
#include "goursat2d/operator.hpp"
#include "goursat2d/problem.hpp"
#include "goursat2d/random_fields.hpp"
#include "goursat2d/sensitivity.hpp"
#include "goursat2d/solvers.hpp"

namespace goursat2d::cli {

namespace {

using ojson = nlohmann::ordered_json;
namespace fs = std::filesystem;

std::string fixed6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

std::string sci(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6e", v);
  return buf;
}

std::vector<double> parse_list(const std::string& text, const char* flag) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw InvalidArgument(std::string(flag) + ": '" + item + "' is not a number");
    }
  }
  if (out.empty()) throw InvalidArgument(std::string(flag) + ": empty list");
  return out;
}

std::optional<double> parse_m(const std::string& text) {
  if (text.empty() || text == "auto") return std::nullopt;
  const auto values = parse_list(text, "--m");
  if (values.size() != 1 || !(values[0] > 0.0)) throw InvalidArgument("--m must be 'auto' or a positive number");
  return values[0];
}

// Solver settings of a problem document ("solver" section); CLI flags override them.
SolverConfig config_from_document(const fs::path& path) {
  SolverConfig cfg;
  const auto doc = nlohmann::json::parse(read_text_file(path), nullptr, false);
  if (doc.is_discarded() || !doc.is_object() || !doc.contains("solver")) return cfg;
  const auto& s = doc["solver"];
  if (!s.is_object()) throw SchemaError("solver", "expected an object");
  auto number = [&](const char* key) {
    if (!s[key].is_number()) throw SchemaError(std::string("solver.") + key, "expected a number");
    return s[key].get<double>();
  };
  auto integer = [&](const char* key) {
    if (!s[key].is_number_integer()) throw SchemaError(std::string("solver.") + key, "expected an integer");
    return s[key].get<int>();
  };
  for (const auto& [key, value] : s.items()) {
    if (key == "m") {
      if (value.is_string() && value.get<std::string>() == "auto") continue;
      cfg.m = number("m");
    } else if (key == "tol") {
      cfg.tol = number("tol");
    } else if (key == "max_iter") {
      cfg.max_iter = integer("max_iter");
    } else if (key == "method") {
      if (!value.is_string()) throw SchemaError("solver.method", "expected \"newton\" or \"picard\"");
      try {
        cfg.method = parse_method(value.get<std::string>());
      } catch (const InvalidArgument& e) {
        throw SchemaError("solver.method", e.what());
      }
    } else if (key == "damping") {
      cfg.damping = number("damping");
    } else if (key == "inner_tol") {
      cfg.inner_tol = number("inner_tol");
    } else if (key == "inner_max_iter") {
      cfg.inner_max_iter = integer("inner_max_iter");
    } else {
      throw SchemaError("solver." + key, "unknown field");
    }
  }
  try {
    cfg.validate();
  } catch (const InvalidArgument& e) {
    throw SchemaError("solver", e.what());
  }
  return cfg;
}

bool looks_like_file(const std::vector<std::string>& values) {
  return values.size() == 1 && fs::is_regular_file(values[0]);
}

const GridField& pick_group(const GridFile& file, std::initializer_list<const char*> names, const std::string& path) {
  for (const char* name : names) {
    const auto it = file.groups.find(name);
    if (it != file.groups.end()) return it->second;
  }
  if (file.groups.size() == 1) return file.groups.begin()->second;
  throw SchemaError(path, "grid file has no usable column group");
}

GridField on_grid(const GridField& field, const Grid& grid, int n, const std::string& what) {
  if (field.dim() != n) {
    throw ShapeError(what + ": field has " + std::to_string(field.dim()) + " components, problem has n = " +
                     std::to_string(n));
  }
  return field.grid() == grid ? field : restrict_to(field, grid);
}

// A field given either as one expression per component or as a grid file path.
GridField field_input(const std::vector<std::string>& values, int n, const Grid& grid, const std::string& what,
                      std::initializer_list<const char*> groups) {
  if (looks_like_file(values)) {
    const GridFile file = read_grid_file(values[0]);
    return on_grid(pick_group(file, groups, values[0]), grid, n, what);
  }
  try {
    return sample_exprs(parse_field_exprs(values, n), grid);
  } catch (const SchemaError& e) {
    throw InvalidArgument(what + ": expected " + std::to_string(n) + " expressions or a grid file path");
  } catch (const ParseError& e) {
    throw e.with_context(what);
  }
}

ojson weight_json(const std::optional<WeightChoice>& w) {
  if (!w) return nullptr;
  return ojson{{"m", w->m}, {"B", w->B}, {"d", w->d}, {"rho", w->rho}, {"M_rho", w->M_rho}};
}

ojson trace_json(const std::vector<TraceEntry>& trace) {
  ojson arr = ojson::array();
  for (const auto& e : trace) {
    arr.push_back(ojson{{"iteration", e.iteration},
                        {"residual_weighted", e.residual_weighted},
                        {"residual_classical", e.residual_classical},
                        {"ratio", e.ratio},
                        {"step", e.step},
                        {"inner_iterations", e.inner_iterations}});
  }
  return arr;
}

ojson contraction_json(const ContractionEstimate& c) {
  return ojson{{"rho_hat", c.rho_hat}, {"bound", c.bound}, {"m", c.m},
               {"d", c.d},             {"trials", c.trials}, {"contractive", c.contractive}};
}

ojson assumptions_json(const AssumptionReport& r) {
  ojson radii = ojson::array();
  for (const auto& p : r.radii) {
    radii.push_back(ojson{{"rho", p.rho}, {"sup_fz1", p.sup_fz1}, {"sup_fz2", p.sup_fz2}, {"M", p.M}});
  }
  return ojson{{"pass", r.pass},
               {"failures", r.failures},
               {"samples", r.samples},
               {"B", r.B},
               {"growth_ratio_f1", r.growth_ratio_f1},
               {"growth_ratio_f2", r.growth_ratio_f2},
               {"b_min", r.b_min},
               {"sup_A1", r.sup_A1},
               {"sup_A2", r.sup_A2},
               {"sup_A1x", r.sup_A1x},
               {"sup_A2y", r.sup_A2y},
               {"derivative_residual_A1x", r.derivative_residual_A1x},
               {"derivative_residual_A2y", r.derivative_residual_A2y},
               {"kink_flagged", r.kink_flagged},
               {"radii", radii}};
}

ojson solve_json(const SolveReport& rep) {
  return ojson{{"converged", rep.converged},
               {"iterations", rep.iterations},
               {"m_used", rep.m_used},
               {"weight", weight_json(rep.weight)},
               {"residual", {{"classical", rep.residual_classical}, {"weighted", rep.residual_weighted}}},
               {"warnings", rep.warnings},
               {"trace", trace_json(rep.trace)}};
}

void write_outputs(const std::string& prefix, const GridField& g, const StateTriple& state, const ojson& report) {
  write_file_atomic(prefix + ".grid.csv", format_solution_csv(g, state));
  write_file_atomic(prefix + ".report.json", report.dump(2) + "\n");
}

void print_warnings(const std::vector<std::string>& warnings, std::ostream& err) {
  for (const auto& w : warnings) err << "warning: " << w << "\n";
}

struct ProblemArgs {
  std::string problem;
  int cells = 0;
  std::string m = "auto";
  std::string method;
  double tol = 0.0;
  int max_iter = 0;
  std::string out = "goursat2d";
  std::uint64_t seed = kDefaultSeed;
};

void add_problem_options(CLI::App* cmd, ProblemArgs& a, bool needs_n) {
  cmd->add_option("--problem", a.problem, "Problem document (JSON)")->required();
  auto* n = cmd->add_option("--n", a.cells, "Grid cells per axis");
  if (needs_n) n->required();
  cmd->add_option("--m", a.m, "Bielecki weight: auto or a positive number");
  cmd->add_option("--method", a.method, "newton or picard");
  cmd->add_option("--tol", a.tol, "Convergence tolerance");
  cmd->add_option("--max-iter", a.max_iter, "Iteration cap");
  cmd->add_option("--out", a.out, "Output prefix");
  cmd->add_option("--seed", a.seed, "Random seed");
}

SolverConfig build_config(const ProblemArgs& a) {
  SolverConfig cfg = config_from_document(a.problem);
  if (a.m != "auto" || !cfg.m) cfg.m = parse_m(a.m);
  if (!a.method.empty()) cfg.method = parse_method(a.method);
  if (a.tol > 0.0) cfg.tol = a.tol;
  if (a.max_iter > 0) cfg.max_iter = a.max_iter;
  cfg.validate();
  return cfg;
}

// Right-hand side of a problem on a grid, manufacturing it from zstar_xy if needed.
GridField problem_rhs(const ProblemSpec& spec, const Grid& grid) {
  if (spec.has_rhs()) return rhs_on(spec, grid);
  if (!spec.zstar_xy.empty()) return rhs_on(manufacture_problem(spec, grid, spec.zstar_xy), grid);
  throw InvalidArgument("problem has no right-hand side (rhs.v, rhs.grid or rhs.zstar_xy)");
}

// ---------------------------------------------------------------- solve

struct SolveArgs : ProblemArgs {
  std::vector<std::string> zstar_xy;
};

int cmd_solve(const SolveArgs& a, std::ostream& out, std::ostream& err) {
  const ProblemSpec spec = load_problem_file(a.problem);
  const SolverConfig cfg = build_config(a);
  const Grid grid(a.cells);
  const GridField v = problem_rhs(spec, grid);
  const OperatorContext ctx(spec, grid);

  ojson report;
  report["command"] = "solve";
  report["problem"] = a.problem;
  report["cells"] = a.cells;
  report["n"] = spec.n;
  report["method"] = method_name(cfg.method);
  report["tol"] = cfg.tol;
  report["seed"] = a.seed;

  SolveReport rep;
  int code = kExitOk;
  try {
    rep = solve(ctx, v, cfg);
  } catch (const SolveFailure& e) {
    rep = e.report();
    report["failure"] = {{"kind", failure_kind_name(e.kind())}, {"message", e.what()}};
    err << "error: " << e.what() << "\n";
    code = kExitSolve;
  }
  print_warnings(rep.warnings, err);
  report["solve"] = solve_json(rep);

  Rng rng(a.seed);
  report["contraction"] = contraction_json(estimate_contraction(ctx, rep.state, cfg, 8, rng));
  const double radii[] = {1.0, 1.0 + magnitude(rep.state.z).max_abs()};
  report["assumptions"] = assumptions_json(probe_assumptions(spec, cfg.probe_samples, radii));

  std::vector<std::string> zstar = a.zstar_xy;
  if (zstar.empty()) {
    for (const auto& e : spec.zstar_xy) zstar.push_back(e.source());
  }
  if (!zstar.empty()) {
    const GridField gstar = field_input(zstar, spec.n, grid, "--zstar-xy", {"g"});
    const StateTriple sstar = reconstruct_state(gstar);
    report["error_vs_zstar"] = {{"g_classical", weighted_l2_norm(rep.g - gstar, 0.0)},
                                {"z_classical", weighted_l2_norm(rep.state.z - sstar.z, 0.0)}};
  }
  write_outputs(a.out, rep.g, rep.state, report);

  out << (rep.converged ? "converged" : "not converged") << " in " << rep.iterations
      << " iterations, m = " << rep.m_used << ", residual " << sci(rep.residual_weighted) << " (weighted) "
      << sci(rep.residual_classical) << " (classical)\n";
  out << "wrote " << a.out << ".grid.csv and " << a.out << ".report.json\n";
  return code;
}

// ---------------------------------------------------------------- linsolve

struct LinsolveArgs : ProblemArgs {
  std::vector<std::string> rhs;
  std::string linearize_at;
};

int cmd_linsolve(const LinsolveArgs& a, std::ostream& out, std::ostream& err) {
  const ProblemSpec spec = load_problem_file(a.problem);
  SolverConfig cfg = build_config(a);
  if (a.tol <= 0.0) cfg.tol = cfg.inner_tol;
  if (a.max_iter <= 0) cfg.max_iter = cfg.inner_max_iter;
  const Grid grid(a.cells);
  const GridField v = field_input(a.rhs, spec.n, grid, "--rhs", {"v", "g"});
  GridField g0(grid, spec.n);
  if (!a.linearize_at.empty()) {
    g0 = on_grid(pick_group(read_grid_file(a.linearize_at), {"g"}, a.linearize_at), grid, spec.n,
                 "--linearize-at");
  }
  const StateTriple z0 = reconstruct_state(g0);
  const OperatorContext ctx(spec, grid);

  ojson report;
  report["command"] = "linsolve";
  report["problem"] = a.problem;
  report["cells"] = a.cells;
  report["n"] = spec.n;
  report["linearize_at"] = a.linearize_at.empty() ? "zero" : a.linearize_at;
  report["tol"] = cfg.tol;

  SolveReport rep;
  int code = kExitOk;
  const WeightChoice auto_choice = auto_weight(spec, &z0, cfg.probe_samples);
  if (cfg.m && !(*cfg.m > 2.0 * std::sqrt(auto_choice.d))) {
    err << "warning: m = " << *cfg.m << " is below the contraction threshold; hint: m > 2√d = "
        << 2.0 * std::sqrt(auto_choice.d) << "\n";
  }
  try {
    rep = solve_linearized(ctx, z0, v, cfg);
  } catch (const SolveFailure& e) {
    rep = e.report();
    const double ratio = rep.trace.empty() ? 0.0 : rep.trace.back().ratio;
    report["failure"] = {{"kind", failure_kind_name(e.kind())}, {"message", e.what()}, {"ratio", ratio}};
    err << "error: " << e.what() << "\n";
    err << "measured ratio " << ratio << "; hint: m > 2√d = " << 2.0 * std::sqrt(auto_choice.d) << "\n";
    code = kExitSolve;
  }
  report["solve"] = solve_json(rep);
  write_outputs(a.out, rep.g, rep.state, report);
  out << (rep.converged ? "converged" : "not converged") << " in " << rep.iterations
      << " iterations, m = " << rep.m_used << ", residual " << sci(rep.residual_classical) << "\n";
  return code;
}

// ---------------------------------------------------------------- verify

struct VerifyArgs {
  std::string suite;
  std::string problem;
  std::string m_list;
  int samples = -1;
  std::uint64_t seed = kDefaultSeed;
  int cells = 32;
  std::vector<std::string> g;
  std::string sample_file;
  std::string radii = "1,2,5,10";
  std::string out = "verify";
};

// Key=value line per check, followed by a JSON summary file at PREFIX.verify.json.
class VerifyLog {
 public:
  VerifyLog(const VerifyArgs& a, std::ostream& out) : args_(a), out_(out) {
    summary_["suite"] = a.suite;
    summary_["seed"] = a.seed;
    summary_["checks"] = ojson::array();
  }

  void check(bool pass, const std::string& line, ojson detail) {
    out_ << (pass ? "PASS " : "FAIL ") << args_.suite << " " << line << "\n";
    detail["pass"] = pass;
    summary_["checks"].push_back(std::move(detail));
    all_pass_ = all_pass_ && pass;
  }

  // Serializes the first failing field for replay via --sample-file.
  void failing_sample(const GridField& g, int index) {
    if (failing_written_) return;
    failing_written_ = true;
    const std::string path = args_.out + ".failing.grid.csv";
    write_file_atomic(path, format_grid_csv({{"g", &g}}));
    summary_["failing_sample"] = {{"index", index}, {"seed", args_.seed}, {"path", path}};
    out_ << "failing sample " << index << " written to " << path << "\n";
  }

  int finish() {
    summary_["pass"] = all_pass_;
    write_file_atomic(args_.out + ".verify.json", summary_.dump(2) + "\n");
    out_ << (all_pass_ ? "all checks passed" : "some checks failed") << "\n";
    return all_pass_ ? kExitOk : kExitCheck;
  }

 private:
  const VerifyArgs& args_;
  std::ostream& out_;
  ojson summary_;
  bool all_pass_ = true;
  bool failing_written_ = false;
};

// Sample fields for a suite: an explicit field (--g or --sample-file) or seeded random ones.
std::vector<GridField> verify_samples(const VerifyArgs& a, const Grid& grid, int n, int default_count,
                                      bool amplitudes) {
  std::vector<GridField> out;
  if (!a.sample_file.empty()) {
    out.push_back(on_grid(pick_group(read_grid_file(a.sample_file), {"g"}, a.sample_file), grid, n,
                          "--sample-file"));
    return out;
  }
  if (!a.g.empty()) {
    out.push_back(field_input(a.g, n, grid, "--g", {"g"}));
    return out;
  }
  const int count = a.samples >= 0 ? a.samples : default_count;
  Rng rng(a.seed);
  constexpr double kAmplitudes[] = {1.0, 10.0, 100.0};
  for (int s = 0; s < count; ++s) {
    out.push_back(random_smooth_field(grid, n, rng, amplitudes ? kAmplitudes[s % 3] : 1.0));
  }
  return out;
}

int verify_norms(const VerifyArgs& a, VerifyLog& log) {
  const Grid grid(a.cells);
  const auto ms = parse_list(a.m_list.empty() ? "0.5,1,2,5" : a.m_list, "--m-list");
  const auto samples = verify_samples(a, grid, 1, 100, false);
  for (std::size_t s = 0; s < samples.size(); ++s) {
    for (double m : ms) {
      const NormEquivalenceReport r = check_norm_equivalence(samples[s], m);
      log.check(r.pass,
                "sample=" + std::to_string(s) + " m=" + fixed6(m) + " lower=" + fixed6(r.lower) +
                    " weighted=" + fixed6(r.weighted) + " classical=" + fixed6(r.classical),
                ojson{{"sample", s}, {"m", m}, {"lower", r.lower}, {"weighted", r.weighted},
                      {"classical", r.classical}, {"tolerance", r.tolerance}});
      if (!r.pass) log.failing_sample(samples[s], static_cast<int>(s));
    }
  }
  return log.finish();
}

int verify_lemma31(const VerifyArgs& a, VerifyLog& log) {
  const Grid grid(a.cells);
  const auto ms = parse_list(a.m_list.empty() ? "1,5,10,20" : a.m_list, "--m-list");
  const auto samples = verify_samples(a, grid, 1, 200, false);
  for (std::size_t s = 0; s < samples.size(); ++s) {
    for (double m : ms) {
      const Lemma31Report r = verify_lemma31(samples[s], m);
      for (const auto& c : r.checks) {
        log.check(c.pass,
                  "sample=" + std::to_string(s) + " m=" + fixed6(m) + " estimate=" + std::string(c.name) +
                      " lhs=" + sci(c.lhs) + " bound=" + sci(r.bound) + " margin=" + sci(c.margin),
                  ojson{{"sample", s}, {"m", m}, {"estimate", c.name}, {"lhs", c.lhs}, {"bound", r.bound},
                        {"margin", c.margin}, {"tolerance", r.tolerance}});
      }
      if (!r.pass) log.failing_sample(samples[s], static_cast<int>(s));
    }
  }
  return log.finish();
}

int verify_coercivity(const VerifyArgs& a, VerifyLog& log) {
  if (a.problem.empty()) throw InvalidArgument("--suite coercivity needs --problem");
  const ProblemSpec spec = load_problem_file(a.problem);
  const Grid grid(a.cells);
  const OperatorContext ctx(spec, grid);
  const std::vector<double> ms =
      a.m_list.empty() ? std::vector<double>{8.0 * spec.B + 1.0} : parse_list(a.m_list, "--m-list");
  const auto samples = verify_samples(a, grid, spec.n, 20, true);
  for (double m : ms) {
    const CoercivityReport r = coercivity_probe(ctx, samples, m);
    for (std::size_t s = 0; s < r.samples.size(); ++s) {
      const CoercivitySample& c = r.samples[s];
      const bool pass = c.pass && c.ray_increasing;
      log.check(pass,
                "sample=" + std::to_string(s) + " m=" + fixed6(m) + " lhs=" + sci(c.lhs) + " bound=" +
                    sci(c.bound) + " margin=" + sci(c.margin) + " ray=" + sci(c.ray[0]) + "," + sci(c.ray[1]) +
                    "," + sci(c.ray[2]),
                ojson{{"sample", s}, {"m", m}, {"factor", r.factor}, {"D", r.D}, {"lhs", c.lhs},
                      {"bound", c.bound}, {"margin", c.margin}, {"tolerance", c.tolerance},
                      {"ray", c.ray}, {"ray_increasing", c.ray_increasing}});
      if (!pass) log.failing_sample(samples[s], static_cast<int>(s));
    }
  }
  return log.finish();
}

int verify_assumptions(const VerifyArgs& a, VerifyLog& log) {
  if (a.problem.empty()) throw InvalidArgument("--suite assumptions needs --problem");
  const ProblemSpec spec = load_problem_file(a.problem);
  const auto radii = parse_list(a.radii, "--radii");
  const AssumptionReport r = probe_assumptions(spec, a.samples >= 0 ? a.samples : 512, radii);
  log.check(r.growth_pass,
            "condition=(C2) growth ratio_f1=" + sci(r.growth_ratio_f1) + " ratio_f2=" + sci(r.growth_ratio_f2),
            ojson{{"condition", "(C2) growth"}, {"growth_ratio_f1", r.growth_ratio_f1},
                  {"growth_ratio_f2", r.growth_ratio_f2}});
  log.check(r.b_nonnegative, "condition=(C2) b>=0 b_min=" + sci(r.b_min),
            ojson{{"condition", "(C2) b >= 0"}, {"b_min", r.b_min}});
  log.check(r.coefficient_pass,
            "condition=(C2) coefficients B=" + sci(r.B) + " A1=" + sci(r.sup_A1) + " A2=" + sci(r.sup_A2) +
                " A1x=" + sci(r.sup_A1x) + " A2y=" + sci(r.sup_A2y),
            ojson{{"condition", "(C2) coefficient bound"}, {"B", r.B}, {"sup_A1", r.sup_A1},
                  {"sup_A2", r.sup_A2}, {"sup_A1x", r.sup_A1x}, {"sup_A2y", r.sup_A2y}});
  log.check(r.derivative_pass,
            "condition=(C1) derivatives A1x=" + sci(r.derivative_residual_A1x) +
                " A2y=" + sci(r.derivative_residual_A2y),
            ojson{{"condition", "(C1) A1x/A2y consistency"},
                  {"residual_A1x", r.derivative_residual_A1x},
                  {"residual_A2y", r.derivative_residual_A2y}});
  for (const auto& p : r.radii) {
    const bool finite = std::isfinite(p.M);
    log.check(finite, "condition=(C3) rho=" + fixed6(p.rho) + " M=" + sci(p.M),
              ojson{{"condition", "(C3) boundedness of f_z"}, {"rho", p.rho}, {"M", p.M}});
  }
  if (r.kink_flagged) log.check(true, "note=abs differentiated at a kink", ojson{{"note", "kink"}});
  return log.finish();
}

int verify_contraction(const VerifyArgs& a, VerifyLog& log) {
  if (a.problem.empty()) throw InvalidArgument("--suite contraction needs --problem");
  const ProblemSpec spec = load_problem_file(a.problem);
  const Grid grid(a.cells);
  const OperatorContext ctx(spec, grid);
  const StateTriple z0 = reconstruct_state(GridField(grid, spec.n));
  std::vector<std::optional<double>> ms;
  if (a.m_list.empty() || a.m_list == "auto") {
    ms.push_back(std::nullopt);
  } else {
    for (double m : parse_list(a.m_list, "--m-list")) ms.push_back(m);
  }
  for (const auto& m : ms) {
    SolverConfig cfg;
    cfg.m = m;
    Rng rng(a.seed);
    const ContractionEstimate c = estimate_contraction(ctx, z0, cfg, a.samples >= 0 ? a.samples : 8, rng);
    log.check(c.contractive,
              "m=" + fixed6(c.m) + " rho_hat=" + sci(c.rho_hat) + " bound=" + sci(c.bound) + " d=" + sci(c.d),
              contraction_json(c));
  }
  return log.finish();
}

int cmd_verify(const VerifyArgs& a, std::ostream& out) {
  VerifyLog log(a, out);
  if (a.suite == "norms") return verify_norms(a, log);
  if (a.suite == "lemma31") return verify_lemma31(a, log);
  if (a.suite == "coercivity") return verify_coercivity(a, log);
  if (a.suite == "assumptions") return verify_assumptions(a, log);
  if (a.suite == "contraction") return verify_contraction(a, log);
  throw InvalidArgument("unknown suite '" + a.suite + "'");
}

// ---------------------------------------------------------------- sens

struct SensArgs : ProblemArgs {
  std::vector<std::string> direction;
  std::string eps = "1e-1,1e-2,1e-3";
};

int cmd_sens(const SensArgs& a, std::ostream& out, std::ostream& err) {
  const ProblemSpec spec = load_problem_file(a.problem);
  const SolverConfig cfg = build_config(a);
  const auto eps = parse_list(a.eps, "--eps");
  for (double e : eps) {
    if (e < eps_floor(cfg.tol)) {
      err << "error: eps = " << e << " is below the floor " << eps_floor(cfg.tol) << " (100*tol)\n";
      return kExitInput;
    }
  }
  const Grid grid(a.cells);
  const GridField v = problem_rhs(spec, grid);
  const GridField dv = field_input(a.direction, spec.n, grid, "--direction", {"v", "g"});
  const OperatorContext ctx(spec, grid);

  SensitivityReport rep;
  try {
    rep = validate_frechet(ctx, v, dv, eps, cfg);
  } catch (const SolveFailure& e) {
    err << "error: " << e.what() << "\n";
    return kExitSolve;
  }
  ojson table = ojson::array();
  out << "eps            error          floor\n";
  for (const auto& fe : rep.fd_errors) {
    out << sci(fe.eps) << "  " << sci(fe.error) << "  " << sci(fe.floor) << (fe.converged ? "" : "  (failed)")
        << "\n";
    table.push_back(ojson{{"eps", fe.eps}, {"error", fe.error}, {"floor", fe.floor}, {"converged", fe.converged}});
  }
  ojson report{{"command", "sens"},       {"problem", a.problem}, {"cells", a.cells},
               {"n", spec.n},             {"m", rep.m},           {"fd_errors", table},
               {"monotone", rep.monotone}, {"valid", rep.valid},  {"pass", rep.pass},
               {"invalid_reasons", rep.invalid_reasons}};
  if (rep.h.dim() > 0) {
    write_outputs(a.out, rep.h, reconstruct_state(rep.h), report);
  } else {
    write_file_atomic(a.out + ".report.json", report.dump(2) + "\n");
  }
  if (!rep.valid) {
    for (const auto& r : rep.invalid_reasons) err << "error: " << r << "\n";
    return kExitSolve;
  }
  out << (rep.pass ? "validation passed" : "validation failed") << "\n";
  return rep.pass ? kExitOk : kExitCheck;
}

// ---------------------------------------------------------------- mms

struct MmsArgs : ProblemArgs {
  std::vector<std::string> zstar_xy;
  std::vector<std::string> zstar;
  std::string n_list = "16,32,64";
};

int cmd_mms(const MmsArgs& a, std::ostream& out, std::ostream& err) {
  ProblemSpec spec = load_problem_file(a.problem);
  const SolverConfig cfg = build_config(a);
  if (spec.has_rhs()) err << "warning: the problem's rhs is replaced by the manufactured one\n";
  ExprVector gstar_exprs;
  if (!a.zstar_xy.empty()) {
    gstar_exprs = parse_field_exprs(a.zstar_xy, spec.n);
  } else if (!spec.zstar_xy.empty()) {
    gstar_exprs = spec.zstar_xy;
  } else {
    throw InvalidArgument("mms needs --zstar-xy (the mixed derivative of the exact solution)");
  }
  std::optional<ExprVector> zstar_exprs;
  if (!a.zstar.empty()) zstar_exprs = parse_field_exprs(a.zstar, spec.n);
  spec.v = std::monostate{};

  std::vector<int> ns;
  for (double n : parse_list(a.n_list, "--n-list")) {
    if (n < 2 || n != std::floor(n)) throw InvalidArgument("--n-list entries must be integers >= 2");
    ns.push_back(static_cast<int>(n));
  }
  if (ns.size() < 2) throw InvalidArgument("--n-list needs at least two grids");

  std::vector<double> errors;
  ojson rows = ojson::array();
  out << "N      g_error        z_error\n";
  for (int n : ns) {
    const Grid grid(n);
    const ProblemSpec man = manufacture_problem(spec, grid, gstar_exprs);
    const OperatorContext ctx(man, grid);
    SolveReport rep;
    try {
      rep = solve(ctx, rhs_on(man, grid), cfg);
    } catch (const SolveFailure& e) {
      err << "error: N = " << n << ": " << e.what() << "\n";
      return kExitSolve;
    }
    const GridField gstar = sample_exprs(gstar_exprs, grid);
    const double g_err = weighted_l2_norm(rep.g - gstar, 0.0);
    const double z_err = zstar_exprs ? weighted_l2_norm(rep.state.z - sample_exprs(*zstar_exprs, grid), 0.0)
                                     : weighted_l2_norm(rep.state.z - reconstruct_state(gstar).z, 0.0);
    errors.push_back(g_err);
    out << n << "  " << sci(g_err) << "  " << sci(z_err) << "\n";
    rows.push_back(ojson{{"cells", n}, {"g_error", g_err}, {"z_error", z_err}, {"iterations", rep.iterations}});
  }

  constexpr double kExact = 1e-12;
  bool exact = true;
  for (double e : errors) exact = exact && e <= kExact;
  ojson orders = ojson::array();
  bool in_band = true;
  if (!exact) {
    for (std::size_t k = 0; k + 1 < errors.size(); ++k) {
      const double order = std::log(errors[k] / errors[k + 1]) / std::log(static_cast<double>(ns[k + 1]) / ns[k]);
      orders.push_back(order);
      in_band = in_band && order >= 1.8 && order <= 2.2;
      out << "order " << ns[k] << "->" << ns[k + 1] << ": " << fixed6(order) << "\n";
    }
  } else {
    out << "order: exact (all errors <= 1e-12)\n";
  }
  ojson report{{"command", "mms"}, {"problem", a.problem}, {"errors", rows},
               {"exact", exact},   {"orders", orders},     {"pass", exact || in_band}};
  write_file_atomic(a.out + ".mms.json", report.dump(2) + "\n");
  return exact || in_band ? kExitOk : kExitCheck;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Solver for nonlinear Goursat-type integro-differential systems on the unit square"};
  app.require_subcommand(1);

  SolveArgs solve_args;
  auto* solve_cmd = app.add_subcommand("solve", "Solve F(z) = v");
  add_problem_options(solve_cmd, solve_args, true);
  solve_cmd->add_option("--zstar-xy", solve_args.zstar_xy, "Mixed derivative of a reference solution");

  LinsolveArgs lin_args;
  auto* lin_cmd = app.add_subcommand("linsolve", "Solve the linearized equation F'(z0) h = v");
  add_problem_options(lin_cmd, lin_args, true);
  lin_cmd->add_option("--rhs", lin_args.rhs, "Right-hand side: expressions or a grid file")->required();
  lin_cmd->add_option("--linearize-at", lin_args.linearize_at, "Grid file with the g columns of z0");

  VerifyArgs ver_args;
  auto* ver_cmd = app.add_subcommand("verify", "Property suites");
  ver_cmd->add_option("--suite", ver_args.suite, "norms | lemma31 | coercivity | assumptions | contraction")
      ->required();
  ver_cmd->add_option("--problem", ver_args.problem, "Problem document");
  ver_cmd->add_option("--m-list", ver_args.m_list, "Comma-separated weights");
  ver_cmd->add_option("--samples", ver_args.samples, "Number of samples");
  ver_cmd->add_option("--seed", ver_args.seed, "Random seed");
  ver_cmd->add_option("--n", ver_args.cells, "Grid cells per axis");
  ver_cmd->add_option("--g", ver_args.g, "Explicit sample: mixed derivative expressions");
  ver_cmd->add_option("--sample-file", ver_args.sample_file, "Explicit sample: grid file (replay)");
  ver_cmd->add_option("--radii", ver_args.radii, "Probe radii for the assumptions suite");
  ver_cmd->add_option("--out", ver_args.out, "Output prefix");

  SensArgs sens_args;
  auto* sens_cmd = app.add_subcommand("sens", "Directional derivative of v -> z_v with finite-difference check");
  add_problem_options(sens_cmd, sens_args, true);
  sens_cmd->add_option("--direction", sens_args.direction, "Direction dv: expressions or a grid file")->required();
  sens_cmd->add_option("--eps", sens_args.eps, "Comma-separated, strictly decreasing");

  MmsArgs mms_args;
  auto* mms_cmd = app.add_subcommand("mms", "Manufactured-solution convergence study");
  add_problem_options(mms_cmd, mms_args, false);
  mms_cmd->add_option("--zstar-xy", mms_args.zstar_xy, "Mixed derivative of the exact solution");
  mms_cmd->add_option("--zstar", mms_args.zstar, "Exact solution (for the z error column)");
  mms_cmd->add_option("--n-list", mms_args.n_list, "Comma-separated grid sizes");

  std::vector<std::string> storage;
  storage.reserve(args.size() + 1);
  storage.emplace_back("goursat2d");
  storage.insert(storage.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& s : storage) argv.push_back(s.data());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitInput;
  }

  try {
    if (*solve_cmd) return cmd_solve(solve_args, out, err);
    if (*lin_cmd) return cmd_linsolve(lin_args, out, err);
    if (*ver_cmd) return cmd_verify(ver_args, out);
    if (*sens_cmd) return cmd_sens(sens_args, out, err);
    if (*mms_cmd) return cmd_mms(mms_args, out, err);
  } catch (const ThresholdError& e) {
    err << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const SolveFailure& e) {
    err << "error: " << e.what() << "\n";
    return kExitSolve;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return kExitInput;
  }
  return kExitInput;
}

int run(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(args, std::cout, std::cerr);
}

}  // namespace goursat2d::cli
