#include "goursat2d/problem.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include <json.hpp>

#include "goursat2d/io.hpp"
#include "goursat2d/operator.hpp"
#include "goursat2d/polynomial.hpp"

namespace goursat2d {

using json = nlohmann::json;

namespace {

Expr parse_at(const std::string& source, int dim, const std::string& path) {
  try {
    return Expr::parse(source, dim);
  } catch (const ParseError& e) {
    throw e.with_context(path);
  }
}

ExprVector parse_vector(const std::vector<std::string>& sources, int n, int dim, const std::string& path) {
  if (static_cast<int>(sources.size()) != n) {
    throw SchemaError(path, "dimension mismatch: expected " + std::to_string(n) + " entries, got " +
                                std::to_string(sources.size()));
  }
  ExprVector out;
  for (std::size_t k = 0; k < sources.size(); ++k) {
    out.push_back(parse_at(sources[k], dim, path + "[" + std::to_string(k) + "]"));
  }
  return out;
}

ExprMatrix parse_matrix(const std::vector<std::string>& sources, int n, const std::string& path) {
  if (static_cast<int>(sources.size()) != n * n) {
    throw SchemaError(path, "dimension mismatch: expected " + std::to_string(n) + "x" +
                                std::to_string(n) + " entries, got " + std::to_string(sources.size()));
  }
  ExprMatrix m;
  m.n = n;
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c) {
      m.entries.push_back(parse_at(sources[static_cast<std::size_t>(r * n + c)], 0,
                                   path + "[" + std::to_string(r) + "][" + std::to_string(c) + "]"));
    }
  }
  return m;
}

std::string expr_text(const json& node, const std::string& path) {
  if (node.is_string()) return node.get<std::string>();
  if (node.is_number()) {
    std::ostringstream ss;
    ss.precision(17);
    ss << node.get<double>();
    return ss.str();
  }
  throw SchemaError(path, "expected an expression string or a number");
}

const json& require(const json& obj, const char* key, const std::string& path) {
  const auto it = obj.find(key);
  if (it == obj.end()) {
    throw SchemaError(path.empty() ? key : path + "." + key, "missing required field");
  }
  return *it;
}

void require_object(const json& node, const std::string& path) {
  if (!node.is_object()) throw SchemaError(path, "expected an object");
}

void reject_unknown(const json& obj, std::initializer_list<const char*> allowed, const std::string& path) {
  for (const auto& [key, value] : obj.items()) {
    if (std::find_if(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; }) ==
        allowed.end()) {
      throw SchemaError(path.empty() ? key : path + "." + key, "unknown field");
    }
  }
}

std::vector<std::string> vector_sources(const json& node, int n, const std::string& path) {
  std::vector<std::string> out;
  if (node.is_array()) {
    if (static_cast<int>(node.size()) != n) {
      throw SchemaError(path, "dimension mismatch: expected " + std::to_string(n) + " entries, got " +
                                  std::to_string(node.size()));
    }
    for (std::size_t k = 0; k < node.size(); ++k) {
      out.push_back(expr_text(node[k], path + "[" + std::to_string(k) + "]"));
    }
  } else if (n == 1) {
    out.push_back(expr_text(node, path));
  } else {
    throw SchemaError(path, "expected an array of " + std::to_string(n) + " expressions");
  }
  return out;
}

std::vector<std::string> matrix_sources(const json& node, int n, const std::string& path) {
  std::vector<std::string> out;
  if (!node.is_array()) {
    if (n == 1) return {expr_text(node, path)};
    throw SchemaError(path, "expected an array of " + std::to_string(n) + " rows");
  }
  if (static_cast<int>(node.size()) != n) {
    throw SchemaError(path, "dimension mismatch: expected " + std::to_string(n) + " rows, got " +
                                std::to_string(node.size()));
  }
  for (std::size_t r = 0; r < node.size(); ++r) {
    const std::string row_path = path + "[" + std::to_string(r) + "]";
    if (!node[r].is_array() || static_cast<int>(node[r].size()) != n) {
      throw SchemaError(row_path, "dimension mismatch: expected a row of " + std::to_string(n) + " entries");
    }
    for (std::size_t c = 0; c < node[r].size(); ++c) {
      out.push_back(expr_text(node[r][c], row_path + "[" + std::to_string(c) + "]"));
    }
  }
  return out;
}

json vector_json(const ExprVector& v) {
  json arr = json::array();
  for (const auto& e : v) arr.push_back(e.to_string());
  return arr;
}

json matrix_json(const ExprMatrix& m) {
  json rows = json::array();
  for (int r = 0; r < m.n; ++r) {
    json row = json::array();
    for (int c = 0; c < m.n; ++c) row.push_back(m(r, c).to_string());
    rows.push_back(row);
  }
  return rows;
}

double radical_inverse(std::uint64_t index, std::uint64_t base) {
  double result = 0.0;
  double f = 1.0 / static_cast<double>(base);
  while (index > 0) {
    result += f * static_cast<double>(index % base);
    index /= base;
    f /= static_cast<double>(base);
  }
  return result;
}

constexpr std::uint64_t kPrimes[] = {2,  3,  5,  7,  11, 13, 17, 19, 23, 29, 31, 37, 41,
                                     43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89, 97};

std::string describe_point(double x, double y, std::span<const double> z) {
  std::ostringstream ss;
  ss.precision(17);
  ss << "at sample (x=" << x << ", y=" << y;
  if (!z.empty()) {
    ss << ", z=[";
    for (std::size_t k = 0; k < z.size(); ++k) ss << (k ? ", " : "") << z[k];
    ss << "]";
  }
  ss << ")";
  return ss.str();
}

double euclid(std::span<const double> v) {
  double s = 0.0;
  for (double a : v) s += a * a;
  return std::sqrt(s);
}

}  // namespace

ProblemSpec zero_problem(int n) {
  const std::vector<std::string> zeros_v(static_cast<std::size_t>(n), "0");
  const std::vector<std::string> zeros_m(static_cast<std::size_t>(n * n), "0");
  return make_problem(n, zeros_v, zeros_v, zeros_m, zeros_m, zeros_m, zeros_m, 0.0, "0");
}

ProblemSpec make_problem(int n, const std::vector<std::string>& f1, const std::vector<std::string>& f2,
                         const std::vector<std::string>& A1, const std::vector<std::string>& A2,
                         const std::vector<std::string>& A1x, const std::vector<std::string>& A2y,
                         double B, const std::string& b) {
  if (n < 1) throw SchemaError("meta.n", "state dimension must be a positive integer");
  if (!(B >= 0.0) || !std::isfinite(B)) throw SchemaError("meta.B", "B must be a finite number >= 0");
  ProblemSpec spec;
  spec.n = n;
  spec.f1 = parse_vector(f1, n, n, "functions.f1");
  spec.f2 = parse_vector(f2, n, n, "functions.f2");
  spec.A1 = parse_matrix(A1, n, "coefficients.A1");
  spec.A2 = parse_matrix(A2, n, "coefficients.A2");
  spec.A1x = parse_matrix(A1x, n, "coefficients.A1x");
  spec.A2y = parse_matrix(A2y, n, "coefficients.A2y");
  spec.B = B;
  spec.b = parse_at(b, 0, "meta.b");
  return spec;
}

ProblemSpec load_problem(std::string_view document, const std::filesystem::path& base_dir) {
  json root;
  try {
    root = json::parse(document);
  } catch (const json::parse_error& e) {
    throw SchemaError("", std::string("malformed JSON: ") + e.what());
  }
  require_object(root, "document");
  reject_unknown(root, {"name", "description", "meta", "functions", "coefficients", "rhs", "solver"}, "");

  const json& meta = require(root, "meta", "");
  require_object(meta, "meta");
  reject_unknown(meta, {"n", "B", "b"}, "meta");
  const json& n_node = require(meta, "n", "meta");
  if (!n_node.is_number_integer() || n_node.get<long long>() < 1 || n_node.get<long long>() > 64) {
    throw SchemaError("meta.n", "state dimension must be an integer in [1, 64]");
  }
  const int n = n_node.get<int>();
  const json& B_node = require(meta, "B", "meta");
  if (!B_node.is_number()) throw SchemaError("meta.B", "expected a number");
  const std::string b = meta.contains("b") ? expr_text(meta["b"], "meta.b") : "0";

  const json& functions = require(root, "functions", "");
  require_object(functions, "functions");
  reject_unknown(functions, {"f1", "f2"}, "functions");
  const json& coefficients = require(root, "coefficients", "");
  require_object(coefficients, "coefficients");
  reject_unknown(coefficients, {"A1", "A2", "A1x", "A2y"}, "coefficients");

  ProblemSpec spec = make_problem(
      n, vector_sources(require(functions, "f1", "functions"), n, "functions.f1"),
      vector_sources(require(functions, "f2", "functions"), n, "functions.f2"),
      matrix_sources(require(coefficients, "A1", "coefficients"), n, "coefficients.A1"),
      matrix_sources(require(coefficients, "A2", "coefficients"), n, "coefficients.A2"),
      matrix_sources(require(coefficients, "A1x", "coefficients"), n, "coefficients.A1x"),
      matrix_sources(require(coefficients, "A2y", "coefficients"), n, "coefficients.A2y"),
      B_node.get<double>(), b);

  if (root.contains("rhs")) {
    const json& rhs = root["rhs"];
    require_object(rhs, "rhs");
    reject_unknown(rhs, {"v", "grid", "zstar_xy"}, "rhs");
    if (rhs.size() != 1) throw SchemaError("rhs", "expected exactly one of v, grid, zstar_xy");
    if (rhs.contains("v")) {
      spec.v = parse_vector(vector_sources(rhs["v"], n, "rhs.v"), n, 0, "rhs.v");
    } else if (rhs.contains("zstar_xy")) {
      spec.zstar_xy = parse_vector(vector_sources(rhs["zstar_xy"], n, "rhs.zstar_xy"), n, 0, "rhs.zstar_xy");
    } else {
      if (!rhs["grid"].is_string()) throw SchemaError("rhs.grid", "expected a file path");
      std::filesystem::path path = rhs["grid"].get<std::string>();
      if (path.is_relative()) path = base_dir / path;
      GridFile file = read_grid_file(path);
      auto it = file.groups.find("v");
      if (it == file.groups.end()) it = file.groups.find("g");
      if (it == file.groups.end()) throw SchemaError("rhs.grid", "grid file has no 'v' or 'g' columns");
      if (it->second.dim() != n) throw SchemaError("rhs.grid", "dimension mismatch with meta.n");
      spec.v = it->second;
    }
  }
  return spec;
}

ProblemSpec load_problem_file(const std::filesystem::path& path) {
  return load_problem(read_text_file(path), path.parent_path());
}

std::string serialize_problem(const ProblemSpec& spec) {
  nlohmann::ordered_json root;
  root["meta"]["n"] = spec.n;
  root["meta"]["B"] = spec.B;
  root["meta"]["b"] = spec.b.to_string();
  root["functions"]["f1"] = vector_json(spec.f1);
  root["functions"]["f2"] = vector_json(spec.f2);
  root["coefficients"]["A1"] = matrix_json(spec.A1);
  root["coefficients"]["A2"] = matrix_json(spec.A2);
  root["coefficients"]["A1x"] = matrix_json(spec.A1x);
  root["coefficients"]["A2y"] = matrix_json(spec.A2y);
  if (const auto* v = std::get_if<ExprVector>(&spec.v)) {
    root["rhs"]["v"] = vector_json(*v);
  } else if (!spec.zstar_xy.empty()) {
    root["rhs"]["zstar_xy"] = vector_json(spec.zstar_xy);
  }
  return root.dump(2) + "\n";
}

ProblemSpec make_kernel_example(const KernelExampleParams& p) {
  if (p.k <= 1 || p.l <= 1) {
    throw InvalidArgument("kernel example needs integer exponents k, l > 1 (got k=" +
                          std::to_string(p.k) + ", l=" + std::to_string(p.l) + ")");
  }
  auto poly = [](const std::string& src, const char* name) {
    try {
      return Polynomial::from_expr(Expr::parse(src, 0));
    } catch (const ParseError& e) {
      throw e.with_context(name);
    }
  };
  const Polynomial w1 = poly(p.w1, "w1");
  const Polynomial w2 = poly(p.w2, "w2");
  const Polynomial A1 = poly(p.A1, "A1");
  const Polynomial A2 = poly(p.A2, "A2");
  const Polynomial A1x = A1.d_dx();
  const Polynomial A2y = A2.d_dy();

  const std::string f1 = "(" + w1.to_string() + ") * (z1^3/(1 + z1^2) + cos(z1^" + std::to_string(p.k) + "))";
  const std::string f2 = "(" + w2.to_string() + ") * (z1 - 1)/(1 + z1^2) + sin(z1^" + std::to_string(p.l) + ")";

  // |z^3/(1+z^2)| <= |z| and |cos| <= 1 give |f1| <= |w1| |z| + |w1|;
  // sup |z-1|/(1+z^2) = (1+sqrt 2)/2 and |sin| <= 1 bound |f2| by a constant.
  const double sw1 = w1.sup_bound_on_unit_square();
  const double sw2 = w2.sup_bound_on_unit_square();
  const double B = std::max({sw1, A1.sup_bound_on_unit_square(), A2.sup_bound_on_unit_square(),
                             A1x.sup_bound_on_unit_square(), A2y.sup_bound_on_unit_square()});
  const double b = std::max(sw1, sw2 * 0.5 * (1.0 + std::numbers::sqrt2) + 1.0);
  std::ostringstream bs;
  bs.precision(17);
  bs << b;

  return make_problem(1, {f1}, {f2}, {A1.to_string()}, {A2.to_string()}, {A1x.to_string()},
                      {A2y.to_string()}, B, bs.str());
}

void eval_vector(const ExprVector& exprs, double x, double y, std::span<const double> z,
                 std::span<double> out) {
  for (std::size_t k = 0; k < exprs.size(); ++k) out[k] = exprs[k].eval(x, y, z);
}

void eval_matrix(const ExprMatrix& m, double x, double y, std::span<double> out) {
  for (std::size_t k = 0; k < m.entries.size(); ++k) out[k] = m.entries[k].eval(x, y, {});
}

double spectral_norm(std::span<const double> a, int n) {
  if (n == 1) return std::abs(a[0]);
  const auto un = static_cast<std::size_t>(n);
  // Power iteration on A^T A from a start vector with no special structure.
  std::vector<double> v(un), w(un), u(un);
  for (std::size_t k = 0; k < un; ++k) v[k] = 1.0 + 0.1 * static_cast<double>(k);
  double sigma = 0.0;
  for (int it = 0; it < 200; ++it) {
    const double nv = euclid(v);
    if (nv == 0.0) return 0.0;
    for (double& c : v) c /= nv;
    for (std::size_t r = 0; r < un; ++r) {
      double s = 0.0;
      for (std::size_t c = 0; c < un; ++c) s += a[r * un + c] * v[c];
      u[r] = s;
    }
    for (std::size_t c = 0; c < un; ++c) {
      double s = 0.0;
      for (std::size_t r = 0; r < un; ++r) s += a[r * un + c] * u[r];
      w[c] = s;
    }
    const double next = std::sqrt(euclid(w));
    const bool settled = std::abs(next - sigma) <= 1e-15 * std::max(1.0, next);
    sigma = next;
    v.swap(w);
    if (settled) break;
  }
  return sigma;
}

GridField sample_exprs(const ExprVector& exprs, const Grid& grid) {
  return GridField::sample(grid, static_cast<int>(exprs.size()),
                           [&](double x, double y, std::span<double> out) {
                             try {
                               eval_vector(exprs, x, y, {}, out);
                             } catch (const EvalFault& e) {
                               throw e.with_context(describe_point(x, y, {}));
                             }
                           });
}

GridField rhs_on(const ProblemSpec& spec, const Grid& grid) {
  if (const auto* exprs = std::get_if<ExprVector>(&spec.v)) return sample_exprs(*exprs, grid);
  if (const auto* field = std::get_if<GridField>(&spec.v)) {
    if (field->grid() == grid) return *field;
    return restrict_to(*field, grid);
  }
  throw InvalidArgument("problem has no right-hand side v");
}

ExprVector parse_field_exprs(const std::vector<std::string>& sources, int n) {
  return parse_vector(sources, n, 0, "field");
}

double AssumptionReport::M_for(double rho) const {
  double best_rho = -1.0;
  double M = -1.0;
  for (const auto& r : radii) {
    if (r.rho >= rho && (best_rho < 0.0 || r.rho < best_rho)) {
      best_rho = r.rho;
      M = r.M;
    }
  }
  return M;
}

AssumptionReport probe_assumptions(const ProblemSpec& spec, int sample_count,
                                   std::span<const double> radii_in) {
  if (sample_count < 1) throw InvalidArgument("probe needs at least one sample");
  std::vector<double> radii(radii_in.begin(), radii_in.end());
  if (radii.empty()) radii.push_back(1.0);
  for (double r : radii) {
    if (!(r > 0.0) || !std::isfinite(r)) throw InvalidArgument("probe radii must be positive");
  }
  const int n = spec.n;
  const auto un = static_cast<std::size_t>(n);
  constexpr std::size_t kMaxDims = std::size(kPrimes) - 3;
  if (un > kMaxDims) throw InvalidArgument("probe supports n <= " + std::to_string(kMaxDims));

  AssumptionReport rep;
  rep.samples = sample_count;
  rep.B = spec.B;
  rep.b_min = std::numeric_limits<double>::infinity();

  std::vector<double> z(un), f(un), jac(un * un), mat(un * un), mat2(un * un), grad(un);
  const double slack = 1e-9;

  for (int s = 1; s <= sample_count; ++s) {
    const auto idx = static_cast<std::uint64_t>(s);
    const double x = radical_inverse(idx, 2);
    const double y = radical_inverse(idx, 3);
    double bval = 0.0;
    try {
      bval = spec.b.eval(x, y, {});
      rep.b_min = std::min(rep.b_min, bval);
      eval_matrix(spec.A1, x, y, mat);
      rep.sup_A1 = std::max(rep.sup_A1, spectral_norm(mat, n));
      eval_matrix(spec.A2, x, y, mat);
      rep.sup_A2 = std::max(rep.sup_A2, spectral_norm(mat, n));
      eval_matrix(spec.A1x, x, y, mat);
      rep.sup_A1x = std::max(rep.sup_A1x, spectral_norm(mat, n));
      eval_matrix(spec.A2y, x, y, mat);
      rep.sup_A2y = std::max(rep.sup_A2y, spectral_norm(mat, n));
    } catch (const EvalFault& e) {
      throw e.with_context(describe_point(x, y, {}));
    }

    // Direction and radial fraction of the z sample.
    for (std::size_t c = 0; c < un; ++c) z[c] = 2.0 * radical_inverse(idx, kPrimes[2 + c]) - 1.0;
    double len = euclid(z);
    if (len == 0.0) {
      z[0] = 1.0;
      len = 1.0;
    }
    const double frac = radical_inverse(idx, kPrimes[2 + un]);

    rep.radii.resize(radii.size());
    for (std::size_t r = 0; r < radii.size(); ++r) {
      RadiusProbe& probe = rep.radii[r];
      probe.rho = radii[r];
      std::vector<double> zr(un);
      for (std::size_t c = 0; c < un; ++c) zr[c] = z[c] / len * radii[r] * frac;
      const double zn = euclid(zr);
      const double majorant = spec.B * zn + bval;
      for (int which = 0; which < 2; ++which) {
        const ExprVector& fv = which == 0 ? spec.f1 : spec.f2;
        try {
          for (std::size_t k = 0; k < un; ++k) {
            bool kink = false;
            f[k] = fv[k].eval_gradient(x, y, zr, grad, &kink);
            rep.kink_flagged = rep.kink_flagged || kink;
            std::copy(grad.begin(), grad.end(), jac.begin() + static_cast<std::ptrdiff_t>(k * un));
          }
        } catch (const EvalFault& e) {
          throw e.with_context(std::string(which == 0 ? "in f1 " : "in f2 ") + describe_point(x, y, zr));
        }
        const double fn = euclid(f);
        const double ratio = majorant > 0.0 ? fn / majorant : (fn > 0.0 ? INFINITY : 0.0);
        double& worst = which == 0 ? rep.growth_ratio_f1 : rep.growth_ratio_f2;
        worst = std::max(worst, ratio);
        if (fn > majorant * (1.0 + slack) + 1e-12) rep.growth_pass = false;
        const double jn = spectral_norm(jac, n);
        double& sup = which == 0 ? probe.sup_fz1 : probe.sup_fz2;
        sup = std::max(sup, jn);
      }
      probe.M = std::max(probe.sup_fz1, probe.sup_fz2);
    }
  }

  // A1x against centered differences of A1 in x, A2y against A2 in y.
  constexpr double kStep = 1e-4;
  for (int s = 1; s <= sample_count; ++s) {
    const auto idx = static_cast<std::uint64_t>(s);
    const double x = kStep + (1.0 - 2.0 * kStep) * radical_inverse(idx, 2);
    const double y = kStep + (1.0 - 2.0 * kStep) * radical_inverse(idx, 3);
    try {
      eval_matrix(spec.A1x, x, y, jac);
      eval_matrix(spec.A1, x + kStep, y, mat);
      eval_matrix(spec.A1, x - kStep, y, mat2);
      for (std::size_t k = 0; k < un * un; ++k) {
        const double fd = (mat[k] - mat2[k]) / (2.0 * kStep);
        rep.derivative_residual_A1x =
            std::max(rep.derivative_residual_A1x, std::abs(jac[k] - fd) / (1.0 + std::abs(jac[k])));
      }
      eval_matrix(spec.A2y, x, y, jac);
      eval_matrix(spec.A2, x, y + kStep, mat);
      eval_matrix(spec.A2, x, y - kStep, mat2);
      for (std::size_t k = 0; k < un * un; ++k) {
        const double fd = (mat[k] - mat2[k]) / (2.0 * kStep);
        rep.derivative_residual_A2y =
            std::max(rep.derivative_residual_A2y, std::abs(jac[k] - fd) / (1.0 + std::abs(jac[k])));
      }
    } catch (const EvalFault& e) {
      throw e.with_context(describe_point(x, y, {}));
    }
  }

  rep.b_nonnegative = rep.b_min >= 0.0;
  const double bound = spec.B * (1.0 + slack);
  rep.coefficient_pass = rep.sup_A1 <= bound && rep.sup_A2 <= bound && rep.sup_A1x <= bound &&
                         rep.sup_A2y <= bound;
  rep.derivative_pass = rep.derivative_residual_A1x <= 1e-4 && rep.derivative_residual_A2y <= 1e-4;
  for (const auto& r : rep.radii) {
    if (!std::isfinite(r.M)) rep.failures.push_back("(C3) boundedness of f_z");
  }
  if (!rep.growth_pass) rep.failures.push_back("(C2) growth");
  if (!rep.b_nonnegative) rep.failures.push_back("(C2) b >= 0");
  if (!rep.coefficient_pass) rep.failures.push_back("(C2) coefficient bound");
  if (!rep.derivative_pass) rep.failures.push_back("(C1) A1x/A2y consistency");
  rep.pass = rep.failures.empty();
  return rep;
}

bool is_affine_in_z(const ProblemSpec& spec, int sample_count) {
  const auto un = static_cast<std::size_t>(spec.n);
  std::vector<double> z(un), grad(un), ref(2 * un * un), jac(2 * un * un);
  for (int s = 1; s <= sample_count; ++s) {
    const auto idx = static_cast<std::uint64_t>(s);
    const double x = radical_inverse(idx, 2);
    const double y = radical_inverse(idx, 3);
    for (std::size_t c = 0; c < un; ++c) z[c] = 10.0 * (2.0 * radical_inverse(idx, kPrimes[(2 + c) % std::size(kPrimes)]) - 1.0);
    // Compare against the Jacobian at z = 0 for the same (x, y).
    for (int pass = 0; pass < 2; ++pass) {
      std::vector<double>& out = pass == 0 ? ref : jac;
      std::vector<double> zp = pass == 0 ? std::vector<double>(un, 0.0) : z;
      for (int which = 0; which < 2; ++which) {
        const ExprVector& fv = which == 0 ? spec.f1 : spec.f2;
        for (std::size_t k = 0; k < un; ++k) {
          try {
            fv[k].eval_gradient(x, y, zp, grad, nullptr);
          } catch (const EvalFault&) {
            return false;
          }
          std::copy(grad.begin(), grad.end(),
                    out.begin() + static_cast<std::ptrdiff_t>((static_cast<std::size_t>(which) * un + k) * un));
        }
      }
    }
    for (std::size_t k = 0; k < ref.size(); ++k) {
      if (std::abs(jac[k] - ref[k]) > 1e-12 * std::max(1.0, std::abs(ref[k]))) return false;
    }
  }
  return true;
}

ProblemSpec manufacture_problem(const ProblemSpec& base, const Grid& grid, const ExprVector& zstar_xy) {
  if (static_cast<int>(zstar_xy.size()) != base.n) {
    throw ShapeError("manufactured solution has " + std::to_string(zstar_xy.size()) +
                     " components, problem has n=" + std::to_string(base.n));
  }
  auto spec = std::make_shared<ProblemSpec>(base);
  spec->v = std::monostate{};
  spec->zstar_xy.clear();
  const Grid fine(grid.cells() * 4);
  const OperatorContext ctx(spec, fine, 0.0);
  const GridField v_fine = apply_F(ctx, sample_exprs(zstar_xy, fine));
  ProblemSpec out = base;
  out.v = restrict_to(v_fine, grid);
  out.zstar_xy = zstar_xy;
  return out;
}

}  // namespace goursat2d
