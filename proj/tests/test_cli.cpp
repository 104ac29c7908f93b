#include <doctest.h>

#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "goursat2d/cli.hpp"
#include "goursat2d/io.hpp"
#include "goursat2d/operator.hpp"
#include "test_util.hpp"

using namespace goursat2d;
using testutil::problem_path;

namespace {

struct Run {
  int code = -1;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  std::ostringstream out, err;
  Run r;
  r.code = cli::run(args, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

nlohmann::json read_json(const std::string& path) { return nlohmann::json::parse(read_text_file(path)); }

const char* kStrong = R"({
  "meta": {"n": 1, "B": 100},
  "functions": {"f1": "100*z1", "f2": "0"},
  "coefficients": {"A1": "0", "A2": "0", "A1x": "0", "A2y": "0"},
  "rhs": {"v": "1"}
})";

}  // namespace

TEST_CASE("usage errors") {
  CHECK(run({}).code == cli::kExitInput);
  CHECK(run({"frobnicate"}).code == cli::kExitInput);
  CHECK(run({"solve", "--n", "8"}).code == cli::kExitInput);
  CHECK(run({"--help"}).code == cli::kExitOk);
  CHECK(run({"solve", "--help"}).code == cli::kExitOk);
}

TEST_CASE("solve") {
  const testutil::TempDir dir("cli_solve");
  const std::string prefix = dir.file("zero");

  SUBCASE("zero problem: z = xy") {
    const Run r = run({"solve", "--problem", problem_path("zero"), "--n", "16", "--out", prefix});
    CHECK(r.code == cli::kExitOk);
    CHECK(r.out.find("converged in 1 iterations") != std::string::npos);
    const GridFile grid = read_grid_file(prefix + ".grid.csv");
    CHECK(grid.grid.cells() == 16);
    CHECK(grid.groups.at("z")(16, 16) == 1.0);
    CHECK(grid.groups.at("z")(8, 4) == doctest::Approx(0.125));
    const auto rep = read_json(prefix + ".report.json");
    CHECK(rep["command"] == "solve");
    CHECK(rep["solve"]["converged"] == true);
    CHECK(rep["contraction"]["rho_hat"] == 0.0);
    CHECK(rep["assumptions"]["pass"] == true);
  }
  SUBCASE("manufactured problem reports the error against z*") {
    const Run r = run({"solve", "--problem", problem_path("manufactured_linear_A"), "--n", "32", "--out", prefix});
    CHECK(r.code == cli::kExitOk);
    const auto rep = read_json(prefix + ".report.json");
    CHECK(rep["solve"]["residual"]["classical"].get<double>() <= 1e-10);
    const double h = 1.0 / 32;
    CHECK(rep["error_vs_zstar"]["z_classical"].get<double>() <= h * h);
    CHECK(rep["error_vs_zstar"]["g_classical"].get<double>() <= 10 * h * h);
  }
  SUBCASE("emitted grid reproduces the reported residual") {
    for (const char* name : {"kernel_example", "rotation_2d"}) {
      INFO(name);
      REQUIRE(run({"solve", "--problem", problem_path(name), "--n", "16", "--out", prefix}).code == cli::kExitOk);
      const auto rep = read_json(prefix + ".report.json");
      const GridFile grid = read_grid_file(prefix + ".grid.csv");
      const ProblemSpec spec = load_problem_file(problem_path(name));
      const OperatorContext ctx(spec, grid.grid, rep["solve"]["m_used"].get<double>());
      const Residual res = residual(ctx, grid.groups.at("g"), rhs_on(spec, grid.grid));
      const double classical = rep["solve"]["residual"]["classical"].get<double>();
      const double weighted = rep["solve"]["residual"]["weighted"].get<double>();
      CHECK(std::abs(res.classical - classical) <= 1e-12 * std::max(classical, 1e-300) + 1e-300);
      CHECK(std::abs(res.weighted - weighted) <= 1e-12 * std::max(weighted, 1e-300) + 1e-300);
      const StateTriple s = reconstruct_state(grid.groups.at("g"));
      CHECK(s.z == grid.groups.at("z"));
    }
  }
  SUBCASE("determinism") {
    const std::vector<std::string> args{"solve", "--problem", problem_path("kernel_example"), "--n", "16",
                                        "--seed", "5", "--out", prefix};
    REQUIRE(run(args).code == cli::kExitOk);
    const std::string grid1 = read_text_file(prefix + ".grid.csv");
    const std::string report1 = read_text_file(prefix + ".report.json");
    REQUIRE(run(args).code == cli::kExitOk);
    CHECK(read_text_file(prefix + ".grid.csv") == grid1);
    CHECK(read_text_file(prefix + ".report.json") == report1);
  }
  SUBCASE("non-convergence exits 2 and still writes the report") {
    const Run r = run({"solve", "--problem", problem_path("kernel_example"), "--n", "16", "--max-iter", "1",
                       "--tol", "1e-14", "--out", prefix});
    CHECK(r.code == cli::kExitSolve);
    const auto rep = read_json(prefix + ".report.json");
    CHECK(rep["failure"]["kind"] == "no_convergence");
    CHECK(rep["solve"]["converged"] == false);
  }
  SUBCASE("input errors exit 1") {
    write_file_atomic(dir.file("bad.json"), R"({"meta": {"n": 1, "B": 1}, "functions": {"f1": "z1 +* 2", "f2": "0"},
      "coefficients": {"A1": "0", "A2": "0", "A1x": "0", "A2y": "0"}, "rhs": {"v": "1"}})");
    const Run bad = run({"solve", "--problem", dir.file("bad.json"), "--n", "8", "--out", prefix});
    CHECK(bad.code == cli::kExitInput);
    CHECK(bad.err.find("functions.f1") != std::string::npos);
    CHECK(bad.err.find("offset") != std::string::npos);
    CHECK(run({"solve", "--problem", dir.file("missing.json"), "--n", "8"}).code == cli::kExitInput);
    CHECK(run({"solve", "--problem", problem_path("zero"), "--n", "1"}).code == cli::kExitInput);
    CHECK(run({"solve", "--problem", problem_path("zero"), "--n", "8", "--method", "jacobi"}).code ==
          cli::kExitInput);
    CHECK(run({"solve", "--problem", problem_path("zero"), "--n", "8", "--m", "-3"}).code == cli::kExitInput);
  }
}

TEST_CASE("linsolve") {
  const testutil::TempDir dir("cli_linsolve");
  const std::string prefix = dir.file("lin");
  SUBCASE("zero problem: h = xy, linearized at zero") {
    const Run r = run({"linsolve", "--problem", problem_path("zero"), "--n", "8", "--rhs", "1", "--out", prefix});
    CHECK(r.code == cli::kExitOk);
    const GridFile grid = read_grid_file(prefix + ".grid.csv");
    CHECK(grid.groups.at("z")(4, 8) == doctest::Approx(0.5));
    const auto rep = read_json(prefix + ".report.json");
    CHECK(rep["linearize_at"] == "zero");
    CHECK(rep["solve"]["trace"].size() == 1);
  }
  SUBCASE("linearization point and right-hand side from grid files") {
    REQUIRE(run({"solve", "--problem", problem_path("kernel_example"), "--n", "16", "--out", prefix}).code == 0);
    const Run r = run({"linsolve", "--problem", problem_path("kernel_example"), "--n", "16", "--rhs",
                       prefix + ".grid.csv", "--linearize-at", prefix + ".grid.csv", "--out", dir.file("h")});
    CHECK(r.code == cli::kExitOk);
    CHECK(read_json(dir.file("h.report.json"))["linearize_at"] == prefix + ".grid.csv");
  }
  SUBCASE("small m warns and diverges") {
    write_file_atomic(dir.file("strong.json"), kStrong);
    const Run r = run({"linsolve", "--problem", dir.file("strong.json"), "--n", "16", "--rhs", "1", "--m", "1",
                       "--out", prefix});
    CHECK(r.code == cli::kExitSolve);
    CHECK(r.err.find("warning") != std::string::npos);
    CHECK(r.err.find("measured ratio") != std::string::npos);
    CHECK(r.err.find("m > 2√d") != std::string::npos);
    CHECK(read_json(prefix + ".report.json")["failure"]["kind"] == "divergence");
  }
  SUBCASE("bad right-hand side") {
    CHECK(run({"linsolve", "--problem", problem_path("rotation_2d"), "--n", "8", "--rhs", "1"}).code ==
          cli::kExitInput);
    CHECK(run({"linsolve", "--problem", problem_path("zero"), "--n", "8", "--rhs", "foo(x)"}).code ==
          cli::kExitInput);
  }
}

TEST_CASE("verify") {
  const testutil::TempDir dir("cli_verify");
  const std::string prefix = dir.file("v");
  SUBCASE("norms on z = xy at m = 1") {
    const Run r = run({"verify", "--suite", "norms", "--g", "1", "--m-list", "1", "--n", "64", "--out", prefix});
    CHECK(r.code == cli::kExitOk);
    CHECK(r.out.find("weighted=0.632") != std::string::npos);
    CHECK(r.out.find("lower=0.135335") != std::string::npos);
    const auto rep = read_json(prefix + ".verify.json");
    CHECK(rep["pass"] == true);
    CHECK(rep["checks"][0]["weighted"].get<double>() == doctest::Approx(1 - std::exp(-1.0)).epsilon(1e-3));
  }
  SUBCASE("lemma31 and norms suites with their defaults") {
    CHECK(run({"verify", "--suite", "lemma31", "--samples", "20", "--out", prefix}).code == cli::kExitOk);
    CHECK(run({"verify", "--suite", "norms", "--samples", "10", "--out", prefix}).code == cli::kExitOk);
  }
  SUBCASE("coercivity and contraction") {
    CHECK(run({"verify", "--suite", "coercivity", "--problem", problem_path("kernel_example"), "--samples", "6",
               "--out", prefix})
              .code == cli::kExitOk);
    CHECK(run({"verify", "--suite", "coercivity", "--problem", problem_path("kernel_example"), "--m-list", "4",
               "--out", prefix})
              .code == cli::kExitInput);
    CHECK(run({"verify", "--suite", "contraction", "--problem", problem_path("rotation_2d"), "--out", prefix})
              .code == cli::kExitOk);
  }
  SUBCASE("assumption failures exit 3 naming the condition") {
    const Run r = run({"verify", "--suite", "assumptions", "--problem", problem_path("exp_growth"), "--out", prefix});
    CHECK(r.code == cli::kExitCheck);
    CHECK(r.out.find("FAIL assumptions condition=(C2) growth") != std::string::npos);
    CHECK(run({"verify", "--suite", "assumptions", "--problem", problem_path("kernel_example"), "--out", prefix})
              .code == cli::kExitOk);
  }
  SUBCASE("a failing sample is written and replays") {
    write_file_atomic(dir.file("strong.json"), kStrong);
    CHECK(run({"verify", "--suite", "contraction", "--problem", dir.file("strong.json"), "--m-list", "1", "--out",
               prefix})
              .code == cli::kExitCheck);
    // f1 = -10 violates the growth bound declared with b = 0, so F vanishes at g = 10.
    write_file_atomic(dir.file("wrong_b.json"), R"({"meta": {"n": 1, "B": 0, "b": "0"},
      "functions": {"f1": "-10", "f2": "0"},
      "coefficients": {"A1": "0", "A2": "0", "A1x": "0", "A2y": "0"}})");
    const Run r = run({"verify", "--suite", "coercivity", "--problem", dir.file("wrong_b.json"), "--g", "10", "--n",
                       "8", "--out", prefix});
    CHECK(r.code == cli::kExitCheck);
    CHECK(r.out.find("FAIL coercivity sample=0") != std::string::npos);
    const auto rep = read_json(prefix + ".verify.json");
    const std::string failing = rep["failing_sample"]["path"];
    CHECK(failing == prefix + ".failing.grid.csv");
    CHECK(read_grid_file(failing).groups.at("g")(3, 5) == 10.0);
    const Run replay = run({"verify", "--suite", "coercivity", "--problem", dir.file("wrong_b.json"), "--sample-file",
                            failing, "--n", "8", "--out", dir.file("replay")});
    CHECK(replay.code == cli::kExitCheck);

    const GridField g = testutil::field(Grid(32), [](double x, double y) { return std::sin(7 * x) * y; });
    write_file_atomic(dir.file("g.csv"), format_grid_csv({{"g", &g}}));
    const Run ok = run({"verify", "--suite", "lemma31", "--sample-file", dir.file("g.csv"), "--out", prefix});
    CHECK(ok.code == cli::kExitOk);
    CHECK(ok.out.find("sample=0") != std::string::npos);
  }
  SUBCASE("input errors") {
    CHECK(run({"verify", "--suite", "bogus"}).code == cli::kExitInput);
    CHECK(run({"verify", "--suite", "coercivity"}).code == cli::kExitInput);
    CHECK(run({"verify", "--suite", "norms", "--m-list", "1,x"}).code == cli::kExitInput);
  }
}

TEST_CASE("sens") {
  const testutil::TempDir dir("cli_sens");
  const std::string prefix = dir.file("s");
  SUBCASE("zero problem is exact") {
    const Run r = run({"sens", "--problem", problem_path("zero"), "--n", "16", "--direction", "x*y", "--out", prefix});
    CHECK(r.code == cli::kExitOk);
    const auto rep = read_json(prefix + ".report.json");
    for (const auto& e : rep["fd_errors"]) CHECK(e["error"].get<double>() <= 1e-10);
    CHECK(read_grid_file(prefix + ".grid.csv").groups.at("g")(16, 16) == doctest::Approx(1.0));
  }
  SUBCASE("kernel example") {
    const Run r = run({"sens", "--problem", problem_path("kernel_example"), "--n", "16", "--direction",
                       "exp(-(x-0.5)^2 - y^2)", "--out", prefix});
    CHECK(r.code == cli::kExitOk);
    CHECK(r.out.find("validation passed") != std::string::npos);
  }
  SUBCASE("eps below the floor") {
    const Run r = run({"sens", "--problem", problem_path("zero"), "--n", "8", "--direction", "1", "--eps",
                       "1e-1,1e-2,1e-9", "--out", prefix});
    CHECK(r.code == cli::kExitInput);
    CHECK(r.err.find("floor 1e-08") != std::string::npos);
    CHECK(run({"sens", "--problem", problem_path("zero"), "--n", "8", "--direction", "1", "--eps", "1e-1,1e-2",
               "--out", prefix})
              .code == cli::kExitInput);
  }
  SUBCASE("inner failure exits 2") {
    CHECK(run({"sens", "--problem", problem_path("kernel_example"), "--n", "16", "--direction", "1", "--max-iter",
               "1", "--tol", "1e-14", "--eps", "1e-1,1e-2,1e-3", "--out", prefix})
              .code == cli::kExitSolve);
  }
  SUBCASE("failed validation exits 3") {
    // Steps so large that the first-order remainder dominates.
    const Run r = run({"sens", "--problem", problem_path("kernel_example"), "--n", "16", "--direction", "1",
                       "--eps", "8,4,2", "--out", prefix});
    CHECK(r.code == cli::kExitCheck);
    CHECK(r.out.find("validation failed") != std::string::npos);
  }
}

TEST_CASE("mms") {
  const testutil::TempDir dir("cli_mms");
  const std::string prefix = dir.file("m");
  SUBCASE("zero problem is exact") {
    const Run r = run({"mms", "--problem", problem_path("zero"), "--zstar-xy", "1", "--zstar", "x*y", "--out", prefix});
    CHECK(r.code == cli::kExitOk);
    CHECK(r.out.find("exact") != std::string::npos);
    CHECK(read_json(prefix + ".mms.json")["exact"] == true);
  }
  SUBCASE("second order on the linear and kernel problems") {
    for (const char* name : {"linear_A", "kernel_example"}) {
      INFO(name);
      const Run r = run({"mms", "--problem", problem_path(name), "--zstar-xy", "exp(x)*cos(y)", "--out", prefix});
      CHECK(r.code == cli::kExitOk);
      const auto rep = read_json(prefix + ".mms.json");
      CHECK(rep["exact"] == false);
      REQUIRE(rep["orders"].size() == 2);
      for (const auto& o : rep["orders"]) {
        CHECK(o.get<double>() >= 1.8);
        CHECK(o.get<double>() <= 2.2);
      }
    }
    CHECK(run({"mms", "--problem", problem_path("manufactured_linear_A"), "--out", prefix}).code == cli::kExitOk);
  }
  SUBCASE("order outside the band exits 3") {
    // sqrt(x) is not smooth at x = 0; the trapezoid rule loses half an order.
    const Run r = run({"mms", "--problem", problem_path("linear_A"), "--zstar-xy", "sqrt(x)", "--out", prefix});
    CHECK(r.code == cli::kExitCheck);
    CHECK(read_json(prefix + ".mms.json")["pass"] == false);
  }
  SUBCASE("solve failure exits 2") {
    CHECK(run({"mms", "--problem", problem_path("kernel_example"), "--zstar-xy", "exp(x)", "--max-iter", "1",
               "--tol", "1e-14", "--out", prefix})
              .code == cli::kExitSolve);
  }
  SUBCASE("input errors") {
    CHECK(run({"mms", "--problem", problem_path("zero"), "--out", prefix}).code == cli::kExitInput);
    CHECK(run({"mms", "--problem", problem_path("zero"), "--zstar-xy", "1", "--n-list", "16", "--out", prefix}).code ==
          cli::kExitInput);
  }
}
