#include <doctest.h>

#include <cmath>

#include "goursat2d/bielecki.hpp"
#include "goursat2d/error.hpp"
#include "goursat2d/random_fields.hpp"
#include "test_util.hpp"

using namespace goursat2d;
using testutil::field;

namespace {

// int_0^1 e^{-m x} dx and int_0^1 x^2 e^{-m x} dx.
double exp_moment0(double m) { return (1.0 - std::exp(-m)) / m; }
double exp_moment2(double m) {
  return 2.0 / (m * m * m) - std::exp(-m) * (1.0 / m + 2.0 / (m * m) + 2.0 / (m * m * m));
}

}  // namespace

TEST_CASE("weighted norms against closed forms") {
  const Grid g(256);
  CHECK(weighted_l2_norm(GridField(g, 1), 3.0) == 0.0);
  CHECK(exp_moment0(2.0) == doctest::Approx(0.432332).epsilon(1e-6));
  CHECK(weighted_l2_norm(GridField(g, 1, 1.0), 2.0) == doctest::Approx(exp_moment0(2.0)).epsilon(1e-4));

  CHECK(exp_moment2(10.0) == doctest::Approx(0.002 - 0.122 * std::exp(-10.0)).epsilon(1e-12));
  CHECK(exp_moment2(10.0) == doctest::Approx(0.0019945).epsilon(1e-4));
  const GridField xy = field(g, [](double x, double y) { return x * y; });
  CHECK(weighted_l2_norm(xy, 10.0) == doctest::Approx(exp_moment2(10.0)).epsilon(1e-3));

  CHECK_THROWS_AS(weighted_l2_norm(xy, -1.0), InvalidArgument);
  CHECK_THROWS_AS(weighted_l2_norm(xy, NAN), InvalidArgument);
}

TEST_CASE("kernel values") {
  const WeightedNorms w(Grid(8), 3.0);
  CHECK(w.kernel(0, 0) == 1.0);
  for (int i = 0; i <= 8; ++i) {
    for (int j = 0; j <= 8; ++j) {
      CHECK(w.kernel(i, j) > 0.0);
      CHECK(w.kernel(i, j) <= 1.0);
    }
  }
  const WeightedNorms w0(Grid(8), 0.0);
  for (int i = 0; i <= 8; ++i) CHECK(w0.kernel(i, 8 - i) == 1.0);
}

TEST_CASE("ac_norm and inner_product") {
  const Grid g(128);
  const GridField one(g, 1, 1.0);
  CHECK(ac_norm(one, 0.0) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(ac_norm(one, 1.0) == doctest::Approx(1.0 - std::exp(-1.0)).epsilon(1e-4));
  CHECK(ac_norm(GridField(g, 1), 1.0) == 0.0);
  CHECK(inner_product(one, one) == doctest::Approx(1.0));
  const GridField s = field(g, [](double x, double) { return x; });
  const GridField t = field(g, [](double, double y) { return y; });
  CHECK(inner_product(s, t) == doctest::Approx(0.25).epsilon(1e-12));
  CHECK_THROWS_AS(inner_product(one, GridField(g, 2)), ShapeError);
  CHECK_THROWS_AS(inner_product(one, GridField(Grid(4), 1)), ShapeError);

  Rng rng(5);
  for (int k = 0; k < 10; ++k) {
    const GridField r = random_smooth_field(g, 2, rng);
    const double n0 = ac_norm(r, 0.0);
    CHECK(inner_product(r, r) == doctest::Approx(n0 * n0).epsilon(1e-13));
  }
}

TEST_CASE("norm equivalence") {
  const Grid g(128);
  const NormEquivalenceReport r = check_norm_equivalence(GridField(g, 1, 1.0), 1.0);
  CHECK(r.lower == doctest::Approx(std::exp(-2.0)));
  CHECK(r.weighted == doctest::Approx(0.63212).epsilon(1e-4));
  CHECK(r.classical == doctest::Approx(1.0));
  CHECK(r.lower < r.weighted);
  CHECK(r.weighted < r.classical);
  CHECK(r.pass);

  const NormEquivalenceReport zero = check_norm_equivalence(GridField(g, 1), 1.0);
  CHECK(zero.lower == 0.0);
  CHECK(zero.weighted == 0.0);
  CHECK(zero.classical == 0.0);
  CHECK(zero.pass);

  Rng rng(9);
  for (int k = 0; k < 100; ++k) {
    CHECK(check_norm_equivalence(random_smooth_field(Grid(32), 1, rng), 5.0).pass);
  }
}

TEST_CASE("norm properties on random fields") {
  Rng rng(21);
  const Grid g(24);
  for (int k = 0; k < 30; ++k) {
    const GridField a = random_smooth_field(g, 2, rng);
    const GridField b = random_smooth_field(g, 2, rng);
    const double m = rng.uniform(0.0, 20.0);
    // Monotone in m.
    CHECK(ac_norm(a, m + 1.0) <= ac_norm(a, m));
    // Sandwich.
    CHECK(std::exp(-2.0 * m) * ac_norm(a, 0.0) <= ac_norm(a, m));
    CHECK(ac_norm(a, m) <= ac_norm(a, 0.0));
    // Homogeneity and triangle inequality.
    CHECK(ac_norm(-2.5 * a, m) == doctest::Approx(2.5 * ac_norm(a, m)).epsilon(1e-14));
    CHECK(ac_norm(a + b, m) <= ac_norm(a, m) + ac_norm(b, m) + 1e-15);
  }
}

TEST_CASE("weighted estimates") {
  const Grid g(64);
  const Lemma31Report r = verify_lemma31(GridField(g, 1, 1.0), 10.0);
  CHECK(r.checks[0].name == "z");
  CHECK(r.checks[0].lhs == doctest::Approx(0.0019945).epsilon(5e-3));
  CHECK(r.bound == doctest::Approx(0.2 * (1.0 - std::exp(-10.0)) / 10.0).epsilon(5e-3));
  CHECK(r.pass);

  const Lemma31Report zero = verify_lemma31(GridField(g, 1), 3.0);
  CHECK(zero.pass);
  for (const auto& c : zero.checks) CHECK(c.lhs == 0.0);

  CHECK_THROWS_AS(verify_lemma31(GridField(g, 1, 1.0), 0.0), InvalidArgument);
  CHECK_THROWS_AS(verify_lemma31(GridField(g, 1, 1.0), -2.0), InvalidArgument);
  CHECK(discretization_tolerance(Grid(10), 2.0) == doctest::Approx(0.2));
}

TEST_CASE("weighted estimates on random fields agree with a 4x finer re-evaluation") {
  for (std::uint64_t seed = 1; seed <= 12; ++seed) {
    Rng coarse_rng(seed);
    Rng fine_rng(seed);
    const GridField gc = random_smooth_field(Grid(16), 1, coarse_rng);
    const GridField gf = random_smooth_field(Grid(64), 1, fine_rng);
    for (double m : {1.0, 5.0, 10.0, 20.0}) {
      const Lemma31Report rc = verify_lemma31(gc, m);
      const Lemma31Report rf = verify_lemma31(gf, m);
      CHECK(rc.pass);
      CHECK(rf.pass);
      // Each side converges at second order: the coarse values sit within
      // the discretization allowance of the finer ones.
      const double slack = discretization_tolerance(Grid(16), ac_norm(gc, 0.0)) * (1.0 + m * m);
      for (std::size_t k = 0; k < 4; ++k) CHECK(std::abs(rc.checks[k].lhs - rf.checks[k].lhs) <= slack);
    }
  }
}
