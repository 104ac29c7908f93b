#pragma once

#include <map>
#include <string>
#include <utility>

#include "goursat2d/expr.hpp"

namespace goursat2d {

/// Bivariate polynomial in (x, y) with real coefficients.
class Polynomial {
 public:
  Polynomial() = default;
  static Polynomial constant(double c);

  /// Expands an expression built from numbers, x, y, + - *, unary minus,
  /// division by constants and nonnegative integer powers.
  /// Throws InvalidArgument for anything else.
  static Polynomial from_expr(const Expr& e);

  double eval(double x, double y) const;
  Polynomial d_dx() const;
  Polynomial d_dy() const;
  bool is_zero() const noexcept { return terms_.empty(); }

  /// Rigorous upper bound of |p| on the unit square: dense sampling plus a
  /// gradient-based allowance for the gaps between samples.
  double sup_bound_on_unit_square() const;

  /// Expression text in x and y.
  std::string to_string() const;

  Polynomial operator+(const Polynomial& o) const;
  Polynomial operator-(const Polynomial& o) const;
  Polynomial operator*(const Polynomial& o) const;
  Polynomial scaled(double c) const;

 private:
  void add_term(int px, int py, double c);
  double abs_coefficient_sum() const;
  std::map<std::pair<int, int>, double> terms_;
};

}  // namespace goursat2d
