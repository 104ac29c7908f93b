#include "goursat2d/polynomial.hpp"

#include <algorithm>
#include <charconv>
#include <array>
#include <cmath>
#include <optional>
#include <vector>

namespace goursat2d {

Polynomial Polynomial::constant(double c) {
  Polynomial p;
  p.add_term(0, 0, c);
  return p;
}

void Polynomial::add_term(int px, int py, double c) {
  if (c == 0.0) return;
  auto [it, inserted] = terms_.try_emplace({px, py}, c);
  if (!inserted) {
    it->second += c;
    if (it->second == 0.0) terms_.erase(it);
  }
}

Polynomial Polynomial::operator+(const Polynomial& o) const {
  Polynomial r = *this;
  for (const auto& [k, c] : o.terms_) r.add_term(k.first, k.second, c);
  return r;
}

Polynomial Polynomial::operator-(const Polynomial& o) const { return *this + o.scaled(-1.0); }

Polynomial Polynomial::operator*(const Polynomial& o) const {
  Polynomial r;
  for (const auto& [a, ca] : terms_) {
    for (const auto& [b, cb] : o.terms_) r.add_term(a.first + b.first, a.second + b.second, ca * cb);
  }
  return r;
}

Polynomial Polynomial::scaled(double c) const {
  Polynomial r;
  for (const auto& [k, v] : terms_) r.add_term(k.first, k.second, v * c);
  return r;
}

Polynomial Polynomial::from_expr(const Expr& e) {
  const auto nodes = e.postorder();
  std::vector<Polynomial> polys(nodes.size());
  auto as_constant = [&](int k) -> std::optional<double> {
    const Polynomial& p = polys[static_cast<std::size_t>(k)];
    if (p.terms_.empty()) return 0.0;
    if (p.terms_.size() == 1 && p.terms_.begin()->first == std::pair{0, 0}) {
      return p.terms_.begin()->second;
    }
    return std::nullopt;
  };
  for (std::size_t k = 0; k < nodes.size(); ++k) {
    const auto& n = nodes[k];
    Polynomial& out = polys[k];
    const auto lhs = [&]() -> const Polynomial& { return polys[static_cast<std::size_t>(n.lhs)]; };
    const auto rhs = [&]() -> const Polynomial& { return polys[static_cast<std::size_t>(n.rhs)]; };
    if (n.op == "num") {
      out = constant(n.value);
    } else if (n.op == "x") {
      out.add_term(1, 0, 1.0);
    } else if (n.op == "y") {
      out.add_term(0, 1, 1.0);
    } else if (n.op == "neg") {
      out = lhs().scaled(-1.0);
    } else if (n.op == "+") {
      out = lhs() + rhs();
    } else if (n.op == "-") {
      out = lhs() - rhs();
    } else if (n.op == "*") {
      out = lhs() * rhs();
    } else if (n.op == "/") {
      const auto c = as_constant(n.rhs);
      if (!c || *c == 0.0) {
        throw InvalidArgument("'" + e.source() + "' is not a polynomial: division by a non-constant");
      }
      out = lhs().scaled(1.0 / *c);
    } else if (n.op == "^") {
      const auto c = as_constant(n.rhs);
      if (!c || *c < 0.0 || std::floor(*c) != *c || *c > 64.0) {
        throw InvalidArgument("'" + e.source() +
                              "' is not a polynomial: exponents must be small nonnegative integers");
      }
      out = constant(1.0);
      for (int p = 0; p < static_cast<int>(*c); ++p) out = out * lhs();
    } else {
      throw InvalidArgument("'" + e.source() + "' is not a polynomial in x and y");
    }
  }
  return polys.back();
}

double Polynomial::eval(double x, double y) const {
  double s = 0.0;
  for (const auto& [k, c] : terms_) s += c * std::pow(x, k.first) * std::pow(y, k.second);
  return s;
}

Polynomial Polynomial::d_dx() const {
  Polynomial r;
  for (const auto& [k, c] : terms_) {
    if (k.first > 0) r.add_term(k.first - 1, k.second, c * k.first);
  }
  return r;
}

Polynomial Polynomial::d_dy() const {
  Polynomial r;
  for (const auto& [k, c] : terms_) {
    if (k.second > 0) r.add_term(k.first, k.second - 1, c * k.second);
  }
  return r;
}

double Polynomial::abs_coefficient_sum() const {
  double s = 0.0;
  for (const auto& [k, c] : terms_) s += std::abs(c);
  return s;
}

double Polynomial::sup_bound_on_unit_square() const {
  constexpr int kSamples = 200;
  double sampled = 0.0;
  for (int i = 0; i <= kSamples; ++i) {
    for (int j = 0; j <= kSamples; ++j) {
      sampled = std::max(sampled, std::abs(eval(static_cast<double>(i) / kSamples,
                                                static_cast<double>(j) / kSamples)));
    }
  }
  const double gap = 0.5 / kSamples;
  return sampled + gap * (d_dx().abs_coefficient_sum() + d_dy().abs_coefficient_sum());
}

std::string Polynomial::to_string() const {
  if (terms_.empty()) return "0";
  std::string out;
  for (const auto& [k, c] : terms_) {
    std::array<char, 64> buf{};
    const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), c);
    std::string term(buf.data(), res.ptr);
    if (k.first > 0) term += k.first == 1 ? "*x" : "*x^" + std::to_string(k.first);
    if (k.second > 0) term += k.second == 1 ? "*y" : "*y^" + std::to_string(k.second);
    if (!out.empty()) out += " + ";
    out += "(" + term + ")";
  }
  return out;
}

}  // namespace goursat2d
