#include "goursat2d/expr.hpp"

#include <array>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <optional>

namespace goursat2d {

ParseError::ParseError(Kind kind, std::size_t offset, const std::string& message)
    : Error("parse error at offset " + std::to_string(offset) + ": " + message),
      kind_(kind),
      offset_(offset) {}

ParseError::ParseError(Composed, Kind kind, std::size_t offset, const std::string& full)
    : Error(full), kind_(kind), offset_(offset) {}

ParseError ParseError::with_context(const std::string& context) const {
  return ParseError(Composed{}, kind_, offset_, context + ": " + what());
}

EvalFault::EvalFault(std::size_t offset, const std::string& message)
    : Error("evaluation fault at offset " + std::to_string(offset) + ": " + message),
      offset_(offset) {}

EvalFault::EvalFault(Composed, std::size_t offset, const std::string& full)
    : Error(full), offset_(offset) {}

EvalFault EvalFault::with_context(const std::string& context) const {
  return EvalFault(Composed{}, offset_, std::string(what()) + " " + context);
}

namespace {

enum class Op : std::uint8_t {
  number, x, y, z, neg, add, sub, mul, div, pow,
  sin, cos, tan, exp, log, sqrt, abs, atan,
};

struct Node {
  Op op;
  double value = 0.0;  // literal
  int index = 0;       // z component (0-based)
  int lhs = -1;
  int rhs = -1;
  std::size_t offset = 0;
};

struct FunctionName {
  std::string_view name;
  Op op;
};

constexpr std::array<FunctionName, 8> kFunctions{{
    {"sin", Op::sin}, {"cos", Op::cos}, {"tan", Op::tan}, {"exp", Op::exp},
    {"log", Op::log}, {"sqrt", Op::sqrt}, {"abs", Op::abs}, {"atan", Op::atan},
}};

std::optional<Op> lookup_function(std::string_view name) {
  for (const auto& f : kFunctions) {
    if (f.name == name) return f.op;
  }
  return std::nullopt;
}

std::string_view function_name(Op op) {
  for (const auto& f : kFunctions) {
    if (f.op == op) return f.name;
  }
  return "?";
}

bool is_unary_function(Op op) { return op >= Op::sin; }

enum class Tok { number, ident, plus, minus, star, slash, caret, lparen, rparen, comma, end };

struct Token {
  Tok kind;
  std::size_t offset;
  std::string_view text;
  double number = 0.0;
};

std::vector<Token> tokenize(std::string_view src) {
  std::vector<Token> out;
  std::size_t i = 0;
  auto is_digit = [](char c) { return c >= '0' && c <= '9'; };
  auto is_alpha = [](char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_'; };
  while (i < src.size()) {
    const char c = src[i];
    if (c == ' ' || c == '\t' || c == '\n' || c == '\r') {
      ++i;
      continue;
    }
    const std::size_t start = i;
    if (is_digit(c) || (c == '.' && i + 1 < src.size() && is_digit(src[i + 1]))) {
      while (i < src.size() && is_digit(src[i])) ++i;
      if (i < src.size() && src[i] == '.') {
        ++i;
        while (i < src.size() && is_digit(src[i])) ++i;
      }
      if (i < src.size() && (src[i] == 'e' || src[i] == 'E')) {
        std::size_t j = i + 1;
        if (j < src.size() && (src[j] == '+' || src[j] == '-')) ++j;
        if (j >= src.size() || !is_digit(src[j])) {
          throw ParseError(ParseError::Kind::lexical, i, "malformed exponent in number");
        }
        while (j < src.size() && is_digit(src[j])) ++j;
        i = j;
      }
      Token t{Tok::number, start, src.substr(start, i - start)};
      const auto res = std::from_chars(t.text.data(), t.text.data() + t.text.size(), t.number);
      if (res.ec != std::errc() || !std::isfinite(t.number)) {
        throw ParseError(ParseError::Kind::lexical, start,
                         "number '" + std::string(t.text) + "' is not a finite double");
      }
      out.push_back(t);
      continue;
    }
    if (is_alpha(c)) {
      while (i < src.size() && (is_alpha(src[i]) || is_digit(src[i]))) ++i;
      out.push_back(Token{Tok::ident, start, src.substr(start, i - start)});
      continue;
    }
    Tok kind;
    switch (c) {
      case '+': kind = Tok::plus; break;
      case '-': kind = Tok::minus; break;
      case '*': kind = Tok::star; break;
      case '/': kind = Tok::slash; break;
      case '^': kind = Tok::caret; break;
      case '(': kind = Tok::lparen; break;
      case ')': kind = Tok::rparen; break;
      case ',': kind = Tok::comma; break;
      default:
        throw ParseError(ParseError::Kind::lexical, start,
                         std::string("unexpected character '") + c + "'");
    }
    out.push_back(Token{kind, start, src.substr(start, 1)});
    ++i;
  }
  out.push_back(Token{Tok::end, src.size(), {}});
  return out;
}

class Parser {
 public:
  Parser(std::vector<Token> tokens, int dim) : tokens_(std::move(tokens)), dim_(dim) {}

  std::vector<Node> run() {
    parse_expr();
    const Token& t = peek();
    if (t.kind == Tok::rparen) {
      throw ParseError(ParseError::Kind::unbalanced, t.offset, "unmatched ')'");
    }
    if (t.kind != Tok::end) {
      throw ParseError(ParseError::Kind::syntax, t.offset,
                       "unexpected '" + std::string(t.text) + "' after complete expression");
    }
    return std::move(nodes_);
  }

 private:
  const Token& peek() const { return tokens_[pos_]; }
  const Token& next() { return tokens_[pos_++]; }

  int push(Node n) {
    nodes_.push_back(n);
    return static_cast<int>(nodes_.size()) - 1;
  }

  int parse_expr() {
    int lhs = parse_term();
    while (peek().kind == Tok::plus || peek().kind == Tok::minus) {
      const Token& t = next();
      const int rhs = parse_term();
      lhs = push(Node{t.kind == Tok::plus ? Op::add : Op::sub, 0.0, 0, lhs, rhs, t.offset});
    }
    return lhs;
  }

  int parse_term() {
    int lhs = parse_unary();
    while (peek().kind == Tok::star || peek().kind == Tok::slash) {
      const Token& t = next();
      const int rhs = parse_unary();
      lhs = push(Node{t.kind == Tok::star ? Op::mul : Op::div, 0.0, 0, lhs, rhs, t.offset});
    }
    return lhs;
  }

  int parse_unary() {
    if (peek().kind == Tok::minus) {
      const Token& t = next();
      const int operand = parse_unary();
      return push(Node{Op::neg, 0.0, 0, operand, -1, t.offset});
    }
    return parse_power();
  }

  int parse_power() {
    const int base = parse_primary();
    if (peek().kind == Tok::caret) {
      const Token& t = next();
      const int exponent = parse_unary();
      return push(Node{Op::pow, 0.0, 0, base, exponent, t.offset});
    }
    return base;
  }

  int parse_primary() {
    const Token& t = next();
    switch (t.kind) {
      case Tok::number:
        return push(Node{Op::number, t.number, 0, -1, -1, t.offset});
      case Tok::lparen: {
        const int inner = parse_expr();
        expect_rparen(t.offset);
        return inner;
      }
      case Tok::ident:
        return parse_identifier(t);
      case Tok::end:
        throw ParseError(ParseError::Kind::syntax, t.offset, "unexpected end of expression");
      case Tok::rparen:
        throw ParseError(ParseError::Kind::unbalanced, t.offset, "unexpected ')'");
      default:
        throw ParseError(ParseError::Kind::syntax, t.offset,
                         "unexpected '" + std::string(t.text) + "'");
    }
  }

  void expect_rparen(std::size_t open_offset) {
    const Token& t = peek();
    if (t.kind == Tok::rparen) {
      ++pos_;
      return;
    }
    if (t.kind == Tok::end) {
      throw ParseError(ParseError::Kind::unbalanced, open_offset, "'(' is never closed");
    }
    throw ParseError(ParseError::Kind::syntax, t.offset,
                     "expected ')' but found '" + std::string(t.text) + "'");
  }

  int parse_identifier(const Token& t) {
    if (auto fn = lookup_function(t.text)) return parse_call(t, *fn);
    int node;
    if (t.text == "x") {
      node = push(Node{Op::x, 0.0, 0, -1, -1, t.offset});
    } else if (t.text == "y") {
      node = push(Node{Op::y, 0.0, 0, -1, -1, t.offset});
    } else if (auto k = z_index(t.text)) {
      node = push(Node{Op::z, 0.0, *k, -1, -1, t.offset});
    } else {
      throw ParseError(ParseError::Kind::unknown_identifier, t.offset,
                       "unknown identifier '" + std::string(t.text) + "'" + allowed_names());
    }
    if (peek().kind == Tok::lparen) {
      throw ParseError(ParseError::Kind::syntax, peek().offset,
                       "'" + std::string(t.text) + "' is a variable, not a function");
    }
    return node;
  }

  int parse_call(const Token& name, Op op) {
    if (peek().kind != Tok::lparen) {
      throw ParseError(ParseError::Kind::arity, name.offset,
                       std::string(name.text) + " expects 1 argument in parentheses");
    }
    const std::size_t open = next().offset;
    if (peek().kind == Tok::rparen) {
      throw ParseError(ParseError::Kind::arity, name.offset,
                       std::string(name.text) + " expects 1 argument, got 0");
    }
    const int arg = parse_expr();
    if (peek().kind == Tok::comma) {
      throw ParseError(ParseError::Kind::arity, name.offset,
                       std::string(name.text) + " expects 1 argument, got more");
    }
    expect_rparen(open);
    return push(Node{op, 0.0, 0, arg, -1, name.offset});
  }

  std::optional<int> z_index(std::string_view text) const {
    if (text.size() < 2 || text[0] != 'z') return std::nullopt;
    int k = 0;
    const auto res = std::from_chars(text.data() + 1, text.data() + text.size(), k);
    if (res.ec != std::errc() || res.ptr != text.data() + text.size() || text[1] == '0') {
      return std::nullopt;
    }
    if (k < 1 || k > dim_) return std::nullopt;
    return k - 1;
  }

  std::string allowed_names() const {
    std::string s = " (allowed: x, y";
    if (dim_ == 1) s += ", z1";
    if (dim_ > 1) s += ", z1..z" + std::to_string(dim_);
    return s + ")";
  }

  std::vector<Token> tokens_;
  std::size_t pos_ = 0;
  int dim_;
  std::vector<Node> nodes_;
};

std::string format_number(double v) {
  std::array<char, 64> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), res.ptr);
}

[[noreturn]] void fault(const Node& n, const std::string& what) { throw EvalFault(n.offset, what); }

double checked(const Node& n, double v) {
  if (!std::isfinite(v)) fault(n, "non-finite result");
  return v;
}

// Value of a unary function node and its derivative with respect to the argument.
struct UnaryResult {
  double value;
  double slope;
};

UnaryResult apply_unary(const Node& n, double a, bool need_slope, bool* kink) {
  switch (n.op) {
    case Op::sin: return {std::sin(a), need_slope ? std::cos(a) : 0.0};
    case Op::cos: return {std::cos(a), need_slope ? -std::sin(a) : 0.0};
    case Op::tan: {
      const double t = checked(n, std::tan(a));
      return {t, 1.0 + t * t};
    }
    case Op::exp: {
      const double e = checked(n, std::exp(a));
      return {e, e};
    }
    case Op::log:
      if (!(a > 0.0)) fault(n, "log of nonpositive argument");
      return {std::log(a), 1.0 / a};
    case Op::sqrt: {
      if (a < 0.0) fault(n, "sqrt of negative argument");
      const double s = std::sqrt(a);
      if (need_slope && s == 0.0) fault(n, "sqrt is not differentiable at 0");
      return {s, need_slope ? 0.5 / s : 0.0};
    }
    case Op::abs:
      if (need_slope && a == 0.0 && kink) *kink = true;
      return {std::abs(a), a > 0.0 ? 1.0 : (a < 0.0 ? -1.0 : 0.0)};
    case Op::atan: return {std::atan(a), 1.0 / (1.0 + a * a)};
    default: return {0.0, 0.0};
  }
}

double pow_value(const Node& n, double a, double b) {
  const double v = std::pow(a, b);
  if (std::isnan(v)) fault(n, "power of negative base with non-integer exponent");
  if (!std::isfinite(v)) fault(n, a == 0.0 ? "zero raised to a negative power" : "power overflow");
  return v;
}

}  // namespace

struct Expr::Impl {
  std::string source;
  int dim = 0;
  std::vector<Node> nodes;  // children precede parents; root is last
  bool uses_z = false;
};

Expr Expr::parse(std::string_view source, int dim) {
  if (dim < 0) throw InvalidArgument("expression dimension must be nonnegative");
  auto impl = std::make_shared<Impl>();
  impl->source = std::string(source);
  impl->dim = dim;
  impl->nodes = Parser(tokenize(source), dim).run();
  for (const Node& n : impl->nodes) impl->uses_z = impl->uses_z || n.op == Op::z;
  return Expr(std::move(impl));
}

const std::string& Expr::source() const noexcept { return impl_->source; }
int Expr::dim() const noexcept { return impl_->dim; }
bool Expr::depends_on_z() const noexcept { return impl_->uses_z; }
std::size_t Expr::node_count() const noexcept { return impl_->nodes.size(); }

double Expr::eval(double x, double y, std::span<const double> z) const {
  const auto& nodes = impl_->nodes;
  thread_local std::vector<double> vals;
  vals.resize(nodes.size());
  for (std::size_t k = 0; k < nodes.size(); ++k) {
    const Node& n = nodes[k];
    double v = 0.0;
    switch (n.op) {
      case Op::number: v = n.value; break;
      case Op::x: v = x; break;
      case Op::y: v = y; break;
      case Op::z: v = z[static_cast<std::size_t>(n.index)]; break;
      case Op::neg: v = -vals[n.lhs]; break;
      case Op::add: v = checked(n, vals[n.lhs] + vals[n.rhs]); break;
      case Op::sub: v = checked(n, vals[n.lhs] - vals[n.rhs]); break;
      case Op::mul: v = checked(n, vals[n.lhs] * vals[n.rhs]); break;
      case Op::div:
        if (vals[n.rhs] == 0.0) fault(n, "division by zero");
        v = checked(n, vals[n.lhs] / vals[n.rhs]);
        break;
      case Op::pow: v = pow_value(n, vals[n.lhs], vals[n.rhs]); break;
      default: v = apply_unary(n, vals[n.lhs], false, nullptr).value; break;
    }
    vals[k] = v;
  }
  return vals.back();
}

double Expr::eval_gradient(double x, double y, std::span<const double> z, std::span<double> grad,
                           bool* kink) const {
  const auto& nodes = impl_->nodes;
  const std::size_t dim = static_cast<std::size_t>(impl_->dim);
  if (kink) *kink = false;
  thread_local std::vector<double> vals;
  thread_local std::vector<double> ders;
  vals.resize(nodes.size());
  ders.assign(nodes.size() * dim, 0.0);
  auto d = [&](int node) { return ders.data() + static_cast<std::size_t>(node) * dim; };

  for (std::size_t k = 0; k < nodes.size(); ++k) {
    const Node& n = nodes[k];
    double* out = ders.data() + k * dim;
    double v = 0.0;
    switch (n.op) {
      case Op::number: v = n.value; break;
      case Op::x: v = x; break;
      case Op::y: v = y; break;
      case Op::z:
        v = z[static_cast<std::size_t>(n.index)];
        out[n.index] = 1.0;
        break;
      case Op::neg:
        v = -vals[n.lhs];
        for (std::size_t c = 0; c < dim; ++c) out[c] = -d(n.lhs)[c];
        break;
      case Op::add:
        v = checked(n, vals[n.lhs] + vals[n.rhs]);
        for (std::size_t c = 0; c < dim; ++c) out[c] = d(n.lhs)[c] + d(n.rhs)[c];
        break;
      case Op::sub:
        v = checked(n, vals[n.lhs] - vals[n.rhs]);
        for (std::size_t c = 0; c < dim; ++c) out[c] = d(n.lhs)[c] - d(n.rhs)[c];
        break;
      case Op::mul: {
        const double a = vals[n.lhs], b = vals[n.rhs];
        v = checked(n, a * b);
        for (std::size_t c = 0; c < dim; ++c) out[c] = d(n.lhs)[c] * b + a * d(n.rhs)[c];
        break;
      }
      case Op::div: {
        const double a = vals[n.lhs], b = vals[n.rhs];
        if (b == 0.0) fault(n, "division by zero");
        v = checked(n, a / b);
        for (std::size_t c = 0; c < dim; ++c) out[c] = (d(n.lhs)[c] - v * d(n.rhs)[c]) / b;
        break;
      }
      case Op::pow: {
        const double a = vals[n.lhs], b = vals[n.rhs];
        v = pow_value(n, a, b);
        bool exponent_varies = false;
        for (std::size_t c = 0; c < dim; ++c) exponent_varies = exponent_varies || d(n.rhs)[c] != 0.0;
        if (!exponent_varies) {
          const double slope = b == 0.0 ? 0.0 : b * std::pow(a, b - 1.0);
          for (std::size_t c = 0; c < dim; ++c) {
            if (d(n.lhs)[c] == 0.0) continue;
            if (!std::isfinite(slope)) fault(n, "power is not differentiable at this base");
            out[c] = slope * d(n.lhs)[c];
          }
        } else {
          if (!(a > 0.0)) fault(n, "variable exponent needs a positive base");
          const double la = std::log(a);
          for (std::size_t c = 0; c < dim; ++c) {
            out[c] = v * (d(n.rhs)[c] * la + b * d(n.lhs)[c] / a);
          }
        }
        break;
      }
      default: {
        bool varies = false;
        for (std::size_t c = 0; c < dim; ++c) varies = varies || d(n.lhs)[c] != 0.0;
        const UnaryResult r = apply_unary(n, vals[n.lhs], varies, kink);
        v = r.value;
        for (std::size_t c = 0; c < dim; ++c) out[c] = r.slope * d(n.lhs)[c];
        break;
      }
    }
    vals[k] = v;
    for (std::size_t c = 0; c < dim; ++c) {
      if (!std::isfinite(out[c])) fault(n, "non-finite derivative");
    }
  }
  const double* root = d(static_cast<int>(nodes.size()) - 1);
  for (std::size_t c = 0; c < dim && c < grad.size(); ++c) grad[c] = root[c];
  return vals.back();
}

DualValue Expr::eval_dual(double x, double y, std::span<const double> z) const {
  DualValue r;
  r.partials.assign(static_cast<std::size_t>(impl_->dim), 0.0);
  r.value = eval_gradient(x, y, z, r.partials, &r.kink);
  return r;
}

std::string Expr::to_string() const {
  const auto& nodes = impl_->nodes;
  std::vector<std::string> text(nodes.size());
  for (std::size_t k = 0; k < nodes.size(); ++k) {
    const Node& n = nodes[k];
    switch (n.op) {
      case Op::number: text[k] = format_number(n.value); break;
      case Op::x: text[k] = "x"; break;
      case Op::y: text[k] = "y"; break;
      case Op::z: text[k] = "z" + std::to_string(n.index + 1); break;
      case Op::neg: text[k] = "(-" + text[n.lhs] + ")"; break;
      case Op::add: text[k] = "(" + text[n.lhs] + " + " + text[n.rhs] + ")"; break;
      case Op::sub: text[k] = "(" + text[n.lhs] + " - " + text[n.rhs] + ")"; break;
      case Op::mul: text[k] = "(" + text[n.lhs] + " * " + text[n.rhs] + ")"; break;
      case Op::div: text[k] = "(" + text[n.lhs] + " / " + text[n.rhs] + ")"; break;
      case Op::pow: text[k] = "(" + text[n.lhs] + " ^ " + text[n.rhs] + ")"; break;
      default:
        if (is_unary_function(n.op)) {
          text[k] = std::string(function_name(n.op)) + "(" + text[n.lhs] + ")";
        }
        break;
    }
  }
  return text.back();
}

std::vector<Expr::NodeView> Expr::postorder() const {
  std::vector<NodeView> out;
  out.reserve(impl_->nodes.size());
  for (const Node& n : impl_->nodes) {
    NodeView v;
    v.lhs = n.lhs;
    v.rhs = n.rhs;
    switch (n.op) {
      case Op::number: v.op = "num"; v.value = n.value; break;
      case Op::x: v.op = "x"; break;
      case Op::y: v.op = "y"; break;
      case Op::z: v.op = "z"; v.z_index = n.index; break;
      case Op::neg: v.op = "neg"; break;
      case Op::add: v.op = "+"; break;
      case Op::sub: v.op = "-"; break;
      case Op::mul: v.op = "*"; break;
      case Op::div: v.op = "/"; break;
      case Op::pow: v.op = "^"; break;
      default: v.op = function_name(n.op); break;
    }
    out.push_back(v);
  }
  return out;
}

bool Expr::structurally_equal(const Expr& other) const noexcept {
  const auto& a = impl_->nodes;
  const auto& b = other.impl_->nodes;
  if (a.size() != b.size() || impl_->dim != other.impl_->dim) return false;
  for (std::size_t k = 0; k < a.size(); ++k) {
    if (a[k].op != b[k].op || a[k].index != b[k].index || a[k].lhs != b[k].lhs ||
        a[k].rhs != b[k].rhs ||
        std::bit_cast<std::uint64_t>(a[k].value) != std::bit_cast<std::uint64_t>(b[k].value)) {
      return false;
    }
  }
  return true;
}

}  // namespace goursat2d
