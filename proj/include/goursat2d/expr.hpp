#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "goursat2d/error.hpp"

namespace goursat2d {

/// Syntax error in an expression; `offset` is the byte position in the source.
class ParseError : public Error {
 public:
  enum class Kind { lexical, unknown_identifier, arity, unbalanced, syntax };
  ParseError(Kind kind, std::size_t offset, const std::string& message);
  Kind kind() const noexcept { return kind_; }
  std::size_t offset() const noexcept { return offset_; }
  /// Same error with `context` (e.g. a document field path) prepended to the message.
  ParseError with_context(const std::string& context) const;

 private:
  struct Composed {};
  ParseError(Composed, Kind kind, std::size_t offset, const std::string& full);
  Kind kind_;
  std::size_t offset_;
};

/// Evaluation produced a non-finite or undefined value at the node starting at `offset`.
class EvalFault : public Error {
 public:
  EvalFault(std::size_t offset, const std::string& message);
  std::size_t offset() const noexcept { return offset_; }
  /// Same fault with `context` (e.g. node coordinates) appended to the message.
  EvalFault with_context(const std::string& context) const;

 private:
  struct Composed {};
  EvalFault(Composed, std::size_t offset, const std::string& full);
  std::size_t offset_;
};

/// Value and partial derivatives with respect to z1..zn.
struct DualValue {
  double value = 0.0;
  std::vector<double> partials;
  /// Set when abs was differentiated at 0 (subgradient 0 was used).
  bool kink = false;
};

/// Immutable parsed expression over x, y, z1..zn. Copies share the tree.
///
/// Grammar (lowest to highest precedence):
///   expr    := term (('+' | '-') term)*
///   term    := unary (('*' | '/') unary)*
///   unary   := '-' unary | power
///   power   := primary ('^' unary)?            (right associative)
///   primary := number | 'x' | 'y' | 'z'k | func '(' expr ')' | '(' expr ')'
///   func    := sin | cos | tan | exp | log | sqrt | abs | atan
class Expr {
 public:
  /// Parses `source` with variables x, y, z1..z{dim}. dim = 0 allows x and y only.
  static Expr parse(std::string_view source, int dim);

  double eval(double x, double y, std::span<const double> z) const;
  DualValue eval_dual(double x, double y, std::span<const double> z) const;
  /// Allocation-free variant of eval_dual: writes dim() partials into `grad`
  /// and returns the value. `kink` (optional) is set when abs hit its kink.
  double eval_gradient(double x, double y, std::span<const double> z, std::span<double> grad,
                       bool* kink = nullptr) const;

  /// Fully parenthesized text that parses back to the same tree.
  std::string to_string() const;
  const std::string& source() const noexcept;
  int dim() const noexcept;
  bool depends_on_z() const noexcept;
  std::size_t node_count() const noexcept;

  bool structurally_equal(const Expr& other) const noexcept;

  /// Read-only view of one tree node. `op` is "num", "x", "y", "z", "neg",
  /// one of "+-*/^", or a function name; operands refer to earlier entries.
  struct NodeView {
    std::string_view op;
    double value = 0.0;
    int z_index = -1;
    int lhs = -1;
    int rhs = -1;
  };
  /// Nodes with children before parents; the root is last.
  std::vector<NodeView> postorder() const;

  struct Impl;

 private:
  explicit Expr(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {}
  std::shared_ptr<const Impl> impl_;
};

inline Expr parse(std::string_view source, int dim) { return Expr::parse(source, dim); }

}  // namespace goursat2d
