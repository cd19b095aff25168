#ifndef DYNPOP_EXPR_HPP
#define DYNPOP_EXPR_HPP

#include <array>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "dynpop/types.hpp"

namespace dynpop {

/// Immutable expression tree of the declarative game language.
///
///   expr   := term (("+"|"-") term)*
///   term   := factor (("*"|"/") factor)*
///   factor := NUMBER | ref | func "(" expr ("," expr)* ")" | "(" expr ")" | "-" factor
///   ref    := d(tau, x) | pi(tau, a, x) | g(tau)
///   func   := exp/1 | log/1 | min/2 | max/2
///
/// A leading minus directly in front of a numeric literal folds into the
/// literal, so printing a negative constant parses back to the same tree.
class Expr {
 public:
  enum class Kind { Number, StateRef, PolicyRef, MassRef, Add, Sub, Mul, Div, Neg, Exp, Log, Min, Max };

  static Expr number(double value);
  static Expr state_ref(int tau, int x);
  static Expr policy_ref(int tau, int a, int x);
  static Expr mass_ref(int tau);
  static Expr unary(Kind kind, Expr operand);
  static Expr binary(Kind kind, Expr lhs, Expr rhs);

  Kind kind() const { return node_->kind; }
  double value() const { return node_->value; }
  /// Reference indices in source order: d -> (tau, x), pi -> (tau, a, x), g -> (tau).
  const std::array<int, 3>& index() const { return node_->index; }
  const std::vector<Expr>& args() const { return node_->args; }

  /// Canonical text; parse(to_string()) reproduces an equal tree.
  std::string to_string() const;

  bool operator==(const Expr& other) const;

  friend Expr operator+(Expr a, Expr b) { return binary(Kind::Add, std::move(a), std::move(b)); }
  friend Expr operator-(Expr a, Expr b) { return binary(Kind::Sub, std::move(a), std::move(b)); }
  friend Expr operator*(Expr a, Expr b) { return binary(Kind::Mul, std::move(a), std::move(b)); }
  friend Expr operator/(Expr a, Expr b) { return binary(Kind::Div, std::move(a), std::move(b)); }

 private:
  struct Node {
    Kind kind = Kind::Number;
    double value = 0.0;
    std::array<int, 3> index{0, 0, 0};
    std::vector<Expr> args;
  };
  explicit Expr(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
  std::shared_ptr<const Node> node_;
};

/// Parses one expression. Throws SyntaxError / UnknownIdentifierError /
/// ArityError with a 1-based column into `text`.
Expr parse_expr(std::string_view text);

/// Throws IndexError if a reference falls outside `dims` or names a masked
/// action. `where` prefixes the message.
void check_references(const Expr& expr, Dims dims, const ActionMask& mask, const std::string& where);

/// Flattened postfix form of an Expr for repeated evaluation. Mass references
/// are resolved to constants at compile time.
class CompiledExpr {
 public:
  CompiledExpr() = default;
  CompiledExpr(const Expr& expr, const Vector& type_mass);

  /// Throws EvalError on division by zero or log of a non-positive value.
  double eval(const SocialState& s) const;

 private:
  enum class Op : unsigned char { Const, State, Policy, Add, Sub, Mul, Div, Neg, Exp, Log, Min, Max };
  struct Instr {
    Op op;
    int i0 = 0;
    int i1 = 0;
    int i2 = 0;
    double value = 0.0;
  };
  void emit(const Expr& e, const Vector& type_mass);
  std::vector<Instr> code_;
  int max_depth_ = 0;
};

}  // namespace dynpop

#endif  // DYNPOP_EXPR_HPP
