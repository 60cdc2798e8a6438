#pragma once

#include <memory>
#include <string>
#include <string_view>

namespace disperse {

/// Immutable expression tree for a spatial profile f(x).
///
/// Grammar (closed, no user functions):
///
///   expr    := term (('+' | '-') term)*
///   term    := power (('*' | '/') power)*
///   power   := unary ('^' power)?          right-associative
///   unary   := '-' unary | primary         binds tighter than any binary op
///   primary := number | 'x' | 'pi' | func '(' expr ')' | '(' expr ')'
///   func    := sin | cos | exp | log | sqrt | abs
///
/// Because unary minus binds tighter than '^', "-x^2" is (-x)^2.
class ProfileExpr {
 public:
  enum class Kind { Literal, Variable, Pi, Negate, Binary, Call };
  enum class BinaryOp { Add, Sub, Mul, Div, Pow };
  enum class Function { Sin, Cos, Exp, Log, Sqrt, Abs };

  static ProfileExpr literal(double value);
  static ProfileExpr variable();
  static ProfileExpr pi();
  static ProfileExpr negate(ProfileExpr operand);
  static ProfileExpr binary(BinaryOp op, ProfileExpr lhs, ProfileExpr rhs);
  static ProfileExpr call(Function fn, ProfileExpr arg);

  Kind kind() const noexcept;
  double literal_value() const;
  BinaryOp binary_op() const;
  Function function() const;
  const ProfileExpr& lhs() const;  // operand of Negate/Call, left side of Binary
  const ProfileExpr& rhs() const;

  /// Throws EvalError on division by zero, log/sqrt out of domain, or a
  /// non-finite result.
  double evaluate(double x) const;

  /// Fully parenthesized text that parses back to an equal tree.
  std::string to_string() const;

  friend bool operator==(const ProfileExpr& a, const ProfileExpr& b);
  friend bool operator!=(const ProfileExpr& a, const ProfileExpr& b) { return !(a == b); }

 private:
  struct Node;
  explicit ProfileExpr(std::shared_ptr<const Node> node) : node_(std::move(node)) {}

  std::shared_ptr<const Node> node_;
};

/// Throws ParseError (with byte offset) on malformed input or unknown identifiers.
ProfileExpr parse_profile(std::string_view text);

std::string_view function_name(ProfileExpr::Function fn);

}  // namespace disperse
