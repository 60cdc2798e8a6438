#include "disperse/profile.hpp"

#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <numbers>
#include <optional>

#include <fmt/format.h>

#include "disperse/errors.hpp"

namespace disperse {

struct ProfileExpr::Node {
  Kind kind = Kind::Literal;
  double value = 0.0;
  BinaryOp op = BinaryOp::Add;
  Function fn = Function::Sin;
  std::optional<ProfileExpr> lhs;
  std::optional<ProfileExpr> rhs;
};

namespace {

constexpr std::array<std::pair<std::string_view, ProfileExpr::Function>, 6> kFunctions{{
    {"sin", ProfileExpr::Function::Sin},
    {"cos", ProfileExpr::Function::Cos},
    {"exp", ProfileExpr::Function::Exp},
    {"log", ProfileExpr::Function::Log},
    {"sqrt", ProfileExpr::Function::Sqrt},
    {"abs", ProfileExpr::Function::Abs},
}};

char op_symbol(ProfileExpr::BinaryOp op) {
  switch (op) {
    case ProfileExpr::BinaryOp::Add: return '+';
    case ProfileExpr::BinaryOp::Sub: return '-';
    case ProfileExpr::BinaryOp::Mul: return '*';
    case ProfileExpr::BinaryOp::Div: return '/';
    case ProfileExpr::BinaryOp::Pow: return '^';
  }
  return '?';
}

class Parser {
 public:
  explicit Parser(std::string_view text) : text_(text) {}

  ProfileExpr parse() {
    skip_space();
    if (pos_ == text_.size()) throw ParseError("empty expression", pos_);
    ProfileExpr e = expr();
    skip_space();
    if (pos_ != text_.size()) {
      throw ParseError(fmt::format("unexpected '{}'", text_[pos_]), pos_);
    }
    return e;
  }

 private:
  ProfileExpr expr() {
    ProfileExpr acc = term();
    for (;;) {
      skip_space();
      if (accept('+')) {
        acc = ProfileExpr::binary(ProfileExpr::BinaryOp::Add, acc, term());
      } else if (accept('-')) {
        acc = ProfileExpr::binary(ProfileExpr::BinaryOp::Sub, acc, term());
      } else {
        return acc;
      }
    }
  }

  ProfileExpr term() {
    ProfileExpr acc = power();
    for (;;) {
      skip_space();
      if (accept('*')) {
        acc = ProfileExpr::binary(ProfileExpr::BinaryOp::Mul, acc, power());
      } else if (accept('/')) {
        acc = ProfileExpr::binary(ProfileExpr::BinaryOp::Div, acc, power());
      } else {
        return acc;
      }
    }
  }

  ProfileExpr power() {
    ProfileExpr base = unary();
    skip_space();
    if (accept('^')) return ProfileExpr::binary(ProfileExpr::BinaryOp::Pow, base, power());
    return base;
  }

  ProfileExpr unary() {
    skip_space();
    if (accept('-')) return ProfileExpr::negate(unary());
    return primary();
  }

  ProfileExpr primary() {
    skip_space();
    if (pos_ == text_.size()) throw ParseError("unexpected end of expression", pos_);
    const char c = text_[pos_];
    if (c == '(') {
      ++pos_;
      ProfileExpr inner = expr();
      expect(')');
      return inner;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return identifier();
    throw ParseError(fmt::format("unexpected '{}'", c), pos_);
  }

  ProfileExpr number() {
    const std::size_t start = pos_;
    auto digits = [&] {
      std::size_t n = 0;
      while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
        ++pos_;
        ++n;
      }
      return n;
    };
    std::size_t mantissa = digits();
    if (pos_ < text_.size() && text_[pos_] == '.') {
      ++pos_;
      mantissa += digits();
    }
    if (mantissa == 0) throw ParseError("malformed number", start);
    if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
      ++pos_;
      if (pos_ < text_.size() && (text_[pos_] == '+' || text_[pos_] == '-')) ++pos_;
      if (digits() == 0) throw ParseError("malformed exponent", pos_);
    }
    double value = 0.0;
    const auto res = std::from_chars(text_.data() + start, text_.data() + pos_, value);
    if (res.ec != std::errc{} || res.ptr != text_.data() + pos_ || !std::isfinite(value)) {
      throw ParseError("number out of range", start);
    }
    return ProfileExpr::literal(value);
  }

  ProfileExpr identifier() {
    const std::size_t start = pos_;
    while (pos_ < text_.size() &&
           (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) {
      ++pos_;
    }
    const std::string_view name = text_.substr(start, pos_ - start);
    if (name == "x") return ProfileExpr::variable();
    if (name == "pi") return ProfileExpr::pi();
    for (const auto& [fname, fn] : kFunctions) {
      if (name == fname) {
        skip_space();
        expect('(');
        ProfileExpr arg = expr();
        expect(')');
        return ProfileExpr::call(fn, arg);
      }
    }
    throw ParseError(fmt::format("unknown identifier '{}'", name), start);
  }

  void skip_space() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(char c) {
    skip_space();
    if (!accept(c)) {
      if (pos_ == text_.size()) throw ParseError(fmt::format("expected '{}'", c), pos_);
      throw ParseError(fmt::format("expected '{}', found '{}'", c, text_[pos_]), pos_);
    }
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

}  // namespace

std::string_view function_name(ProfileExpr::Function fn) {
  for (const auto& [name, f] : kFunctions) {
    if (f == fn) return name;
  }
  return "?";
}

ProfileExpr ProfileExpr::literal(double value) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::Literal;
  n->value = value;
  return ProfileExpr(std::move(n));
}

ProfileExpr ProfileExpr::variable() {
  auto n = std::make_shared<Node>();
  n->kind = Kind::Variable;
  return ProfileExpr(std::move(n));
}

ProfileExpr ProfileExpr::pi() {
  auto n = std::make_shared<Node>();
  n->kind = Kind::Pi;
  return ProfileExpr(std::move(n));
}

ProfileExpr ProfileExpr::negate(ProfileExpr operand) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::Negate;
  n->lhs = std::move(operand);
  return ProfileExpr(std::move(n));
}

ProfileExpr ProfileExpr::binary(BinaryOp op, ProfileExpr lhs, ProfileExpr rhs) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::Binary;
  n->op = op;
  n->lhs = std::move(lhs);
  n->rhs = std::move(rhs);
  return ProfileExpr(std::move(n));
}

ProfileExpr ProfileExpr::call(Function fn, ProfileExpr arg) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::Call;
  n->fn = fn;
  n->lhs = std::move(arg);
  return ProfileExpr(std::move(n));
}

ProfileExpr::Kind ProfileExpr::kind() const noexcept { return node_->kind; }
double ProfileExpr::literal_value() const { return node_->value; }
ProfileExpr::BinaryOp ProfileExpr::binary_op() const { return node_->op; }
ProfileExpr::Function ProfileExpr::function() const { return node_->fn; }
const ProfileExpr& ProfileExpr::lhs() const { return node_->lhs.value(); }
const ProfileExpr& ProfileExpr::rhs() const { return node_->rhs.value(); }

double ProfileExpr::evaluate(double x) const {
  double result = 0.0;
  switch (node_->kind) {
    case Kind::Literal:
      return node_->value;
    case Kind::Variable:
      return x;
    case Kind::Pi:
      return std::numbers::pi;
    case Kind::Negate:
      return -lhs().evaluate(x);
    case Kind::Binary: {
      const double a = lhs().evaluate(x);
      const double b = rhs().evaluate(x);
      switch (node_->op) {
        case BinaryOp::Add: result = a + b; break;
        case BinaryOp::Sub: result = a - b; break;
        case BinaryOp::Mul: result = a * b; break;
        case BinaryOp::Div:
          if (b == 0.0) throw EvalError("division by zero", x);
          result = a / b;
          break;
        case BinaryOp::Pow: result = std::pow(a, b); break;
      }
      break;
    }
    case Kind::Call: {
      const double a = lhs().evaluate(x);
      switch (node_->fn) {
        case Function::Sin: result = std::sin(a); break;
        case Function::Cos: result = std::cos(a); break;
        case Function::Exp: result = std::exp(a); break;
        case Function::Log:
          if (!(a > 0.0)) throw EvalError("log of non-positive value", x);
          result = std::log(a);
          break;
        case Function::Sqrt:
          if (a < 0.0) throw EvalError("sqrt of negative value", x);
          result = std::sqrt(a);
          break;
        case Function::Abs: result = std::abs(a); break;
      }
      break;
    }
  }
  if (!std::isfinite(result)) throw EvalError("non-finite result", x);
  return result;
}

std::string ProfileExpr::to_string() const {
  switch (node_->kind) {
    case Kind::Literal: return fmt::format("{}", node_->value);
    case Kind::Variable: return "x";
    case Kind::Pi: return "pi";
    case Kind::Negate: return "(-" + lhs().to_string() + ")";
    case Kind::Binary:
      return fmt::format("({} {} {})", lhs().to_string(), op_symbol(node_->op), rhs().to_string());
    case Kind::Call:
      return fmt::format("{}({})", function_name(node_->fn), lhs().to_string());
  }
  return {};
}

bool operator==(const ProfileExpr& a, const ProfileExpr& b) {
  if (a.node_ == b.node_) return true;
  if (a.kind() != b.kind()) return false;
  switch (a.kind()) {
    case ProfileExpr::Kind::Literal: return a.literal_value() == b.literal_value();
    case ProfileExpr::Kind::Variable:
    case ProfileExpr::Kind::Pi: return true;
    case ProfileExpr::Kind::Negate: return a.lhs() == b.lhs();
    case ProfileExpr::Kind::Binary:
      return a.binary_op() == b.binary_op() && a.lhs() == b.lhs() && a.rhs() == b.rhs();
    case ProfileExpr::Kind::Call: return a.function() == b.function() && a.lhs() == b.lhs();
  }
  return false;
}

ProfileExpr parse_profile(std::string_view text) { return Parser(text).parse(); }

}  // namespace disperse
