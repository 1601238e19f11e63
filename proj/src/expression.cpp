#include "magzoll/expression.hpp"

#include <cctype>
#include <cstdio>
#include <cstdlib>
#include <string>

#include "magzoll/error.hpp"

namespace magzoll {

namespace {

std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

// Recursive-descent parser: expr := term (('+'|'-') term)*, term := unary (('*'|'/') unary)*,
// unary := '-' unary | power, power := atom ('^' unary)?
class ExpressionParser {
 public:
  explicit ExpressionParser(std::string_view text) : text_(text) {}

  Expression run() {
    Expression e;
    const int root = parse_expr();
    skip_ws();
    if (pos_ != text_.size()) fail("unexpected trailing input");
    e.root_ = root;
    e.text_ = std::string(text_);
    e.uses_x_ = uses_x_;
    e.uses_y_ = uses_y_;
    e.nodes_ = std::make_shared<const std::vector<Expression::Node>>(std::move(nodes_));
    return e;
  }

 private:
  using Op = Expression::Op;

  [[noreturn]] void fail(const std::string& msg) const {
    throw Error(ErrorCode::ConfigError, "expression",
                msg + " at column " + std::to_string(pos_ + 1) + " in \"" + std::string(text_) + "\"");
  }

  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_ws();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  int add(Op op, double value = 0.0, int lhs = -1, int rhs = -1) {
    nodes_.push_back({op, value, lhs, rhs});
    return static_cast<int>(nodes_.size()) - 1;
  }

  int parse_expr() {
    int lhs = parse_term();
    for (;;) {
      if (accept('+')) lhs = add(Op::Add, 0.0, lhs, parse_term());
      else if (accept('-')) lhs = add(Op::Sub, 0.0, lhs, parse_term());
      else return lhs;
    }
  }

  int parse_term() {
    int lhs = parse_unary();
    for (;;) {
      if (accept('*')) lhs = add(Op::Mul, 0.0, lhs, parse_unary());
      else if (accept('/')) lhs = add(Op::Div, 0.0, lhs, parse_unary());
      else return lhs;
    }
  }

  int parse_unary() {
    if (accept('-')) return add(Op::Neg, 0.0, parse_unary());
    if (accept('+')) return parse_unary();
    return parse_power();
  }

  int parse_power() {
    const int base = parse_atom();
    if (!accept('^')) return base;
    const int exponent = parse_unary();
    const auto& e = nodes_[static_cast<std::size_t>(exponent)];
    if (e.op == Op::Const) return add(Op::PowConst, e.value, base);
    if (e.op == Op::Neg && nodes_[static_cast<std::size_t>(e.lhs)].op == Op::Const) {
      return add(Op::PowConst, -nodes_[static_cast<std::size_t>(e.lhs)].value, base);
    }
    return add(Op::Pow, 0.0, base, exponent);
  }

  int parse_atom() {
    skip_ws();
    if (pos_ >= text_.size()) fail("unexpected end of expression");
    const char c = text_[pos_];
    if (c == '(') {
      ++pos_;
      const int inner = parse_expr();
      if (!accept(')')) fail("expected ')'");
      return inner;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      const char* begin = text_.data() + pos_;
      char* end = nullptr;
      const std::string tmp(begin, text_.size() - pos_);
      const double v = std::strtod(tmp.c_str(), &end);
      const auto consumed = static_cast<std::size_t>(end - tmp.c_str());
      if (consumed == 0) fail("malformed number");
      pos_ += consumed;
      return add(Op::Const, v);
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      const std::size_t start = pos_;
      while (pos_ < text_.size() && (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) ++pos_;
      const std::string name(text_.substr(start, pos_ - start));
      if (name == "pi") return add(Op::Const, kPi);
      if (name == "x" || name == "theta" || name == "t") {
        uses_x_ = true;
        return add(Op::VarX);
      }
      if (name == "y" || name == "phi") {
        uses_y_ = true;
        return add(Op::VarY);
      }
      Op op;
      if (name == "sin") op = Op::Sin;
      else if (name == "cos") op = Op::Cos;
      else if (name == "tan") op = Op::Tan;
      else if (name == "exp") op = Op::Exp;
      else if (name == "log") op = Op::Log;
      else if (name == "sqrt") op = Op::Sqrt;
      else if (name == "tanh") op = Op::Tanh;
      else {
        pos_ = start;
        fail("unknown identifier '" + name + "'");
      }
      if (!accept('(')) fail("expected '(' after " + name);
      const int arg = parse_expr();
      if (!accept(')')) fail("expected ')'");
      return add(op, 0.0, arg);
    }
    fail(std::string("unexpected character '") + c + "'");
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  std::vector<Expression::Node> nodes_;
  bool uses_x_ = false;
  bool uses_y_ = false;
};

Expression::Expression()
    : nodes_(std::make_shared<const std::vector<Node>>(std::vector<Node>{Node{Op::Const, 0.0, -1, -1}})),
      root_(0),
      text_("0") {}

Expression Expression::parse(std::string_view text) { return ExpressionParser(text).run(); }

Expression Expression::constant(double c) { return parse(format_number(c)); }

Expression Expression::affine(double c, double cx, double cy) {
  return parse(format_number(c) + " + (" + format_number(cx) + ")*x + (" + format_number(cy) + ")*y");
}

Vec2 Expression::gradient(const Vec2& q) const {
  using D = Dual<double>;
  const double fx = evaluate<D>(D(q.x, 1.0), D(q.y, 0.0)).d;
  const double fy = evaluate<D>(D(q.x, 0.0), D(q.y, 1.0)).d;
  return {fx, fy};
}

std::optional<double> Expression::constant_value() const {
  if (uses_x_ || uses_y_) return std::nullopt;
  return evaluate(0.0, 0.0);
}

}  // namespace magzoll
