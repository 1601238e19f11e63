#pragma once

#include <cmath>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "magzoll/dual.hpp"
#include "magzoll/vec2.hpp"

namespace magzoll {

/// Scalar arithmetic expression over the two chart coordinates.
///
/// Grammar: numbers, `+ - * / ^`, unary minus, parentheses, the functions
/// sin cos tan exp log sqrt tanh, the constant `pi`, and the coordinate
/// names `x`/`theta`/`t` (first) and `y`/`phi` (second). Evaluation is
/// templated so the same tree runs on doubles and on dual numbers.
class Expression {
 public:
  enum class Op { Const, VarX, VarY, Add, Sub, Mul, Div, Neg, PowConst, Pow, Sin, Cos, Tan, Exp, Log, Sqrt, Tanh };

  struct Node {
    Op op = Op::Const;
    double value = 0.0;
    int lhs = -1;
    int rhs = -1;
  };

  Expression();  // the zero function

  /// Throws Error{ConfigError} with the offending column on malformed input.
  static Expression parse(std::string_view text);
  static Expression constant(double c);
  /// c + cx*x + cy*y
  static Expression affine(double c, double cx, double cy);

  double operator()(double x, double y) const { return evaluate(x, y); }
  double operator()(const Vec2& q) const { return evaluate(q.x, q.y); }

  template <class T>
  T evaluate(const T& x, const T& y) const {
    return eval_node<T>(root_, x, y);
  }

  /// Partial derivatives (df/dx, df/dy).
  Vec2 gradient(const Vec2& q) const;

  const std::string& text() const { return text_; }
  std::optional<double> constant_value() const;
  bool uses_x() const { return uses_x_; }
  bool uses_y() const { return uses_y_; }

 private:
  template <class T>
  T eval_node(int i, const T& x, const T& y) const;

  std::shared_ptr<const std::vector<Node>> nodes_;
  int root_ = 0;
  std::string text_;
  bool uses_x_ = false;
  bool uses_y_ = false;

  friend class ExpressionParser;
};

template <class T>
T Expression::eval_node(int i, const T& x, const T& y) const {
  using std::sin, std::cos, std::tan, std::exp, std::log, std::sqrt, std::tanh, std::pow;
  const Node& n = (*nodes_)[static_cast<std::size_t>(i)];
  switch (n.op) {
    case Op::Const: return T(n.value);
    case Op::VarX: return x;
    case Op::VarY: return y;
    case Op::Add: return eval_node<T>(n.lhs, x, y) + eval_node<T>(n.rhs, x, y);
    case Op::Sub: return eval_node<T>(n.lhs, x, y) - eval_node<T>(n.rhs, x, y);
    case Op::Mul: return eval_node<T>(n.lhs, x, y) * eval_node<T>(n.rhs, x, y);
    case Op::Div: return eval_node<T>(n.lhs, x, y) / eval_node<T>(n.rhs, x, y);
    case Op::Neg: return -eval_node<T>(n.lhs, x, y);
    case Op::PowConst: {
      const T base = eval_node<T>(n.lhs, x, y);
      const double p = n.value;
      if (p == std::floor(p) && std::abs(p) <= 16.0) {
        T r(1.0);
        for (int k = 0; k < static_cast<int>(std::abs(p)); ++k) r = r * base;
        return p < 0 ? T(1.0) / r : r;
      }
      return pow(base, p);
    }
    case Op::Pow: {
      const T base = eval_node<T>(n.lhs, x, y);
      const T e = eval_node<T>(n.rhs, x, y);
      return exp(e * log(base));
    }
    case Op::Sin: return sin(eval_node<T>(n.lhs, x, y));
    case Op::Cos: return cos(eval_node<T>(n.lhs, x, y));
    case Op::Tan: return tan(eval_node<T>(n.lhs, x, y));
    case Op::Exp: return exp(eval_node<T>(n.lhs, x, y));
    case Op::Log: return log(eval_node<T>(n.lhs, x, y));
    case Op::Sqrt: return sqrt(eval_node<T>(n.lhs, x, y));
    case Op::Tanh: return tanh(eval_node<T>(n.lhs, x, y));
  }
  return T(0.0);
}

}  // namespace magzoll
