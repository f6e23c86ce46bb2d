#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace qlsys {

/// Parse failure at a 1-based column of the expression text.
class ExpressionError : public std::runtime_error {
 public:
  ExpressionError(std::size_t column, const std::string& what)
      : std::runtime_error(what), column_(column) {}
  std::size_t column() const { return column_; }

 private:
  std::size_t column_;
};

/// Arithmetic over coordinates x1..xn.
///
/// Grammar: + - * / and right-associative ^, unary minus (binding looser
/// than ^), parentheses, numbers, constants pi and e, and the functions
/// sin cos exp log sqrt abs (one argument) and min max (two or more).
class Expression {
 public:
  static Expression parse(std::string_view text);

  double operator()(std::span<const double> x) const;

  /// Largest coordinate index referenced (0 for a constant expression).
  std::size_t max_variable() const { return max_var_; }
  const std::string& text() const { return text_; }

  enum class Op { number, variable, neg, add, sub, mul, div, pow, call };
  enum class Fn { sin, cos, exp, log, sqrt, abs, min, max };

  struct Node {
    Op op = Op::number;
    double value = 0.0;
    std::size_t index = 0;  // variable index or function
    std::vector<std::size_t> args;
  };

 private:
  double eval(std::size_t node, std::span<const double> x) const;

  std::string text_;
  std::vector<Node> nodes_;
  std::size_t root_ = 0;
  std::size_t max_var_ = 0;

  friend class ExpressionParser;
};

}  // namespace qlsys
