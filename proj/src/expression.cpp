#include "qlsys/expression.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <numbers>
#include <utility>

namespace qlsys {

class ExpressionParser {
 public:
  explicit ExpressionParser(std::string_view s) : s_(s) {}

  Expression run() {
    Expression e;
    e.text_ = std::string(s_);
    out_ = &e;
    e.root_ = additive();
    skip_space();
    if (pos_ < s_.size()) fail("unexpected '" + std::string(1, s_[pos_]) + "'");
    return e;
  }

 private:
  using Op = Expression::Op;
  using Fn = Expression::Fn;

  [[noreturn]] void fail(const std::string& msg) const { throw ExpressionError(pos_ + 1, msg); }

  void skip_space() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_space();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  std::size_t add(Expression::Node n) {
    out_->nodes_.push_back(std::move(n));
    return out_->nodes_.size() - 1;
  }

  std::size_t binary(Op op, std::size_t a, std::size_t b) { return add({op, 0.0, 0, {a, b}}); }

  std::size_t additive() {
    std::size_t lhs = multiplicative();
    while (true) {
      if (accept('+'))
        lhs = binary(Op::add, lhs, multiplicative());
      else if (accept('-'))
        lhs = binary(Op::sub, lhs, multiplicative());
      else
        return lhs;
    }
  }

  std::size_t multiplicative() {
    std::size_t lhs = unary();
    while (true) {
      if (accept('*'))
        lhs = binary(Op::mul, lhs, unary());
      else if (accept('/'))
        lhs = binary(Op::div, lhs, unary());
      else
        return lhs;
    }
  }

  std::size_t unary() {
    if (accept('-')) return add({Op::neg, 0.0, 0, {unary()}});
    if (accept('+')) return unary();
    return power();
  }

  std::size_t power() {
    const std::size_t base = primary();
    if (accept('^')) return binary(Op::pow, base, unary());
    return base;
  }

  std::size_t primary() {
    skip_space();
    if (pos_ >= s_.size()) fail("unexpected end of expression");
    const char c = s_[pos_];
    if (accept('(')) {
      const std::size_t inner = additive();
      if (!accept(')')) fail("expected ')'");
      return inner;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return identifier();
    fail("unexpected '" + std::string(1, c) + "'");
  }

  std::size_t number() {
    double v = 0.0;
    const char* first = s_.data() + pos_;
    const auto [ptr, ec] = std::from_chars(first, s_.data() + s_.size(), v);
    if (ec != std::errc()) fail("malformed number");
    pos_ += static_cast<std::size_t>(ptr - first);
    return add({Op::number, v, 0, {}});
  }

  std::size_t identifier() {
    const std::size_t start = pos_;
    while (pos_ < s_.size() &&
           (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_'))
      ++pos_;
    const std::string name(s_.substr(start, pos_ - start));

    if (name == "pi") return add({Op::number, std::numbers::pi, 0, {}});
    if (name == "e") return add({Op::number, std::numbers::e, 0, {}});
    if (name.size() > 1 && name[0] == 'x' &&
        std::all_of(name.begin() + 1, name.end(), [](char ch) { return std::isdigit(static_cast<unsigned char>(ch)); })) {
      const std::size_t k = std::stoul(name.substr(1));
      if (k == 0) {
        pos_ = start;
        fail("coordinates are numbered from x1");
      }
      out_->max_var_ = std::max(out_->max_var_, k);
      return add({Op::variable, 0.0, k - 1, {}});
    }

    static const std::pair<const char*, Fn> table[] = {
        {"sin", Fn::sin},   {"cos", Fn::cos}, {"exp", Fn::exp}, {"log", Fn::log},
        {"sqrt", Fn::sqrt}, {"abs", Fn::abs}, {"min", Fn::min}, {"max", Fn::max}};
    for (const auto& [fname, fn] : table) {
      if (name != fname) continue;
      if (!accept('(')) fail("expected '(' after " + name);
      std::vector<std::size_t> args{additive()};
      while (accept(',')) args.push_back(additive());
      if (!accept(')')) fail("expected ')' to close " + name);
      const bool variadic = fn == Fn::min || fn == Fn::max;
      if (variadic ? args.size() < 2 : args.size() != 1) {
        pos_ = start;
        fail(name + (variadic ? " needs at least two arguments" : " takes one argument"));
      }
      return add({Op::call, 0.0, static_cast<std::size_t>(fn), std::move(args)});
    }
    pos_ = start;
    fail("unknown identifier '" + name + "'");
  }

  std::string_view s_;
  std::size_t pos_ = 0;
  Expression* out_ = nullptr;
};

Expression Expression::parse(std::string_view text) { return ExpressionParser(text).run(); }

double Expression::operator()(std::span<const double> x) const {
  if (x.size() < max_var_)
    throw std::invalid_argument("expression uses x" + std::to_string(max_var_) + " but only " +
                                std::to_string(x.size()) + " coordinates are given");
  return eval(root_, x);
}

double Expression::eval(std::size_t id, std::span<const double> x) const {
  const Node& n = nodes_[id];
  switch (n.op) {
    case Op::number: return n.value;
    case Op::variable: return x[n.index];
    case Op::neg: return -eval(n.args[0], x);
    case Op::add: return eval(n.args[0], x) + eval(n.args[1], x);
    case Op::sub: return eval(n.args[0], x) - eval(n.args[1], x);
    case Op::mul: return eval(n.args[0], x) * eval(n.args[1], x);
    case Op::div: return eval(n.args[0], x) / eval(n.args[1], x);
    case Op::pow: return std::pow(eval(n.args[0], x), eval(n.args[1], x));
    case Op::call: {
      const double a = eval(n.args[0], x);
      switch (static_cast<Fn>(n.index)) {
        case Fn::sin: return std::sin(a);
        case Fn::cos: return std::cos(a);
        case Fn::exp: return std::exp(a);
        case Fn::log: return std::log(a);
        case Fn::sqrt: return std::sqrt(a);
        case Fn::abs: return std::abs(a);
        case Fn::min:
        case Fn::max: {
          double r = a;
          for (std::size_t k = 1; k < n.args.size(); ++k) {
            const double b = eval(n.args[k], x);
            r = static_cast<Fn>(n.index) == Fn::min ? std::min(r, b) : std::max(r, b);
          }
          return r;
        }
      }
    }
  }
  return 0.0;
}

}  // namespace qlsys
