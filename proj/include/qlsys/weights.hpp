#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace qlsys {

using ScalarFunction = std::function<double(std::span<const double>)>;

struct WeightEval {
  double f = 0.0;
  std::vector<double> fprime;
  double g = 0.0;
};

/// Weight f : R^N -> R given together with g, where f'(U) = -U g(U).
///
/// Only g is stored; the gradient of f is always formed as -U g(U), so the
/// structural hypothesis holds by construction. `shift` is added to f.
class Weight {
 public:
  Weight(std::string label, ScalarFunction f, ScalarFunction g, double shift = 0.0);

  double f(std::span<const double> U) const { return f_(U) + shift_; }
  double g(std::span<const double> U) const { return g_(U); }

  WeightEval eval(std::span<const double> U) const;
  /// Allocation-free evaluation for the assembly loops.
  void eval_into(std::span<const double> U, double& f_val, std::span<double> fprime,
                 double& g_val) const;

  Weight shifted(double delta) const;

  const std::string& label() const { return label_; }
  double shift() const { return shift_; }

 private:
  std::string label_;
  ScalarFunction f_;
  ScalarFunction g_;
  double shift_;
};

struct WeightSpec {
  enum class Kind { gaussian, sphere_chart, constant, custom };
  Kind kind = Kind::constant;
  double param = 0.0;  // alpha, beta or the constant value c
  ScalarFunction f;    // custom only
  ScalarFunction g;    // custom only
  std::string label = "custom";

  static WeightSpec gaussian(double alpha) { return {Kind::gaussian, alpha, {}, {}, {}}; }
  static WeightSpec sphere_chart(double beta) { return {Kind::sphere_chart, beta, {}, {}, {}}; }
  static WeightSpec constant(double c) { return {Kind::constant, c, {}, {}, {}}; }
  static WeightSpec custom(ScalarFunction f, ScalarFunction g, std::string label = "custom") {
    return {Kind::custom, 0.0, std::move(f), std::move(g), std::move(label)};
  }
};

/// gaussian(a): f = -a|U|^2, g = 2a.
/// sphere_chart(b): f = -b log((1+|U|^2)/2), g = 2b/(1+|U|^2).
/// constant(c): f = c, g = 0.
Weight make_weight(const WeightSpec& spec);

struct WeightCheck {
  double min_g = 0.0;
  bool ok = false;
};

/// Minimum of g over a `samples`-per-axis lattice on [-C, C]^N.
WeightCheck validate_weight(const Weight& w, std::span<const double> bound, std::size_t samples);

}  // namespace qlsys
