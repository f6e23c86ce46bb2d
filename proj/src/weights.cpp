#include "qlsys/weights.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace qlsys {

namespace {

double norm2(std::span<const double> U) {
  double s = 0.0;
  for (double u : U) s += u * u;
  return s;
}

std::string format_label(const char* name, double p) {
  std::ostringstream os;
  os.precision(17);
  os << name << "(" << p << ")";
  return os.str();
}

}  // namespace

Weight::Weight(std::string label, ScalarFunction f, ScalarFunction g, double shift)
    : label_(std::move(label)), f_(std::move(f)), g_(std::move(g)), shift_(shift) {
  if (!f_ || !g_) throw std::invalid_argument("weight needs both f and g");
  if (!std::isfinite(shift_)) throw std::invalid_argument("weight shift must be finite");
}

void Weight::eval_into(std::span<const double> U, double& f_val, std::span<double> fprime,
                       double& g_val) const {
  f_val = f_(U) + shift_;
  g_val = g_(U);
  if (!std::isfinite(f_val) || !std::isfinite(g_val))
    throw std::domain_error("weight '" + label_ + "' is not finite at the given point");
  for (std::size_t a = 0; a < U.size(); ++a) fprime[a] = -(U[a] * g_val);
}

WeightEval Weight::eval(std::span<const double> U) const {
  WeightEval e;
  e.fprime.resize(U.size());
  eval_into(U, e.f, e.fprime, e.g);
  return e;
}

Weight Weight::shifted(double delta) const { return Weight(label_, f_, g_, shift_ + delta); }

Weight make_weight(const WeightSpec& spec) {
  using Kind = WeightSpec::Kind;
  switch (spec.kind) {
    case Kind::gaussian: {
      const double a = spec.param;
      if (!(a > 0.0) || !std::isfinite(a)) throw std::invalid_argument("gaussian alpha must be > 0");
      return Weight(
          format_label("gaussian", a), [a](std::span<const double> U) { return -a * norm2(U); },
          [a](std::span<const double>) { return 2.0 * a; });
    }
    case Kind::sphere_chart: {
      const double b = spec.param;
      if (!(b > 0.0) || !std::isfinite(b))
        throw std::invalid_argument("sphere_chart beta must be > 0");
      return Weight(
          format_label("sphere_chart", b),
          [b](std::span<const double> U) { return -b * std::log((1.0 + norm2(U)) / 2.0); },
          [b](std::span<const double> U) { return 2.0 * b / (1.0 + norm2(U)); });
    }
    case Kind::constant: {
      const double c = spec.param;
      if (!std::isfinite(c)) throw std::invalid_argument("constant weight must be finite");
      return Weight(
          format_label("constant", c), [c](std::span<const double>) { return c; },
          [](std::span<const double>) { return 0.0; });
    }
    case Kind::custom:
      return Weight(spec.label, spec.f, spec.g);
  }
  throw std::invalid_argument("unknown weight kind");
}

WeightCheck validate_weight(const Weight& w, std::span<const double> bound, std::size_t samples) {
  if (samples == 0) throw std::invalid_argument("validate_weight needs at least one sample");
  const std::size_t N = bound.size();
  std::vector<std::size_t> idx(N, 0);
  std::vector<double> U(N);
  double min_g = std::numeric_limits<double>::infinity();
  while (true) {
    for (std::size_t a = 0; a < N; ++a) {
      if (samples == 1) {
        U[a] = 0.0;
      } else {
        const double t = static_cast<double>(idx[a]) / static_cast<double>(samples - 1);
        U[a] = -bound[a] + 2.0 * bound[a] * t;
      }
    }
    const double g = w.g(U);
    if (std::isnan(g)) {
      min_g = g;
      break;
    }
    min_g = std::min(min_g, g);
    std::size_t a = 0;
    while (a < N && ++idx[a] == samples) idx[a++] = 0;
    if (a == N) break;
  }
  return {min_g, min_g > 0.0};
}

}  // namespace qlsys
