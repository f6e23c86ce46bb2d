#include "qlsys/scalar_oracle.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/tools/roots.hpp>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <tuple>

namespace qlsys {

TransformTable::TransformTable(ScalarWeight f, double range, std::size_t segments)
    : f_(std::move(f)), range_(range), segments_(segments + segments % 2) {
  if (!f_) throw std::invalid_argument("transform table needs a weight");
  if (!(range_ > 0.0) || !std::isfinite(range_))
    throw std::invalid_argument("transform table range must be positive");
  if (segments_ < 2) throw std::invalid_argument("transform table needs at least 2 segments");

  for (std::size_t k = 0; k <= segments_; ++k)
    if (!std::isfinite(derivative(knot(k))))
      throw std::overflow_error("e^{f/2} overflows on the transform range");

  const std::size_t mid = segments_ / 2;
  knot_values_.assign(segments_ + 1, 0.0);
  for (std::size_t k = mid + 1; k <= segments_; ++k)
    knot_values_[k] = knot_values_[k - 1] + integrate(knot(k - 1), knot(k));
  for (std::size_t k = mid; k-- > 0;)
    knot_values_[k] = knot_values_[k + 1] - integrate(knot(k), knot(k + 1));
  for (double v : knot_values_)
    if (!std::isfinite(v)) throw std::overflow_error("transform table overflowed");
}

double TransformTable::knot(std::size_t k) const {
  const auto half = static_cast<double>(segments_ / 2);
  return range_ * ((static_cast<double>(k) - half) / half);
}

double TransformTable::derivative(double u) const { return std::exp(0.5 * f_(u)); }

double TransformTable::integrate(double a, double b) const {
  if (a == b) return 0.0;
  const double sign = b > a ? 1.0 : -1.0;
  const double lo = std::min(a, b), hi = std::max(a, b);
  auto integrand = [this](double s) { return derivative(s); };
  // At most one table segment wide, where a 30-point rule is exact to rounding.
  return sign * boost::math::quadrature::gauss<double, 30>::integrate(integrand, lo, hi);
}

double TransformTable::forward(double u) const {
  if (!std::isfinite(u) || std::abs(u) > range_ * (1.0 + 1e-15))
    throw std::out_of_range("value outside the transform table range");
  const auto half = static_cast<double>(segments_ / 2);
  const double t = std::clamp(u / range_ * half, -half, half);
  const auto j = static_cast<long>(std::trunc(t));
  const auto k = static_cast<std::size_t>(static_cast<long>(segments_ / 2) + j);
  return knot_values_[k] + integrate(knot(k), u);
}

double TransformTable::inverse(double w) const {
  const double lo_v = knot_values_.front(), hi_v = knot_values_.back();
  const double slack = 1e-14 * std::max(1.0, hi_v - lo_v);
  if (!std::isfinite(w) || w < lo_v - slack || w > hi_v + slack)
    throw std::out_of_range("value outside the transform table image");
  w = std::clamp(w, lo_v, hi_v);
  auto it = std::upper_bound(knot_values_.begin(), knot_values_.end(), w);
  std::size_t k = it == knot_values_.begin() ? 0 : static_cast<std::size_t>(it - knot_values_.begin()) - 1;
  k = std::min(k, segments_ - 1);
  const double a = knot(k), b = knot(k + 1);
  const double wa = knot_values_[k], wb = knot_values_[k + 1];
  if (w == wa) return a;
  if (w == wb) return b;
  const double guess = a + (b - a) * (w - wa) / (wb - wa);
  auto residual = [this, w](double u) { return std::make_tuple(forward(u) - w, derivative(u)); };
  return boost::math::tools::newton_raphson_iterate(residual, guess, a, b, 52);
}

TransformTable halfweight_table(const Weight& w, double range) {
  return TransformTable([w](double s) { return w.f(std::span<const double>(&s, 1)); }, range);
}

namespace {

double max_abs(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

BoundaryData transformed_boundary(const BoundaryData& boundary, const TransformTable& table) {
  BoundaryData wb = boundary;
  for (auto& v : wb.values) v = table.forward(v);
  return wb;
}

// u = W^{-1}(v) at in-domain nodes, phi copied verbatim onto the boundary.
Field map_back(const Field& v, const BoundaryData& boundary, const TransformTable& table) {
  const Grid& g = *boundary.grid;
  Field u(boundary.grid, 1);
  for (std::size_t p : g.interior_nodes()) u(p, 0) = table.inverse(v(p, 0));
  const auto& bn = g.boundary_nodes();
  for (std::size_t s = 0; s < bn.size(); ++s) u(bn[s], 0) = boundary.values[s];
  return u;
}

void require_scalar(const BoundaryData& boundary) {
  if (boundary.components != 1) throw std::invalid_argument("scalar oracle needs N = 1");
}

}  // namespace

Field solve_scalar_exact(const BoundaryData& boundary, const Weight& w) {
  require_scalar(boundary);
  double range = 2.0 * (1.0 + max_abs(boundary.values));
  for (int attempt = 0;; ++attempt) {
    try {
      const auto table = halfweight_table(w, range);
      const Field v = poisson_dirichlet(transformed_boundary(boundary, table),
                                        SourceField::zeros(*boundary.grid));
      return map_back(v, boundary, table);
    } catch (const std::out_of_range&) {
      if (attempt > 0) throw;
      range *= 2.0;
    }
  }
}

ScalarSourceResult solve_scalar_source(const BoundaryData& boundary, const Weight& w,
                                       const SourceField& h, double damping,
                                       std::size_t max_iters) {
  require_scalar(boundary);
  if (!(damping > 0.0 && damping <= 1.0)) throw std::invalid_argument("damping must be in (0, 1]");
  const Grid& g = *boundary.grid;
  if (h.values.size() != g.node_count()) throw std::invalid_argument("source does not match grid");
  for (std::size_t p : g.interior_nodes())
    if (!std::isfinite(h.values[p])) throw std::domain_error("source contains non-finite values");

  double range = 2.0 * (1.0 + max_abs(boundary.values));
  for (int attempt = 0;; ++attempt) {
    try {
      const auto table = halfweight_table(w, range);
      const BoundaryData wb = transformed_boundary(boundary, table);
      Field v = poisson_dirichlet(wb, SourceField::zeros(g));

      ScalarSourceResult res{v, 0, false, 0.0, damping};
      double theta = damping;
      double prev_change = std::numeric_limits<double>::infinity();
      SourceField rhs = SourceField::zeros(g);
      while (res.iterations < max_iters) {
        ++res.iterations;
        for (std::size_t p : g.interior_nodes()) {
          const double u = table.inverse(v(p, 0));
          rhs.values[p] = std::exp(0.5 * w.f(std::span<const double>(&u, 1))) * h.values[p];
        }
        const Field vstar = poisson_dirichlet(wb, rhs);
        double change = 0.0;
        for (std::size_t p : g.interior_nodes()) {
          const double next = (1.0 - theta) * v(p, 0) + theta * vstar(p, 0);
          change = std::max(change, std::abs(next - v(p, 0)));
          v(p, 0) = next;
        }
        res.last_change = change;
        if (change <= 1e-10) {
          res.converged = true;
          break;
        }
        if (change > prev_change) theta *= 0.5;
        prev_change = change;
      }
      res.damping = theta;
      res.solution = map_back(v, boundary, table);
      return res;
    } catch (const std::out_of_range&) {
      if (attempt > 0) throw;
      range *= 2.0;
    }
  }
}

}  // namespace qlsys
