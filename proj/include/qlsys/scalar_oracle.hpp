#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "qlsys/grid.hpp"
#include "qlsys/poisson.hpp"
#include "qlsys/weights.hpp"

namespace qlsys {

/// Tabulated half-weight transform W(u) = int_0^u e^{f(s)/2} ds on [-M, M].
///
/// W' = e^{f/2} > 0, so W is strictly increasing with W(0) = 0. Values
/// between knots are completed by 30-point Gauss-Legendre quadrature from the
/// nearest knot toward zero; the inverse is a bracketed Newton solve.
class TransformTable {
 public:
  using ScalarWeight = std::function<double(double)>;

  TransformTable(ScalarWeight f, double range, std::size_t segments = 1024);

  double forward(double u) const;
  double inverse(double w) const;
  double derivative(double u) const;

  double range() const { return range_; }
  double lowest_value() const { return knot_values_.front(); }
  double highest_value() const { return knot_values_.back(); }

 private:
  double knot(std::size_t k) const;
  double integrate(double a, double b) const;

  ScalarWeight f_;
  double range_;
  std::size_t segments_;
  std::vector<double> knot_values_;
};

/// Table for a scalar (N = 1) weight, f including its shift.
TransformTable halfweight_table(const Weight& w, double range);

/// Exact scalar solution with h = 0: harmonic extension of W(phi), mapped
/// back through W^{-1}. Boundary nodes carry phi exactly.
Field solve_scalar_exact(const BoundaryData& boundary, const Weight& w);

struct ScalarSourceResult {
  Field solution;
  std::size_t iterations = 0;
  bool converged = false;
  double last_change = 0.0;
  double damping = 1.0;
};

/// Damped Picard iteration on -Delta v = e^{f(W^{-1}(v))/2} h with
/// v = W(phi) on the boundary; stops when the sup-norm update is <= 1e-10.
/// The damping is halved whenever the update grows.
ScalarSourceResult solve_scalar_source(const BoundaryData& boundary, const Weight& w,
                                       const SourceField& h, double damping = 1.0,
                                       std::size_t max_iters = 500);

}  // namespace qlsys
