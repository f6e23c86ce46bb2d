#include "qlsys/poisson.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace qlsys {

namespace {

// -Delta_h restricted to interior unknowns; boundary neighbours are moved to
// the right-hand side by the caller.
class InteriorLaplacian {
 public:
  explicit InteriorLaplacian(const Grid& g) : g_(g), slot_(g.node_count(), Grid::npos) {
    const auto& interior = g.interior_nodes();
    for (std::size_t k = 0; k < interior.size(); ++k) slot_[interior[k]] = k;
    for (double h : g.spacing()) inv_h2_.push_back(1.0 / (h * h));
  }

  std::size_t size() const { return g_.interior_nodes().size(); }
  std::size_t slot(std::size_t node) const { return slot_[node]; }

  void apply(const std::vector<double>& x, std::vector<double>& y) const {
    const auto& interior = g_.interior_nodes();
    for (std::size_t k = 0; k < interior.size(); ++k) {
      const std::size_t p = interior[k];
      double s = 0.0;
      for (std::size_t ax = 0; ax < g_.dim(); ++ax) {
        double acc = 2.0 * x[k];
        const std::size_t qp = slot_[p + g_.stride(ax)];
        const std::size_t qm = slot_[p - g_.stride(ax)];
        if (qp != Grid::npos) acc -= x[qp];
        if (qm != Grid::npos) acc -= x[qm];
        s += acc * inv_h2_[ax];
      }
      y[k] = s;
    }
  }

 private:
  const Grid& g_;
  std::vector<std::size_t> slot_;
  std::vector<double> inv_h2_;
};

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

}  // namespace

Field poisson_dirichlet(const BoundaryData& boundary, const SourceField& rhs, double rel_tol,
                        PoissonStats* stats) {
  const Grid& g = *boundary.grid;
  if (boundary.components != 1) throw std::invalid_argument("poisson_dirichlet is scalar");
  if (rhs.values.size() != g.node_count())
    throw std::invalid_argument("source field does not match the grid");
  if (g.interior_nodes().empty()) throw std::invalid_argument("grid has an empty interior");

  InteriorLaplacian L(g);
  const auto& interior = g.interior_nodes();
  const std::size_t n = L.size();

  Field v = field_from_boundary(boundary);
  // Unknowns are offsets from the boundary mean, clamped to the data range.
  double mean = 0.0, lo = boundary.values.front(), hi = lo;
  for (double x : boundary.values) {
    mean += x;
    lo = std::min(lo, x);
    hi = std::max(hi, x);
  }
  mean = std::clamp(mean / static_cast<double>(boundary.values.size()), lo, hi);

  std::vector<double> b(n);
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t p = interior[k];
    double s = rhs.values[p];
    if (!std::isfinite(s)) throw std::domain_error("source field contains non-finite values");
    for (std::size_t ax = 0; ax < g.dim(); ++ax) {
      const double w = 1.0 / (g.spacing()[ax] * g.spacing()[ax]);
      for (std::size_t q : {p + g.stride(ax), p - g.stride(ax)})
        if (g.node_class(q) == NodeClass::boundary) s += w * (v(q, 0) - mean);
    }
    b[k] = s;
  }

  std::vector<double> x(n, 0.0), r = b, d = r, Ad(n);
  const double bnorm = std::sqrt(dot(b, b));
  double rr = dot(r, r);
  std::size_t it = 0;
  const std::size_t cap = std::max<std::size_t>(1000, 10 * n);
  if (bnorm > 0.0) {
    while (std::sqrt(rr) > rel_tol * bnorm) {
      if (++it > cap)
        throw std::runtime_error("conjugate gradients did not converge in " + std::to_string(cap) +
                                 " iterations");
      L.apply(d, Ad);
      const double alpha = rr / dot(d, Ad);
      for (std::size_t k = 0; k < n; ++k) {
        x[k] += alpha * d[k];
        r[k] -= alpha * Ad[k];
      }
      const double rr_new = dot(r, r);
      const double beta = rr_new / rr;
      rr = rr_new;
      for (std::size_t k = 0; k < n; ++k) d[k] = r[k] + beta * d[k];
    }
  }
  for (std::size_t k = 0; k < n; ++k) v(interior[k], 0) = mean + x[k];
  if (stats) {
    stats->iterations = it;
    stats->relative_residual = bnorm > 0.0 ? std::sqrt(rr) / bnorm : 0.0;
  }
  return v;
}

Field harmonic_extension(const BoundaryData& boundary) {
  const Grid& g = *boundary.grid;
  const std::size_t N = boundary.components;
  Field out(boundary.grid, N);
  const auto zero = SourceField::zeros(g);
  BoundaryData scalar{boundary.grid, 1, std::vector<double>(g.boundary_nodes().size())};
  for (std::size_t a = 0; a < N; ++a) {
    for (std::size_t s = 0; s < scalar.values.size(); ++s) scalar.values[s] = boundary.values[s * N + a];
    const Field va = poisson_dirichlet(scalar, zero);
    for (std::size_t node = 0; node < g.node_count(); ++node)
      if (g.in_domain(node)) out(node, a) = va(node, 0);
  }
  return out;
}

}  // namespace qlsys
