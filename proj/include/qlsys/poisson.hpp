#pragma once

#include <cstddef>
#include <vector>

#include "qlsys/grid.hpp"

namespace qlsys {

/// Per-node source values h(x); only interior entries are read.
struct SourceField {
  std::vector<double> values;

  static SourceField zeros(const Grid& grid) { return {std::vector<double>(grid.node_count())}; }
  static SourceField constant(const Grid& grid, double v) {
    return {std::vector<double>(grid.node_count(), v)};
  }
};

struct PoissonStats {
  std::size_t iterations = 0;
  double relative_residual = 0.0;
};

/// Solves -Delta_h v = rhs at interior nodes with the cross stencil and the
/// scalar Dirichlet values of `boundary`, by conjugate gradients to relative
/// residual <= rel_tol. Throws std::runtime_error if CG stalls.
Field poisson_dirichlet(const BoundaryData& boundary, const SourceField& rhs,
                        double rel_tol = 1e-12, PoissonStats* stats = nullptr);

/// Componentwise discrete harmonic extension of vector-valued boundary data.
Field harmonic_extension(const BoundaryData& boundary);

}  // namespace qlsys
