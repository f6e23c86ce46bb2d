#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "qlsys/grid.hpp"
#include "qlsys/optimizer.hpp"
#include "qlsys/weights.hpp"

namespace qlsys {

struct RadiusReport {
  double radius = 0.0;
  std::size_t interior_nodes = 0;
  double sup_norm = 0.0;
  double energy = 0.0;             // E over B_R^+
  double competitor_energy = 0.0;  // E of sampled phi over B_R^+
  double window_energy = 0.0;
  /// Sup-norm difference to the previous radius on the window; empty for the first.
  std::optional<double> window_difference;
  SolveReport solve;
};

struct ExhaustionReport {
  std::vector<double> radii;
  std::vector<Interval> window;
  std::vector<double> bound;
  std::vector<RadiusReport> per_radius;
  /// True iff every |u_R|_inf <= |C|_inf.
  bool uniform_bound = false;
  /// Largest-radius solution restricted to the window.
  std::optional<Field> window_limit;
};

/// Solves the Dirichlet problem on half-balls B_R^+ = {x_n >= 0, |x| <= R}
/// with spacing h for each radius, phi sampled on the whole boundary (flat
/// and curved parts), and a common box bound C = componentwise sup of the
/// sampled |phi|. The window must lie in the smallest half-ball and be
/// aligned to the lattice.
ExhaustionReport solve_exhaustion(const VectorFunction& phi, std::size_t dim, const Weight& w,
                                  const std::vector<double>& radii, double h,
                                  const std::vector<Interval>& window,
                                  const SolveOptions& opts = {});

}  // namespace qlsys
