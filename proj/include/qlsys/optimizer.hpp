#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "qlsys/energy.hpp"
#include "qlsys/grid.hpp"
#include "qlsys/weights.hpp"

namespace qlsys {

/// Componentwise box -C <= U <= C plus the equality U = phi on boundary nodes.
struct AdmissibleSet {
  std::vector<double> bound;
  BoundaryData boundary;

  /// Validates -C <= phi <= C. Without an explicit bound, C is the
  /// componentwise max |phi| over boundary nodes (1 for an all-zero component).
  static AdmissibleSet from_boundary(BoundaryData boundary,
                                     std::optional<std::vector<double>> bound = std::nullopt);
};

enum class StepRule { bb_armijo, fixed };
enum class InitKind { harmonic_extension, boundary_constant, given };

struct SolveOptions {
  /// Projected-gradient sup-norm threshold; default 1e-8 * (1 + E(U_0)).
  std::optional<double> tol_pg;
  std::size_t max_iters = 50000;
  StepRule step = StepRule::bb_armijo;
  double fixed_step = 1.0;
  InitKind init = InitKind::harmonic_extension;
  std::optional<Field> initial;
};

struct SolveReport {
  std::size_t iterations = 0;
  std::vector<double> energy_history;  // iterations + 1 entries
  std::vector<double> pg_history;      // iterations + 1 entries
  std::size_t active_constraints = 0;  // interior nodes with a component on the box
  std::size_t line_search_failures = 0;
  double tol_pg = 0.0;
  double wall_seconds = 0.0;
  bool converged = false;
  std::string status;
};

struct SolveResult {
  Field solution;
  SolveReport report;
};

/// Clamps interior values into [-C, C] and overwrites boundary nodes with phi.
Field project_admissible(const Field& U, const AdmissibleSet& adm);

/// True when U satisfies the box and boundary equality exactly.
bool is_admissible(const Field& U, const AdmissibleSet& adm);

/// Sup-norm of the projected gradient at interior nodes: components on an
/// active bound whose descent direction points out of the box are dropped.
double projected_gradient_norm(const Field& U, const Field& grad, std::span<const double> bound);

/// Projected-gradient norm of the energy at an admissible U.
double kkt_residual(const Field& U, const Weight& w, const AdmissibleSet& adm,
                    const CoefficientTensor* A = nullptr);

/// Projected descent on the discrete energy over the admissible set.
///
/// Each step is P(U - alpha grad E) with alpha the Barzilai-Borwein length
/// (clamped to [1e-12, 1e6]) or the fixed step, followed by Armijo
/// backtracking (factor 1/2, parameter 1e-4) on the projected path. The
/// sufficient-decrease test uses the cellwise energy difference, or the
/// slope form of the test when the predicted decrease is below 1e-10 (1 + E).
/// Steps that leave U unchanged are rejected, and accepted steps never
/// increase the recorded energy.
SolveResult minimize(const Weight& w, const AdmissibleSet& adm, const CoefficientTensor* A,
                     const SolveOptions& opts = {});

}  // namespace qlsys
