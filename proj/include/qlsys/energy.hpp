#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <utility>
#include <vector>

#include "qlsys/grid.hpp"
#include "qlsys/weights.hpp"

namespace qlsys {

/// Coefficient tensor A(x)_{ij}^{ab}, i,j spatial and a,b component indices.
///
/// Entries are laid out as a row-major (nN x nN) matrix with row (i*N + a)
/// and column (j*N + b). The identity tensor carries no callback.
class CoefficientTensor {
 public:
  using EntryFunction = std::function<void(std::span<const double> x, std::span<double> entries)>;
  using DiagonalFunction = std::function<void(std::span<const double> x, std::span<double> diag)>;

  static CoefficientTensor identity(std::size_t space_dim, std::size_t components);
  static CoefficientTensor general(std::size_t space_dim, std::size_t components, EntryFunction fn);
  /// diag receives the nN diagonal entries, index i*N + a.
  static CoefficientTensor diagonal(std::size_t space_dim, std::size_t components,
                                    DiagonalFunction fn);

  bool is_identity() const { return !fn_; }
  std::size_t space_dim() const { return space_dim_; }
  std::size_t components() const { return components_; }
  std::size_t order() const { return space_dim_ * components_; }

  /// Raw entries at x (not symmetrized); throws on non-finite entries.
  void evaluate(std::span<const double> x, std::span<double> entries) const;
  /// Symmetrized entries (A + A^T)/2 at x; returns max |A - A^T|/2.
  double evaluate_symmetric(std::span<const double> x, std::span<double> entries) const;

 private:
  CoefficientTensor(std::size_t n, std::size_t N, EntryFunction fn)
      : space_dim_(n), components_(N), fn_(std::move(fn)) {}
  std::size_t space_dim_;
  std::size_t components_;
  EntryFunction fn_;
};

struct EnergyValue {
  double value = 0.0;
  std::vector<double> cell_contributions;
  /// (q, integral of |DU|^q) for q in {2, 2.5, 3}.
  std::vector<std::pair<double, double>> q_norms;
  /// Largest antisymmetric part of A removed by symmetrization.
  double symmetrization_delta = 0.0;
};

/// Cell-quadrature assembly of E(U) = sum_cells vol * e^{f(Ubar)} * Q(DU),
/// with Ubar the corner average and Q the (symmetrized) A-quadratic form of
/// the cell's first differences. Reused across evaluations on a fixed grid.
class EnergyAssembler {
 public:
  EnergyAssembler(GridPtr grid, std::size_t components, const Weight& weight,
                  const CoefficientTensor* tensor = nullptr);

  /// Fills cell_energy (one entry per active cell) and returns their
  /// compensated sum. When grad is non-null it receives dE/dU at interior
  /// nodes and zero elsewhere.
  double evaluate(const Field& U, std::vector<double>& cell_energy, Field* grad = nullptr) const;

  const Grid& grid() const { return *grid_; }
  std::size_t components() const { return components_; }
  double symmetrization_delta() const { return sym_delta_; }

 private:
  GridPtr grid_;
  std::size_t components_;
  Weight weight_;
  std::vector<double> cell_tensor_;  // empty for the identity
  double sym_delta_ = 0.0;
  mutable std::vector<double> corner_grad_;
};

EnergyValue energy(const Field& U, const Weight& w, const CoefficientTensor* A = nullptr);

/// Exact gradient of the discrete energy with respect to interior nodal
/// values; boundary and exterior entries are zero.
Field grad_energy(const Field& U, const Weight& w, const CoefficientTensor* A = nullptr);

/// Strong-form residual -e^{-f} div(e^{f} A grad U) + 1/2 f'(U) A(DU, DU) at
/// interior nodes, second-order central stencils with edge-midpoint weights.
Field el_residual(const Field& U, const Weight& w, const CoefficientTensor* A = nullptr);

struct EllipticityBounds {
  double lower = 0.0;
  double upper = 0.0;
};

/// Sampled min/max Rayleigh quotient of A over `points` and the nN axis
/// directions plus `sample_dirs` deterministic pseudo-random unit directions.
EllipticityBounds ellipticity_bounds(const CoefficientTensor& A,
                                     std::span<const std::vector<double>> points,
                                     std::size_t sample_dirs);

/// Max over interior entries of |analytic - central difference| relative to
/// the largest central-difference entry. Step is step_scale * (1 + |U|_inf).
double gradient_check(const Field& U, const Weight& w, const CoefficientTensor* A = nullptr,
                      double step_scale = 1e-5);

}  // namespace qlsys
