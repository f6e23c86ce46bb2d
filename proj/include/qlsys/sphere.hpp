#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "qlsys/grid.hpp"
#include "qlsys/optimizer.hpp"

namespace qlsys {

/// Pole P of S^N in R^{N+1} with an orthonormal frame f_1..f_N of P's
/// orthogonal complement. Chart coordinates are Y_k = f_k . p / (1 - P . p).
class ChartPole {
 public:
  /// Normalizes `pole` and completes it to a frame by Gram-Schmidt over the
  /// standard basis, taken in order of increasing |P_i| (ties by index).
  explicit ChartPole(std::vector<double> pole);

  std::size_t chart_dim() const { return pole_.size() - 1; }
  const std::vector<double>& pole() const { return pole_; }
  const std::vector<std::vector<double>>& frame() const { return frame_; }
  ChartPole antipode() const;

 private:
  std::vector<double> pole_;
  std::vector<std::vector<double>> frame_;
};

std::vector<double> stereo_project(const ChartPole& pole, std::span<const double> p);
std::vector<double> stereo_inverse(const ChartPole& pole, std::span<const double> Y);

/// Deterministic low-discrepancy points on S^N (N = ambient_dim - 1).
std::vector<std::vector<double>> candidate_poles(std::size_t ambient_dim, std::size_t count);

struct PoleChoice {
  ChartPole pole;
  double margin = 0.0;
};

/// Candidate P maximizing min over samples of min(|P - s|, |P + s|); the
/// first maximizer wins. Throws std::runtime_error if the margin is < 1e-3.
PoleChoice choose_poles(const BoundaryData& boundary, std::size_t candidates = 4096);

struct SphereMapResult {
  Field chart_solution;  // N components
  Field map;             // N+1 components, unit at in-domain nodes, zero outside
  double chart_energy = 0.0;
  double dirichlet_energy = 0.0;
  double residual = 0.0;
  std::vector<double> pole;
  std::vector<double> bound;
  SolveReport report;
};

struct HarmonicPair {
  SphereMapResult first;   // chart at P
  SphereMapResult second;  // chart at -P
  double margin = 0.0;     // 0 when the pole was given
  double sup_distance = 0.0;
  std::vector<std::string> warnings;
};

/// Solves in the chart at `pole` with weight sphere_chart(2) and box bound
/// max|projected phi| + 0.5 per component, then maps back to the sphere.
SphereMapResult solve_in_chart(const BoundaryData& boundary, const ChartPole& pole,
                               const SolveOptions& opts = {});

/// Two harmonic maps with the same boundary data, from the charts at P and -P.
/// P comes from choose_poles unless given.
HarmonicPair solve_harmonic_pair(const BoundaryData& boundary, const SolveOptions& opts = {},
                                 std::size_t candidates = 4096);
HarmonicPair solve_harmonic_pair(const BoundaryData& boundary, const ChartPole& pole,
                                 const SolveOptions& opts = {});

/// max over interior nodes of |Delta_h V + |D_h V|^2 V| with central stencils.
double harmonic_residual(const Field& V);

/// Dirichlet energy of a sphere-valued field with the energy module's quadrature.
double dirichlet_energy(const Field& V);

/// Max nodewise Euclidean distance over in-domain nodes.
double sup_distance(const Field& a, const Field& b);

}  // namespace qlsys
