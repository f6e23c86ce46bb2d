#include "qlsys/halfspace.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "qlsys/energy.hpp"

namespace qlsys {

namespace {

void check_window(const std::vector<Interval>& window, std::size_t dim, double R) {
  if (window.size() != dim) throw std::invalid_argument("window rank does not match dimension");
  for (const auto& iv : window)
    if (!(iv.lo < iv.hi)) throw std::invalid_argument("window interval is empty");
  if (window.back().lo < 0.0) throw std::invalid_argument("window leaves the half-space");
  // Farthest window corner from the origin.
  double r2 = 0.0;
  for (const auto& iv : window) {
    const double m = std::max(std::abs(iv.lo), std::abs(iv.hi));
    r2 += m * m;
  }
  if (std::sqrt(r2) > R * (1.0 + 1e-12))
    throw std::invalid_argument("window is not contained in the smallest half-ball");
}

}  // namespace

ExhaustionReport solve_exhaustion(const VectorFunction& phi, std::size_t dim, const Weight& w,
                                  const std::vector<double>& radii, double h,
                                  const std::vector<Interval>& window,
                                  const SolveOptions& opts) {
  if (radii.empty()) throw std::invalid_argument("exhaustion needs at least one radius");
  for (std::size_t k = 0; k < radii.size(); ++k) {
    if (!(radii[k] > 0.0)) throw std::invalid_argument("radii must be positive");
    if (k > 0 && !(radii[k] > radii[k - 1]))
      throw std::invalid_argument("radii must be strictly increasing");
  }
  check_window(window, dim, radii.front());

  std::vector<GridPtr> grids;
  std::vector<BoundaryData> data;
  for (double R : radii) {
    const auto domain = DomainSpec::half_ball(dim, R);
    const auto res = resolution_for_spacing(domain, h);
    grids.push_back(build_grid(domain, res));
    data.push_back(sample_boundary(grids.back(), phi));
  }

  const std::size_t N = data.front().components;
  std::vector<double> C(N, 0.0);
  for (const auto& bd : data) {
    if (bd.components != N) throw std::invalid_argument("phi changes its number of components");
    for (std::size_t s = 0; s < bd.values.size(); ++s)
      C[s % N] = std::max(C[s % N], std::abs(bd.values[s]));
  }
  for (auto& c : C)
    if (c == 0.0) c = 1.0;
  const double cmax = *std::max_element(C.begin(), C.end());

  ExhaustionReport rep;
  rep.radii = radii;
  rep.window = window;
  rep.bound = C;
  rep.uniform_bound = true;

  std::optional<Field> previous;
  for (std::size_t k = 0; k < radii.size(); ++k) {
    const auto adm = AdmissibleSet::from_boundary(data[k], C);
    SolveResult solved = minimize(w, adm, nullptr, opts);

    RadiusReport r;
    r.radius = radii[k];
    r.interior_nodes = grids[k]->interior_nodes().size();
    for (std::size_t p = 0; p < grids[k]->node_count(); ++p)
      if (grids[k]->in_domain(p))
        for (std::size_t a = 0; a < N; ++a)
          r.sup_norm = std::max(r.sup_norm, std::abs(solved.solution(p, a)));
    r.energy = solved.report.energy_history.back();
    r.competitor_energy = energy(sample_field(grids[k], phi), w).value;

    Field restricted = restrict_field(solved.solution, window);
    r.window_energy = energy(restricted, w).value;
    if (previous) {
      double d = 0.0;
      for (std::size_t i = 0; i < restricted.values().size(); ++i)
        d = std::max(d, std::abs(restricted.values()[i] - previous->values()[i]));
      r.window_difference = d;
    }
    if (r.sup_norm > cmax) rep.uniform_bound = false;
    r.solve = std::move(solved.report);
    rep.per_radius.push_back(std::move(r));
    previous = std::move(restricted);
  }
  rep.window_limit = std::move(previous);
  return rep;
}

}  // namespace qlsys
