#include "qlsys/optimizer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "qlsys/parallel.hpp"
#include "qlsys/poisson.hpp"

namespace qlsys {

AdmissibleSet AdmissibleSet::from_boundary(BoundaryData boundary,
                                           std::optional<std::vector<double>> bound) {
  const std::size_t N = boundary.components;
  if (!boundary.grid || N == 0) throw std::invalid_argument("admissible set needs boundary data");
  std::vector<double> C(N, 0.0);
  for (std::size_t s = 0; s < boundary.values.size(); ++s)
    C[s % N] = std::max(C[s % N], std::abs(boundary.values[s]));
  if (bound) {
    if (bound->size() != N) throw std::invalid_argument("box bound has the wrong number of components");
    for (std::size_t a = 0; a < N; ++a) {
      if (!((*bound)[a] > 0.0) || !std::isfinite((*bound)[a]))
        throw std::invalid_argument("box bound must be positive and finite");
      if (C[a] > (*bound)[a])
        throw std::invalid_argument("boundary data violates the box bound in component " +
                                    std::to_string(a + 1));
    }
    C = *bound;
  } else {
    for (auto& c : C)
      if (c == 0.0) c = 1.0;
  }
  return AdmissibleSet{std::move(C), std::move(boundary)};
}

namespace {

void check_phi(const AdmissibleSet& adm) {
  const std::size_t N = adm.boundary.components;
  if (adm.bound.size() != N) throw std::invalid_argument("box bound has the wrong number of components");
  for (std::size_t s = 0; s < adm.boundary.values.size(); ++s)
    if (std::abs(adm.boundary.values[s]) > adm.bound[s % N])
      throw std::invalid_argument("boundary data lies outside the box bound");
}

void check_grid(const Field& U, const AdmissibleSet& adm) {
  if (U.grid().dims() != adm.boundary.grid->dims() ||
      U.grid().classes() != adm.boundary.grid->classes() ||
      U.components() != adm.boundary.components)
    throw std::invalid_argument("field does not match the admissible set's grid");
}

void project_in_place(Field& U, const AdmissibleSet& adm) {
  const Grid& g = *adm.boundary.grid;
  const std::size_t N = adm.boundary.components;
  for (std::size_t p : g.interior_nodes())
    for (std::size_t a = 0; a < N; ++a) U(p, a) = std::clamp(U(p, a), -adm.bound[a], adm.bound[a]);
  const auto& bn = g.boundary_nodes();
  for (std::size_t s = 0; s < bn.size(); ++s)
    for (std::size_t a = 0; a < N; ++a) U(bn[s], a) = adm.boundary.values[s * N + a];
  for (std::size_t node = 0; node < g.node_count(); ++node)
    if (!g.in_domain(node))
      for (std::size_t a = 0; a < N; ++a) U(node, a) = 0.0;
}

std::size_t count_active(const Field& U, std::span<const double> bound) {
  std::size_t active = 0;
  for (std::size_t p : U.grid().interior_nodes())
    for (std::size_t a = 0; a < U.components(); ++a)
      if (U(p, a) >= bound[a] || U(p, a) <= -bound[a]) {
        ++active;
        break;
      }
  return active;
}

Field initial_field(const AdmissibleSet& adm, const SolveOptions& opts) {
  const std::size_t N = adm.boundary.components;
  switch (opts.init) {
    case InitKind::harmonic_extension:
      return harmonic_extension(adm.boundary);
    case InitKind::boundary_constant: {
      Field U = field_from_boundary(adm.boundary);
      std::vector<double> mean(N, 0.0);
      std::vector<double> lo(N, std::numeric_limits<double>::infinity()), hi(N, -lo[0]);
      const std::size_t nb = adm.boundary.grid->boundary_nodes().size();
      for (std::size_t s = 0; s < nb; ++s)
        for (std::size_t a = 0; a < N; ++a) {
          const double v = adm.boundary.values[s * N + a];
          mean[a] += v;
          lo[a] = std::min(lo[a], v);
          hi[a] = std::max(hi[a], v);
        }
      for (std::size_t a = 0; a < N; ++a) mean[a] = std::clamp(mean[a] / static_cast<double>(nb), lo[a], hi[a]);
      for (std::size_t p : adm.boundary.grid->interior_nodes())
        for (std::size_t a = 0; a < N; ++a) U(p, a) = mean[a];
      return U;
    }
    case InitKind::given:
      if (!opts.initial) throw std::invalid_argument("init 'given' requires an initial field");
      check_grid(*opts.initial, adm);
      return *opts.initial;
  }
  throw std::invalid_argument("unknown init kind");
}

}  // namespace

Field project_admissible(const Field& U, const AdmissibleSet& adm) {
  check_phi(adm);
  check_grid(U, adm);
  Field out = U;
  project_in_place(out, adm);
  return out;
}

bool is_admissible(const Field& U, const AdmissibleSet& adm) {
  const Grid& g = *adm.boundary.grid;
  const std::size_t N = adm.boundary.components;
  for (std::size_t p : g.interior_nodes())
    for (std::size_t a = 0; a < N; ++a)
      if (!(U(p, a) >= -adm.bound[a] && U(p, a) <= adm.bound[a])) return false;
  const auto& bn = g.boundary_nodes();
  for (std::size_t s = 0; s < bn.size(); ++s)
    for (std::size_t a = 0; a < N; ++a)
      if (U(bn[s], a) != adm.boundary.values[s * N + a]) return false;
  return true;
}

double projected_gradient_norm(const Field& U, const Field& grad, std::span<const double> bound) {
  double norm = 0.0;
  for (std::size_t p : U.grid().interior_nodes())
    for (std::size_t a = 0; a < U.components(); ++a) {
      const double gi = grad(p, a);
      const double u = U(p, a);
      if ((u >= bound[a] && gi < 0.0) || (u <= -bound[a] && gi > 0.0)) continue;
      norm = std::max(norm, std::abs(gi));
    }
  return norm;
}

double kkt_residual(const Field& U, const Weight& w, const AdmissibleSet& adm,
                    const CoefficientTensor* A) {
  check_phi(adm);
  check_grid(U, adm);
  if (!is_admissible(U, adm)) throw std::invalid_argument("field is not admissible");
  return projected_gradient_norm(U, grad_energy(U, w, A), adm.bound);
}

SolveResult minimize(const Weight& w, const AdmissibleSet& adm, const CoefficientTensor* A,
                     const SolveOptions& opts) {
  const auto t0 = std::chrono::steady_clock::now();
  check_phi(adm);
  if (opts.max_iters < 1) throw std::invalid_argument("max_iters must be >= 1");
  if (opts.tol_pg && !(*opts.tol_pg > 0.0)) throw std::invalid_argument("tol_pg must be > 0");
  if (opts.step == StepRule::fixed && !(opts.fixed_step > 0.0))
    throw std::invalid_argument("fixed step must be > 0");

  constexpr double kMinStep = 1e-12;
  constexpr double kMaxStep = 1e6;
  constexpr double kArmijo = 1e-4;
  constexpr int kMaxBacktracks = 60;
  constexpr double kRoundoffDecrease = 1e-10;

  const GridPtr& grid = adm.boundary.grid;
  const std::size_t N = adm.boundary.components;
  EnergyAssembler assembler(grid, N, w, A);

  Field x = initial_field(adm, opts);
  project_in_place(x, adm);
  Field g(grid, N), g_new(grid, N), xt(grid, N);
  std::vector<double> cells, cells_new, diff;

  double E = assembler.evaluate(x, cells, &g);
  SolveReport rep;
  rep.tol_pg = opts.tol_pg.value_or(1e-8 * (1.0 + E));
  double pg = projected_gradient_norm(x, g, adm.bound);
  rep.energy_history.push_back(E);
  rep.pg_history.push_back(pg);

  double gmax = 0.0;
  for (double v : g.values()) gmax = std::max(gmax, std::abs(v));
  double alpha = opts.step == StepRule::fixed
                     ? opts.fixed_step
                     : std::clamp(gmax > 0.0 ? 1.0 / gmax : 1.0, kMinStep, kMaxStep);

  const auto& interior = grid->interior_nodes();
  auto trial = [&](double step) {
    xt = x;
    for (std::size_t p : interior)
      for (std::size_t a = 0; a < N; ++a)
        xt(p, a) = std::clamp(x(p, a) - step * g(p, a), -adm.bound[a], adm.bound[a]);
  };
  // Returns true when the trial point passes sufficient decrease. Once the
  // predicted decrease is at roundoff level the slope form of the Armijo
  // test (Hager-Zhang approximate Wolfe) replaces the energy difference.
  auto evaluate_trial = [&](double& Et) {
    double gd = 0.0;
    bool moved = false;
    for (std::size_t p : interior)
      for (std::size_t a = 0; a < N; ++a) {
        const double s = xt(p, a) - x(p, a);
        gd += g(p, a) * s;
        moved = moved || s != 0.0;
      }
    if (!moved) return false;
    try {
      Et = assembler.evaluate(xt, cells_new, &g_new);
    } catch (const std::domain_error&) {
      return false;
    }
    if (Et > E) return false;
    diff.resize(cells.size());
    for (std::size_t c = 0; c < cells.size(); ++c) diff[c] = cells_new[c] - cells[c];
    if (compensated_sum(diff) <= kArmijo * gd) return true;
    if (std::abs(gd) > kRoundoffDecrease * (1.0 + std::abs(E))) return false;
    double gd_new = 0.0;
    for (std::size_t p : interior)
      for (std::size_t a = 0; a < N; ++a) gd_new += g_new(p, a) * (xt(p, a) - x(p, a));
    return gd_new <= (2 * kArmijo - 1) * gd;
  };

  rep.status = "max_iters reached";
  while (true) {
    if (pg <= rep.tol_pg) {
      rep.converged = true;
      rep.status = "converged";
      break;
    }
    if (rep.iterations >= opts.max_iters) break;

    double Et = E;
    bool accepted = false;
    double step = alpha;
    for (int bt = 0; bt <= kMaxBacktracks; ++bt, step *= 0.5) {
      trial(step);
      if (evaluate_trial(Et)) {
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      ++rep.line_search_failures;
      trial(kMinStep);
      accepted = evaluate_trial(Et);
      if (!accepted) {
        rep.status = "line search failed";
        break;
      }
    }

    // s = xt - x, y = g_new - g over interior entries.
    double ss = 0.0, sy = 0.0;
    for (std::size_t p : interior)
      for (std::size_t a = 0; a < N; ++a) {
        const double s = xt(p, a) - x(p, a);
        ss += s * s;
        sy += s * (g_new(p, a) - g(p, a));
      }
    std::swap(x, xt);
    std::swap(g, g_new);
    std::swap(cells, cells_new);
    E = Et;
    pg = projected_gradient_norm(x, g, adm.bound);
    ++rep.iterations;
    rep.energy_history.push_back(E);
    rep.pg_history.push_back(pg);

    if (opts.step == StepRule::fixed) {
      alpha = opts.fixed_step;
    } else {
      alpha = (sy > 0.0 && ss > 0.0) ? ss / sy : kMaxStep;
      alpha = std::clamp(alpha, kMinStep, kMaxStep);
    }
  }

  rep.active_constraints = count_active(x, adm.bound);
  rep.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return SolveResult{std::move(x), std::move(rep)};
}

}  // namespace qlsys
