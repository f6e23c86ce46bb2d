#include "qlsys/sphere.hpp"

#include <algorithm>
#include <boost/math/special_functions/erf.hpp>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <stdexcept>

#include "qlsys/energy.hpp"
#include "qlsys/weights.hpp"

namespace qlsys {

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm(std::span<const double> a) { return std::sqrt(dot(a, a)); }

double distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

void require_unit(std::span<const double> p, double tol, const char* what) {
  const double n = norm(p);
  if (!std::isfinite(n) || std::abs(n - 1.0) > tol)
    throw std::invalid_argument(std::string(what) + " is not a unit vector (|p| = " +
                                std::to_string(n) + ")");
}

double radical_inverse(std::size_t i, std::size_t base) {
  double inv = 1.0 / static_cast<double>(base), f = inv, r = 0.0;
  while (i > 0) {
    r += f * static_cast<double>(i % base);
    i /= base;
    f *= inv;
  }
  return r;
}

constexpr std::size_t kPrimes[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53};

}  // namespace

ChartPole::ChartPole(std::vector<double> pole) : pole_(std::move(pole)) {
  if (pole_.size() < 2) throw std::invalid_argument("pole needs at least two coordinates");
  const double n = norm(pole_);
  if (!std::isfinite(n) || n == 0.0) throw std::invalid_argument("pole must be a nonzero vector");
  for (auto& v : pole_) v /= n;

  const std::size_t m = pole_.size();
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [this](std::size_t a, std::size_t b) {
    return std::abs(pole_[a]) < std::abs(pole_[b]);
  });

  for (std::size_t k = 0; k < m && frame_.size() + 1 < m; ++k) {
    std::vector<double> v(m, 0.0);
    v[order[k]] = 1.0;
    // Two passes of modified Gram-Schmidt keep the frame orthonormal to rounding.
    for (int pass = 0; pass < 2; ++pass) {
      const double c = dot(v, pole_);
      for (std::size_t i = 0; i < m; ++i) v[i] -= c * pole_[i];
      for (const auto& f : frame_) {
        const double d = dot(v, f);
        for (std::size_t i = 0; i < m; ++i) v[i] -= d * f[i];
      }
    }
    const double len = norm(v);
    if (len < 1e-8) continue;
    for (auto& x : v) x /= len;
    frame_.push_back(std::move(v));
  }
  if (frame_.size() + 1 != m) throw std::logic_error("failed to complete the pole frame");
}

ChartPole ChartPole::antipode() const {
  std::vector<double> q = pole_;
  for (auto& v : q) v = -v;
  return ChartPole(std::move(q));
}

std::vector<double> stereo_project(const ChartPole& pole, std::span<const double> p) {
  const auto& P = pole.pole();
  if (p.size() != P.size()) throw std::invalid_argument("point dimension does not match pole");
  if (distance(p, P) < 1e-8) throw std::domain_error("point lies at the projection pole");
  const double denom = 1.0 - dot(P, p);
  std::vector<double> Y(pole.chart_dim());
  for (std::size_t k = 0; k < Y.size(); ++k) Y[k] = dot(pole.frame()[k], p) / denom;
  return Y;
}

std::vector<double> stereo_inverse(const ChartPole& pole, std::span<const double> Y) {
  const std::size_t N = pole.chart_dim();
  if (Y.size() != N) throw std::invalid_argument("chart vector has the wrong dimension");
  const double r2 = dot(Y, Y);
  if (!std::isfinite(r2)) throw std::domain_error("chart vector is not finite");
  const double s = 1.0 / (1.0 + r2);
  const double last = (r2 - 1.0) * s;
  std::vector<double> p(N + 1);
  for (std::size_t i = 0; i <= N; ++i) {
    double v = last * pole.pole()[i];
    for (std::size_t k = 0; k < N; ++k) v += 2.0 * Y[k] * s * pole.frame()[k][i];
    p[i] = v;
  }
  const double n = norm(p);
  for (auto& v : p) v /= n;
  return p;
}

std::vector<std::vector<double>> candidate_poles(std::size_t ambient_dim, std::size_t count) {
  if (ambient_dim < 2) throw std::invalid_argument("sphere needs ambient dimension >= 2");
  if (count < 16) throw std::invalid_argument("need at least 16 candidate poles");
  std::vector<std::vector<double>> out;
  out.reserve(count);
  const double n = static_cast<double>(count);
  if (ambient_dim == 2) {
    for (std::size_t i = 0; i < count; ++i) {
      const double t = 2.0 * std::numbers::pi * (static_cast<double>(i) + 0.5) / n;
      out.push_back({std::cos(t), std::sin(t)});
    }
  } else if (ambient_dim == 3) {
    const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
    for (std::size_t i = 0; i < count; ++i) {
      const double z = 1.0 - (2.0 * static_cast<double>(i) + 1.0) / n;
      const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
      const double t = golden * static_cast<double>(i);
      out.push_back({r * std::cos(t), r * std::sin(t), z});
    }
  } else {
    if (ambient_dim > std::size(kPrimes))
      throw std::invalid_argument("candidate poles support ambient dimension <= 16");
    for (std::size_t i = 1; out.size() < count; ++i) {
      std::vector<double> v(ambient_dim);
      for (std::size_t d = 0; d < ambient_dim; ++d)
        v[d] = std::numbers::sqrt2 * boost::math::erf_inv(2.0 * radical_inverse(i, kPrimes[d]) - 1.0);
      const double len = norm(v);
      if (!(len > 1e-12) || !std::isfinite(len)) continue;
      for (auto& x : v) x /= len;
      out.push_back(std::move(v));
    }
  }
  return out;
}

PoleChoice choose_poles(const BoundaryData& boundary, std::size_t candidates) {
  const std::size_t m = boundary.components;
  const std::size_t count = boundary.grid ? boundary.grid->boundary_nodes().size() : 0;
  if (count == 0) throw std::invalid_argument("choose_poles needs boundary samples");
  for (std::size_t s = 0; s < count; ++s) require_unit(boundary.at_slot(s), 1e-12, "boundary point");

  double best = -1.0;
  std::vector<double> best_pole;
  for (const auto& P : candidate_poles(m, candidates)) {
    double margin = std::numeric_limits<double>::infinity();
    for (std::size_t s = 0; s < count && margin > best; ++s) {
      const auto q = boundary.at_slot(s);
      double dp = 0.0, dm = 0.0;
      for (std::size_t i = 0; i < m; ++i) {
        dp += (P[i] - q[i]) * (P[i] - q[i]);
        dm += (P[i] + q[i]) * (P[i] + q[i]);
      }
      margin = std::min(margin, std::sqrt(std::min(dp, dm)));
    }
    if (margin > best) {
      best = margin;
      best_pole = P;
    }
  }
  if (best < 1e-3)
    throw std::runtime_error("no pole pair avoids the boundary data (best margin " +
                             std::to_string(best) + ")");
  return PoleChoice{ChartPole(best_pole), best};
}

SphereMapResult solve_in_chart(const BoundaryData& boundary, const ChartPole& pole,
                               const SolveOptions& opts) {
  const std::size_t m = boundary.components;
  if (m != pole.pole().size())
    throw std::invalid_argument("boundary data and pole live on different spheres");
  const GridPtr& grid = boundary.grid;
  const std::size_t N = m - 1;
  const std::size_t nb = grid->boundary_nodes().size();

  BoundaryData chart{grid, N, std::vector<double>(nb * N)};
  std::vector<double> bound(N, 0.0);
  for (std::size_t s = 0; s < nb; ++s) {
    const auto p = boundary.at_slot(s);
    require_unit(p, 1e-12, "boundary point");
    const auto Y = stereo_project(pole, p);
    for (std::size_t a = 0; a < N; ++a) {
      chart.values[s * N + a] = Y[a];
      bound[a] = std::max(bound[a], std::abs(Y[a]));
    }
  }
  for (auto& c : bound) c += 0.5;

  const Weight w = make_weight(WeightSpec::sphere_chart(2.0));
  const auto adm = AdmissibleSet::from_boundary(chart, bound);
  SolveResult solved = minimize(w, adm, nullptr, opts);

  Field V(grid, m);
  for (std::size_t p = 0; p < grid->node_count(); ++p) {
    if (grid->node_class(p) != NodeClass::interior) continue;
    const auto v = stereo_inverse(pole, solved.solution.at(p));
    std::copy(v.begin(), v.end(), V.at(p).begin());
  }
  const auto& bn = grid->boundary_nodes();
  for (std::size_t s = 0; s < nb; ++s) {
    const auto p = boundary.at_slot(s);
    std::copy(p.begin(), p.end(), V.at(bn[s]).begin());
  }

  const double E = solved.report.energy_history.back();
  const double D = dirichlet_energy(V);
  const double res = grid->interior_nodes().empty() ? 0.0 : harmonic_residual(V);
  return SphereMapResult{std::move(solved.solution), std::move(V), E, D, res, pole.pole(),
                         std::move(bound), std::move(solved.report)};
}

namespace {

HarmonicPair solve_pair(const BoundaryData& boundary, const ChartPole& pole, double margin,
                        const SolveOptions& opts) {
  SphereMapResult first = solve_in_chart(boundary, pole, opts);
  SphereMapResult second = solve_in_chart(boundary, pole.antipode(), opts);
  const double d = sup_distance(first.map, second.map);
  HarmonicPair pair{std::move(first), std::move(second), margin, d, {}};
  const std::size_t n = boundary.grid->dim(), N = boundary.components - 1;
  if (n > N)
    pair.warnings.push_back("domain dimension " + std::to_string(n) +
                            " exceeds sphere dimension " + std::to_string(N) +
                            "; a valid pole pair is not guaranteed");
  return pair;
}

}  // namespace

HarmonicPair solve_harmonic_pair(const BoundaryData& boundary, const SolveOptions& opts,
                                 std::size_t candidates) {
  const PoleChoice choice = choose_poles(boundary, candidates);
  return solve_pair(boundary, choice.pole, choice.margin, opts);
}

HarmonicPair solve_harmonic_pair(const BoundaryData& boundary, const ChartPole& pole,
                                 const SolveOptions& opts) {
  return solve_pair(boundary, pole, 0.0, opts);
}

double harmonic_residual(const Field& V) {
  const Grid& g = V.grid();
  const std::size_t m = V.components();
  for (std::size_t p = 0; p < g.node_count(); ++p)
    if (g.in_domain(p)) require_unit(V.at(p), 1e-10, "map value");

  std::vector<double> lap(m), dv(m);
  double worst = 0.0;
  for (std::size_t p : g.interior_nodes()) {
    std::fill(lap.begin(), lap.end(), 0.0);
    double grad2 = 0.0;
    for (std::size_t ax = 0; ax < g.dim(); ++ax) {
      const double h = g.spacing()[ax];
      const auto up = V.at(p + g.stride(ax)), dn = V.at(p - g.stride(ax)), c = V.at(p);
      for (std::size_t i = 0; i < m; ++i) {
        lap[i] += (up[i] - 2.0 * c[i] + dn[i]) / (h * h);
        dv[i] = (up[i] - dn[i]) / (2.0 * h);
      }
      grad2 += dot(dv, dv);
    }
    double r = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      const double e = lap[i] + grad2 * V(p, i);
      r += e * e;
    }
    worst = std::max(worst, std::sqrt(r));
  }
  return worst;
}

double dirichlet_energy(const Field& V) {
  return energy(V, make_weight(WeightSpec::constant(0.0))).value;
}

double sup_distance(const Field& a, const Field& b) {
  const Grid& g = a.grid();
  if (a.components() != b.components() || g.node_count() != b.grid().node_count())
    throw std::invalid_argument("fields are not comparable");
  double d = 0.0;
  for (std::size_t p = 0; p < g.node_count(); ++p)
    if (g.in_domain(p)) d = std::max(d, distance(a.at(p), b.at(p)));
  return d;
}

}  // namespace qlsys
