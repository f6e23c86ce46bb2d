#include "doctest.h"

#include <cmath>
#include <stdexcept>

#include "qlsys/optimizer.hpp"
#include "qlsys/poisson.hpp"

using namespace qlsys;

namespace {

GridPtr box(std::size_t n, std::size_t dim = 2) {
  return build_grid(DomainSpec::box(std::vector<Interval>(dim, Interval{0.0, 1.0})),
                    std::vector<std::size_t>(dim, n));
}

double sup_diff(const Field& a, const Field& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.values().size(); ++i) m = std::max(m, std::abs(a.values()[i] - b.values()[i]));
  return m;
}

double sup_norm(const Field& a) {
  double m = 0.0;
  for (double v : a.values()) m = std::max(m, std::abs(v));
  return m;
}

// 1D exact solution for f = -u^2, phi(0) = 0, phi(1) = 1, by bisection on an erf-based W.
double transform_solution(double x) {
  auto W = [](double u) { return std::sqrt(std::acos(-1.0) / 2) * std::erf(u / std::sqrt(2.0)); };
  const double target = x * W(1.0);
  double lo = -1.0, hi = 2.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (W(mid) < target ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

void check_feasible(const Field& U, const AdmissibleSet& adm) {
  CHECK(is_admissible(U, adm));
  const Grid& g = U.grid();
  for (std::size_t s = 0; s < g.boundary_nodes().size(); ++s)
    for (std::size_t a = 0; a < U.components(); ++a)
      CHECK(U(g.boundary_nodes()[s], a) == adm.boundary.at_slot(s)[a]);
  double cmax = 0.0;
  for (double c : adm.bound) cmax = std::max(cmax, c);
  CHECK(sup_norm(U) <= cmax);
}

}  // namespace

TEST_CASE("project_admissible examples") {
  auto g = box(3);
  const auto phi = sample_boundary(g, [](std::span<const double>) { return std::vector<double>{0.3, -0.3}; });
  const auto adm = AdmissibleSet::from_boundary(phi, std::vector<double>{1.0, 1.0});

  Field U = field_from_boundary(phi);
  const std::size_t mid = g->interior_nodes()[0];
  U(mid, 0) = 5.0;
  U(mid, 1) = -5.0;
  U(g->boundary_nodes()[0], 0) = 7.0;
  const Field P = project_admissible(U, adm);
  CHECK(P(mid, 0) == 1.0);
  CHECK(P(mid, 1) == -1.0);
  CHECK(P(g->boundary_nodes()[0], 0) == 0.3);
  CHECK(is_admissible(P, adm));
  CHECK(project_admissible(P, adm).values() == P.values());
}

TEST_CASE("admissible set validation and default bound") {
  auto g = box(5);
  const auto phi = sample_boundary(g, [](std::span<const double> x) { return std::vector<double>{2 * x[0] - 1, 0.0}; });
  const auto adm = AdmissibleSet::from_boundary(phi);
  CHECK(adm.bound == std::vector<double>{1.0, 1.0});
  CHECK_THROWS_AS(AdmissibleSet::from_boundary(phi, std::vector<double>{0.5, 1.0}), std::invalid_argument);
}

TEST_CASE("constant boundary converges immediately") {
  auto g = box(17);
  const auto phi = sample_boundary(g, [](std::span<const double>) { return std::vector<double>{0.4, -0.2}; });
  const auto adm = AdmissibleSet::from_boundary(phi);
  SolveOptions opts;
  opts.init = InitKind::boundary_constant;
  const auto r = minimize(make_weight(WeightSpec::gaussian(1.0)), adm, nullptr, opts);
  CHECK(r.report.converged);
  CHECK(r.report.iterations <= 2);
  CHECK(r.report.energy_history.back() == 0.0);
  for (std::size_t p : g->interior_nodes()) {
    CHECK(r.solution(p, 0) == 0.4);
    CHECK(r.solution(p, 1) == -0.2);
  }
  CHECK(kkt_residual(r.solution, make_weight(WeightSpec::gaussian(1.0)), adm) == 0.0);
}

TEST_CASE("flat weight reproduces the discrete harmonic extension") {
  auto g = box(33);
  const auto phi = sample_boundary(g, [](std::span<const double> x) {
    return std::vector<double>{std::sin(3 * x[0]) * std::cosh(x[1]) * 0.5, x[0] * x[0] - x[1] * x[1]};
  });
  const auto adm = AdmissibleSet::from_boundary(phi, std::vector<double>{2.0, 2.0});
  SolveOptions opts;
  opts.init = InitKind::boundary_constant;
  opts.tol_pg = 1e-9;
  const auto r = minimize(make_weight(WeightSpec::constant(0.3)), adm, nullptr, opts);
  CHECK(r.report.converged);
  CHECK(r.report.iterations > 10);
  CHECK(sup_diff(r.solution, harmonic_extension(phi)) <= 1e-6);
  check_feasible(r.solution, adm);
}

TEST_CASE("1D gaussian minimizer matches the transform solution") {
  auto g = box(257, 1);
  const auto phi = sample_boundary(g, [](std::span<const double> x) { return std::vector<double>{x[0]}; });
  const auto adm = AdmissibleSet::from_boundary(phi);
  const auto r = minimize(make_weight(WeightSpec::gaussian(1.0)), adm, nullptr);
  REQUIRE(r.report.converged);
  double worst = 0.0;
  for (std::size_t p = 0; p < g->node_count(); ++p)
    worst = std::max(worst, std::abs(r.solution(p, 0) - transform_solution(g->coords(p)[0])));
  CHECK(worst <= 1e-4);
  check_feasible(r.solution, adm);
}

TEST_CASE("report invariants, KKT residual and determinism") {
  auto g = box(17);
  const auto phi = sample_boundary(g, [](std::span<const double> x) {
    return std::vector<double>{std::cos(6 * x[0]) * x[1], std::sin(5 * x[1] + x[0])};
  });
  const auto adm = AdmissibleSet::from_boundary(phi);
  const auto w = make_weight(WeightSpec::sphere_chart(2.0));
  const auto r = minimize(w, adm, nullptr);
  REQUIRE(r.report.converged);
  CHECK(r.report.energy_history.size() == r.report.iterations + 1);
  CHECK(r.report.pg_history.size() == r.report.iterations + 1);
  for (std::size_t k = 1; k < r.report.energy_history.size(); ++k)
    CHECK(r.report.energy_history[k] <= r.report.energy_history[k - 1]);
  check_feasible(r.solution, adm);
  CHECK(kkt_residual(r.solution, w, adm) <= r.report.tol_pg);

  Field bumped = r.solution;
  const std::size_t p = g->linear_index(std::vector<std::size_t>{8, 8});
  bumped(p, 0) += 0.1;
  REQUIRE(is_admissible(bumped, adm));
  CHECK(kkt_residual(bumped, w, adm) > 0.0);
  CHECK(kkt_residual(bumped, w, adm) > r.report.tol_pg);

  const auto again = minimize(w, adm, nullptr);
  CHECK(again.solution.values() == r.solution.values());
  CHECK(again.report.energy_history == r.report.energy_history);
}

TEST_CASE("first projected step from a non-stationary point decreases the energy") {
  auto g = box(9);
  const auto phi = sample_boundary(g, [](std::span<const double> x) { return std::vector<double>{x[0] * x[1]}; });
  const auto adm = AdmissibleSet::from_boundary(phi);
  SolveOptions opts;
  opts.max_iters = 1;
  opts.init = InitKind::boundary_constant;
  const auto r = minimize(make_weight(WeightSpec::gaussian(1.0)), adm, nullptr, opts);
  REQUIRE(r.report.energy_history.size() == 2);
  CHECK(r.report.energy_history[1] < r.report.energy_history[0]);
  CHECK_FALSE(r.report.converged);
}

TEST_CASE("tight box stays feasible with active constraints") {
  auto g = box(17);
  const auto phi = sample_boundary(g, [](std::span<const double> x) {
    return std::vector<double>{x[0] < 0.5 ? 1.0 : -1.0};
  });
  const auto adm = AdmissibleSet::from_boundary(phi, std::vector<double>{1.0});
  SolveOptions opts;
  opts.init = InitKind::given;
  Field start(g, 1);
  for (double& v : start.values()) v = 1.0;
  opts.initial = project_admissible(start, adm);
  const auto r = minimize(make_weight(WeightSpec::gaussian(0.5)), adm, nullptr, opts);
  CHECK(r.report.converged);
  check_feasible(r.solution, adm);
}

TEST_CASE("shifting the weight leaves the minimizer and scales the energy") {
  auto g = box(33);
  const auto phi = sample_boundary(g, [](std::span<const double> x) { return std::vector<double>{x[0] * x[1]}; });
  const auto adm = AdmissibleSet::from_boundary(phi);
  const auto w = make_weight(WeightSpec::gaussian(1.0));
  const auto a = minimize(w, adm, nullptr);
  const auto b = minimize(w.shifted(1.0), adm, nullptr);
  CHECK(sup_diff(a.solution, b.solution) <= 1e-6);
  const double ea = energy(a.solution, w).value, eb = energy(b.solution, w.shifted(1.0)).value;
  CHECK(std::abs(energy(a.solution, w.shifted(1.0)).value / ea - std::exp(1.0)) <= 1e-10 * std::exp(1.0));
  CHECK(eb / ea == doctest::Approx(std::exp(1.0)).epsilon(1e-6));
}

TEST_CASE("identity tensor path is bit-identical to the isotropic path") {
  auto g = box(17);
  const auto phi = sample_boundary(g, [](std::span<const double> x) {
    return std::vector<double>{x[0] * x[1], std::sin(x[0] + 2 * x[1])};
  });
  const auto adm = AdmissibleSet::from_boundary(phi);
  const auto w = make_weight(WeightSpec::gaussian(1.0));
  const auto id = CoefficientTensor::identity(2, 2);
  const auto a = minimize(w, adm, nullptr);
  const auto b = minimize(w, adm, &id);
  CHECK(a.solution.values() == b.solution.values());
}
