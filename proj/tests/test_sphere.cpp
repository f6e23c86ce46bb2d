#include "doctest.h"

#include <cmath>
#include <stdexcept>

#include "qlsys/energy.hpp"
#include "qlsys/sphere.hpp"

using namespace qlsys;

namespace {

const double pi = std::acos(-1.0);

double norm(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

GridPtr line(std::size_t n) { return build_grid(DomainSpec::box({{0.0, 1.0}}), std::vector<std::size_t>{n}); }

GridPtr disk(std::size_t n) {
  return build_grid(DomainSpec::masked_box({{-1, 1}, {-1, 1}}, [](std::span<const double> x) {
                      return x[0] * x[0] + x[1] * x[1] <= 1.0;
                    }),
                    std::vector<std::size_t>{n, n});
}

BoundaryData quarter_arc(std::size_t n) {
  return sample_boundary(line(n), [](std::span<const double> x) {
    return std::vector<double>{1.0 - x[0], x[0], 0.0};
  });
}

Field geodesic(std::size_t n, double length) {
  return sample_field(line(n), [length](std::span<const double> x) {
    return std::vector<double>{std::cos(length * x[0]), std::sin(length * x[0]), 0.0};
  });
}

}  // namespace

TEST_CASE("stereographic projection examples") {
  const ChartPole north({0.0, 0.0, 1.0});
  for (const auto& f : north.frame()) {
    CHECK(norm(f) == doctest::Approx(1.0).epsilon(1e-15));
    double d = 0.0;
    for (std::size_t i = 0; i < 3; ++i) d += f[i] * north.pole()[i];
    CHECK(std::abs(d) <= 1e-15);
  }
  const std::vector<double> south{0.0, 0.0, -1.0};
  for (double y : stereo_project(north, south)) CHECK(y == 0.0);

  const auto e = stereo_project(north, north.frame()[0]);
  CHECK(e[0] == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(std::abs(e[1]) <= 1e-15);

  const auto back = stereo_inverse(north, std::vector<double>{0.0, 0.0});
  CHECK(back == south);

  CHECK_THROWS_AS(stereo_project(north, north.pole()), std::domain_error);
  const double near[] = {1e-10, 0.0, std::sqrt(1.0 - 1e-20)};
  CHECK_THROWS_AS(stereo_project(north, near), std::domain_error);
}

TEST_CASE("stereographic round trip and far-field limit") {
  const ChartPole pole({0.3, -0.5, 0.2, 0.7});
  std::vector<double> p(4);
  double worst = 0.0;
  for (int k = 0; k < 200; ++k) {
    const double t = 0.1 * k;
    p = {std::cos(t) * std::sin(1.3 * t), std::sin(t) * std::sin(1.3 * t), std::cos(1.3 * t) * std::cos(0.2 * t),
         std::cos(1.3 * t) * std::sin(0.2 * t)};
    const double n = norm(p);
    for (double& x : p) x /= n;
    const auto q = stereo_inverse(pole, stereo_project(pole, p));
    for (std::size_t i = 0; i < 4; ++i) worst = std::max(worst, std::abs(q[i] - p[i]));
    CHECK(std::abs(norm(q) - 1.0) <= 1e-15);
  }
  CHECK(worst <= 1e-12);

  for (double r : {10.0, 100.0, 1e4}) {
    const auto q = stereo_inverse(pole, std::vector<double>{r, -r / 3, r / 7});
    std::vector<double> d(4);
    for (std::size_t i = 0; i < 4; ++i) d[i] = q[i] - pole.pole()[i];
    CHECK(norm(d) <= 2.0 / (r * std::sqrt(1.0 + 1.0 / 9 + 1.0 / 49)));
  }
}

TEST_CASE("pole selection") {
  auto g = disk(17);
  const auto e1 = sample_boundary(g, [](std::span<const double>) { return std::vector<double>{1.0, 0.0, 0.0}; });
  CHECK(choose_poles(e1).margin >= 1.0);

  const auto equator = sample_boundary(g, [](std::span<const double> x) {
    const double t = std::atan2(x[1], x[0]);
    return std::vector<double>{std::cos(t), std::sin(t), 0.0};
  });
  const auto choice = choose_poles(equator);
  CHECK(choice.margin >= 1.38);
  CHECK(choice.margin <= std::sqrt(2.0) + 1e-12);
  CHECK(std::abs(choice.pole.pole()[2]) >= 0.99);

  // 4096 boundary slots spread evenly over S^1: every pole pair is within 1e-3 of a sample.
  auto big = build_grid(DomainSpec::box({{0, 1}, {0, 1}}), std::vector<std::size_t>{1025, 1025});
  BoundaryData dense = sample_boundary(big, [](std::span<const double>) { return std::vector<double>{1.0, 0.0}; });
  const std::size_t m = big->boundary_nodes().size();
  REQUIRE(m == 4096);
  for (std::size_t s = 0; s < m; ++s) {
    dense.values[2 * s] = std::cos(2 * pi * s / m);
    dense.values[2 * s + 1] = std::sin(2 * pi * s / m);
  }
  CHECK_THROWS_AS(choose_poles(dense), std::runtime_error);

  CHECK_THROWS(choose_poles(e1, 8));
}

TEST_CASE("constant boundary data give two constant maps") {
  auto g = disk(17);
  const auto e1 = sample_boundary(g, [](std::span<const double>) { return std::vector<double>{1.0, 0.0, 0.0}; });
  const auto pair = solve_harmonic_pair(e1);
  for (const auto* r : {&pair.first, &pair.second}) {
    CHECK(r->dirichlet_energy == doctest::Approx(0.0));
    CHECK(r->dirichlet_energy <= 1e-20);
    for (std::size_t p = 0; p < g->node_count(); ++p)
      if (g->in_domain(p)) {
        CHECK(std::abs(r->map(p, 0) - 1.0) <= 1e-12);
        CHECK(std::abs(r->map(p, 1)) <= 1e-12);
      }
  }
  CHECK(pair.sup_distance <= 1e-12);
}

TEST_CASE("harmonic residual") {
  const Field c = sample_field(line(33), [](std::span<const double>) { return std::vector<double>{0.0, 1.0, 0.0}; });
  CHECK(harmonic_residual(c) == 0.0);

  double prev = 0.0;
  for (std::size_t n : {17u, 33u, 65u, 129u}) {
    const double r = harmonic_residual(geodesic(n, 2.0));
    if (prev > 0.0) {
      CHECK(prev / r >= 3.0);
      CHECK(prev / r <= 5.0);
    }
    prev = r;
  }

  Field bump = sample_field(disk(17), [](std::span<const double>) { return std::vector<double>{0.0, 0.0, 1.0}; });
  const std::size_t p = bump.grid().interior_nodes()[40];
  bump(p, 0) = 0.1;
  bump(p, 2) = std::sqrt(1.0 - 0.01);
  CHECK(harmonic_residual(bump) > 0.1);

  Field off = geodesic(17, 1.0);
  off(3, 0) *= 1.001;
  CHECK_THROWS(harmonic_residual(off));
}

TEST_CASE("pair for a quarter arc with a pole on the short arc") {
  const auto phi = quarter_arc(201);
  const double s = 1.0 / std::sqrt(2.0);
  const auto pair = solve_harmonic_pair(phi, ChartPole({s, s, 0.0}));
  REQUIRE(pair.first.report.converged);
  REQUIRE(pair.second.report.converged);
  const double shorter = std::min(pair.first.dirichlet_energy, pair.second.dirichlet_energy);
  const double longer = std::max(pair.first.dirichlet_energy, pair.second.dirichlet_energy);
  CHECK(std::abs(shorter / (pi * pi / 4) - 1.0) <= 0.02);
  CHECK(std::abs(longer / (9 * pi * pi / 4) - 1.0) <= 0.02);
  CHECK(pair.sup_distance >= 1.0);
}

TEST_CASE("chart consistency, unit norm and the conformal energy identity") {
  std::vector<double> gaps;
  for (std::size_t n : {26u, 51u, 101u}) {
    const auto phi = quarter_arc(n);
    const ChartPole pole({0.0, 0.0, 1.0});
    const auto r = solve_in_chart(phi, pole);
    REQUIRE(r.report.converged);
    const Grid& g = r.map.grid();
    double worst = 0.0;
    for (std::size_t p = 0; p < g.node_count(); ++p) {
      CHECK(std::abs(norm(r.map.at(p)) - 1.0) <= 1e-12);
      const auto y = stereo_project(pole, r.map.at(p));
      for (std::size_t k = 0; k < 2; ++k) worst = std::max(worst, std::abs(y[k] - r.chart_solution(p, k)));
    }
    CHECK(worst <= 1e-12);
    CHECK(r.chart_energy == doctest::Approx(energy(r.chart_solution, make_weight(WeightSpec::sphere_chart(2.0))).value));
    gaps.push_back(std::abs(r.chart_energy - r.dirichlet_energy));
  }
  CHECK(gaps[1] < gaps[0]);
  CHECK(gaps[2] < gaps[1]);
}

TEST_CASE("negating the data and the pole negates both maps") {
  const auto phi = quarter_arc(51);
  BoundaryData neg = phi;
  for (double& v : neg.values) v = -v;
  const std::vector<double> P{0.6, 0.8, 0.0};
  const auto a = solve_harmonic_pair(phi, ChartPole(P));
  const auto b = solve_harmonic_pair(neg, ChartPole({-0.6, -0.8, 0.0}));
  double worst = 0.0;
  for (std::size_t i = 0; i < a.first.map.values().size(); ++i) {
    worst = std::max(worst, std::abs(a.first.map.values()[i] + b.first.map.values()[i]));
    worst = std::max(worst, std::abs(a.second.map.values()[i] + b.second.map.values()[i]));
  }
  CHECK(worst <= 1e-10);
  CHECK(a.first.dirichlet_energy == doctest::Approx(b.first.dirichlet_energy).epsilon(1e-10));
}

TEST_CASE("latitude circle on a disk gives two distinct maps") {
  auto g = disk(33);
  const auto phi = sample_boundary(g, [](std::span<const double> x) {
    const double t = std::atan2(x[1], x[0]);
    return std::vector<double>{0.8 * std::cos(t), 0.8 * std::sin(t), 0.6};
  });
  const auto pair = solve_harmonic_pair(phi);
  CHECK(pair.warnings.empty());
  CHECK(pair.sup_distance >= 0.5);
  CHECK(std::abs(pair.first.dirichlet_energy - pair.second.dirichlet_energy) > 1.0);
  for (const auto* r : {&pair.first, &pair.second})
    for (std::size_t p = 0; p < g->node_count(); ++p)
      if (g->in_domain(p)) CHECK(std::abs(norm(r->map.at(p)) - 1.0) <= 1e-12);
}

TEST_CASE("dimension hypothesis violation is a warning") {
  auto g = disk(9);
  const auto phi = sample_boundary(g, [](std::span<const double> x) {
    const double t = std::atan2(x[1], x[0]);
    return std::vector<double>{std::cos(0.5 * t), std::sin(0.5 * t)};
  });
  const auto pair = solve_harmonic_pair(phi);
  CHECK_FALSE(pair.warnings.empty());
}
