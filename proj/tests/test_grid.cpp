#include "doctest.h"

#include <cmath>
#include <stdexcept>

#include "qlsys/grid.hpp"

using namespace qlsys;

namespace {

GridPtr unit_box(std::vector<std::size_t> res) {
  std::vector<Interval> ext(res.size(), Interval{0.0, 1.0});
  return build_grid(DomainSpec::box(ext), res);
}

std::size_t count(const Grid& g, NodeClass c) {
  std::size_t n = 0;
  for (std::size_t p = 0; p < g.node_count(); ++p) n += g.node_class(p) == c;
  return n;
}

}  // namespace

TEST_CASE("box node counts") {
  auto g = unit_box({5, 5});
  CHECK(g->interior_nodes().size() == 9);
  CHECK(g->boundary_nodes().size() == 16);
  CHECK(count(*g, NodeClass::exterior) == 0);

  auto g1 = unit_box({3});
  CHECK(g1->interior_nodes().size() == 1);
  CHECK(g1->boundary_nodes().size() == 2);
}

TEST_CASE("row-major numbering, last axis fastest") {
  auto g = build_grid(DomainSpec::box({{0, 2}, {0, 1}}), std::vector<std::size_t>{5, 3});
  CHECK(g->stride(1) == 1);
  CHECK(g->stride(0) == 3);
  const std::size_t idx[] = {3, 1};
  const std::size_t p = g->linear_index(idx);
  CHECK(p == 10);
  CHECK(g->multi_index(p) == std::vector<std::size_t>{3, 1});
  const auto x = g->coords(p);
  CHECK(x[0] == doctest::Approx(1.5));
  CHECK(x[1] == doctest::Approx(0.5));
  CHECK(g->neighbor(p, 0, +1) == p + 3);
  CHECK(g->neighbor(g->linear_index(std::vector<std::size_t>{4, 2}), 0, +1) == Grid::npos);
}

TEST_CASE("half ball with h = 0.5 has a single interior node") {
  const auto domain = DomainSpec::half_ball(2, 1.0);
  auto g = build_grid(domain, resolution_for_spacing(domain, 0.5));
  REQUIRE(g->interior_nodes().size() == 1);
  const auto x = g->coords(g->interior_nodes()[0]);
  CHECK(x[0] == doctest::Approx(0.0));
  CHECK(x[1] == doctest::Approx(0.5));
  // (1, 0.5) lies outside the unit disk.
  const auto far = g->linear_index(std::vector<std::size_t>{4, 1});
  CHECK(g->node_class(far) == NodeClass::exterior);
}

TEST_CASE("classes partition the lattice and interior nodes see only in-domain neighbours") {
  auto disk = DomainSpec::masked_box({{-1, 1}, {-1, 1}}, [](std::span<const double> x) {
    return x[0] * x[0] + x[1] * x[1] <= 1.0;
  });
  auto g = build_grid(disk, std::vector<std::size_t>{21, 21});
  CHECK(g->interior_nodes().size() + g->boundary_nodes().size() + count(*g, NodeClass::exterior) ==
        g->node_count());
  for (std::size_t p : g->interior_nodes())
    for (std::size_t ax = 0; ax < 2; ++ax)
      for (int dir : {-1, 1}) {
        const auto q = g->neighbor(p, ax, dir);
        REQUIRE(q != Grid::npos);
        CHECK(g->in_domain(q));
      }
  for (std::size_t p : g->boundary_nodes()) {
    bool touches = g->on_lattice_face(p);
    for (std::size_t ax = 0; ax < 2; ++ax)
      for (int dir : {-1, 1}) {
        const auto q = g->neighbor(p, ax, dir);
        touches = touches || q == Grid::npos || !g->in_domain(q);
      }
    CHECK(touches);
  }

  auto again = build_grid(disk, std::vector<std::size_t>{21, 21});
  CHECK(again->classes() == g->classes());
}

TEST_CASE("cells are full lattice squares inside the domain") {
  auto g = unit_box({4, 4});
  CHECK(g->cells().size() == 9);
  CHECK(g->corners_per_cell() == 4);
  CHECK(g->cell_volume() == doctest::Approx(1.0 / 9.0));
}

TEST_CASE("build_grid rejects bad input") {
  CHECK_THROWS_AS(unit_box({2, 5}), std::invalid_argument);
  CHECK_THROWS_AS(build_grid(DomainSpec::box({{1, 1}}), std::vector<std::size_t>{5}),
                  std::invalid_argument);
  auto nothing = DomainSpec::masked_box({{0, 1}}, [](std::span<const double>) { return false; });
  CHECK_THROWS(build_grid(nothing, std::vector<std::size_t>{5}));
}

TEST_CASE("sample_boundary") {
  auto g = unit_box({7, 7});
  auto c = sample_boundary(g, [](std::span<const double>) { return std::vector<double>{1.0, 0.0}; });
  CHECK(c.components == 2);
  for (std::size_t s = 0; s < g->boundary_nodes().size(); ++s) {
    CHECK(c.at_slot(s)[0] == 1.0);
    CHECK(c.at_slot(s)[1] == 0.0);
  }

  auto g1 = unit_box({3});
  auto lin = sample_boundary(g1, [](std::span<const double> x) { return std::vector<double>{x[0]}; });
  CHECK(lin.values == std::vector<double>{0.0, 1.0});

  auto circle = sample_boundary(g, [](std::span<const double> x) {
    const double t = std::atan2(x[1] - 0.5, x[0] - 0.5);
    return std::vector<double>{std::cos(t), std::sin(t)};
  });
  for (std::size_t s = 0; s < g->boundary_nodes().size(); ++s) {
    const auto v = circle.at_slot(s);
    CHECK(std::hypot(v[0], v[1]) == doctest::Approx(1.0).epsilon(1e-15));
  }

  CHECK_THROWS_AS(sample_boundary(g1, [](std::span<const double> x) {
                    return std::vector<double>{1.0 / (x[0] - x[0])};
                  }),
                  std::domain_error);
}

TEST_CASE("restrict_field") {
  auto g = unit_box({5});
  auto u = sample_field(g, [](std::span<const double> x) { return std::vector<double>{x[0]}; });
  const Interval half[] = {{0.0, 0.5}};
  auto r = restrict_field(u, half);
  CHECK(r.values() == std::vector<double>{0.0, 0.25, 0.5});
  CHECK(r.grid().node_class(0) == NodeClass::boundary);
  CHECK(r.grid().node_class(1) == NodeClass::interior);
  CHECK(r.grid().node_class(2) == NodeClass::boundary);

  const Interval full[] = {{0.0, 1.0}};
  CHECK(restrict_field(u, full).values() == u.values());

  const Interval off[] = {{0.1, 0.5}};
  CHECK_THROWS_AS(restrict_field(u, off), std::invalid_argument);
}

TEST_CASE("restrict of a constant is constant, and nested restrictions compose") {
  auto g = unit_box({9, 9});
  auto c = sample_field(g, [](std::span<const double>) { return std::vector<double>{0.3}; });
  const Interval w[] = {{0.25, 0.75}, {0.0, 0.5}};
  const auto rc = restrict_field(c, w);
  for (double v : rc.values()) CHECK(v == 0.3);

  auto u = sample_field(g, [](std::span<const double> x) { return std::vector<double>{x[0] - 2 * x[1]}; });
  const Interval outer[] = {{0.125, 1.0}, {0.0, 0.75}};
  const Interval inner[] = {{0.25, 0.625}, {0.125, 0.5}};
  auto twice = restrict_field(restrict_field(u, outer), inner);
  auto once = restrict_field(u, inner);
  CHECK(twice.values() == once.values());
  CHECK(twice.grid().classes() == once.grid().classes());
  CHECK(twice.grid().dims() == once.grid().dims());
}
