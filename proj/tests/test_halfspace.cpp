#include "doctest.h"

#include <cmath>
#include <stdexcept>

#include "qlsys/halfspace.hpp"

using namespace qlsys;

TEST_CASE("constant data give constant solutions at every radius") {
  const auto phi = [](std::span<const double>) { return std::vector<double>{0.7}; };
  const auto rep = solve_exhaustion(phi, 2, make_weight(WeightSpec::gaussian(1.0)), {1.0, 2.0}, 0.25,
                                    {{0.0, 0.5}, {0.0, 0.5}});
  REQUIRE(rep.per_radius.size() == 2);
  CHECK(rep.uniform_bound);
  CHECK(rep.bound == std::vector<double>{0.7});
  CHECK_FALSE(rep.per_radius[0].window_difference.has_value());
  CHECK(*rep.per_radius[1].window_difference == 0.0);
  for (const auto& r : rep.per_radius) {
    CHECK(r.energy == 0.0);
    CHECK(r.sup_norm == 0.7);
  }
  REQUIRE(rep.window_limit.has_value());
  for (double v : rep.window_limit->values()) CHECK(v == 0.7);
}

TEST_CASE("gaussian bump exhaustion") {
  const auto phi = [](std::span<const double> x) {
    return std::vector<double>{std::exp(-(x[0] * x[0] + x[1] * x[1]))};
  };
  const auto rep = solve_exhaustion(phi, 2, make_weight(WeightSpec::gaussian(1.0)), {2.0, 4.0}, 0.25,
                                    {{0.0, 1.0}, {0.0, 1.0}});
  CHECK(rep.uniform_bound);
  CHECK(rep.bound[0] == 1.0);
  for (const auto& r : rep.per_radius) {
    CHECK(r.solve.converged);
    CHECK(r.sup_norm <= 1.0);
    CHECK(r.energy <= r.competitor_energy);
    CHECK(r.window_energy <= r.energy);
    CHECK(r.window_energy <= r.competitor_energy);
  }
  REQUIRE(rep.per_radius[1].window_difference.has_value());
  CHECK(*rep.per_radius[1].window_difference < 1.0);
  CHECK(rep.per_radius[0].interior_nodes < rep.per_radius[1].interior_nodes);
  REQUIRE(rep.window_limit.has_value());
  CHECK(rep.window_limit->grid().dims() == std::vector<std::size_t>{5, 5});
}

TEST_CASE("window and radius validation") {
  const auto phi = [](std::span<const double>) { return std::vector<double>{1.0}; };
  const auto w = make_weight(WeightSpec::gaussian(1.0));
  CHECK_THROWS_AS(solve_exhaustion(phi, 2, w, {2.0, 4.0}, 0.25, {{0.0, 2.0}, {0.0, 2.0}}), std::invalid_argument);
  CHECK_THROWS_AS(solve_exhaustion(phi, 2, w, {2.0, 4.0}, 0.25, {{0.0, 1.0}, {-0.5, 1.0}}), std::invalid_argument);
  CHECK_THROWS_AS(solve_exhaustion(phi, 2, w, {2.0, 4.0}, 0.25, {{0.0, 1.0}}), std::invalid_argument);
  CHECK_THROWS_AS(solve_exhaustion(phi, 2, w, {2.0, 4.0}, 0.25, {{0.1, 1.0}, {0.0, 1.0}}), std::invalid_argument);
  CHECK_THROWS_AS(solve_exhaustion(phi, 2, w, {4.0, 2.0}, 0.25, {{0.0, 1.0}, {0.0, 1.0}}), std::invalid_argument);
  CHECK_THROWS_AS(solve_exhaustion(phi, 2, w, {}, 0.25, {{0.0, 1.0}, {0.0, 1.0}}), std::invalid_argument);
}
