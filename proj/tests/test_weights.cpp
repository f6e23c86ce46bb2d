#include "doctest.h"

#include <cmath>
#include <random>
#include <stdexcept>

#include "qlsys/weights.hpp"

using namespace qlsys;

TEST_CASE("gaussian(1) at (1, 0)") {
  const auto w = make_weight(WeightSpec::gaussian(1.0));
  const double U[] = {1.0, 0.0};
  const auto e = w.eval(U);
  CHECK(e.f == -1.0);
  CHECK(e.g == 2.0);
  CHECK(e.fprime[0] == -2.0);
  CHECK(e.fprime[1] == 0.0);
}

TEST_CASE("sphere_chart(2) at (1, 0)") {
  const auto w = make_weight(WeightSpec::sphere_chart(2.0));
  const double U[] = {1.0, 0.0};
  const auto e = w.eval(U);
  CHECK(e.f == 0.0);
  CHECK(e.g == 2.0);
  CHECK(e.fprime[0] == -2.0);
  CHECK(e.fprime[1] == 0.0);
}

TEST_CASE("constant(0) is flat") {
  const auto w = make_weight(WeightSpec::constant(0.0));
  const double U[] = {0.3, -4.0, 2.0};
  const auto e = w.eval(U);
  CHECK(e.f == 0.0);
  for (double d : e.fprime) CHECK(d == 0.0);
}

TEST_CASE("f' vanishes at the origin") {
  const double zero[] = {0.0, 0.0};
  for (const auto& spec : {WeightSpec::gaussian(0.7), WeightSpec::sphere_chart(3.0), WeightSpec::constant(2.0)})
    for (double d : make_weight(spec).eval(zero).fprime) CHECK(d == 0.0);
}

TEST_CASE("closed-form gradients at random points") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> dist(-5.0, 5.0);
  const auto gauss = make_weight(WeightSpec::gaussian(1.5));
  const auto chart = make_weight(WeightSpec::sphere_chart(2.0));
  double worst = 0.0;
  double U[2], fp[2], f, g;
  for (int i = 0; i < 500000; ++i) {
    U[0] = dist(rng);
    U[1] = dist(rng);
    gauss.eval_into(U, f, fp, g);
    for (int a = 0; a < 2; ++a) {
      const double want = -2.0 * 1.5 * U[a];
      worst = std::max(worst, std::abs(fp[a] - want) / std::max(std::abs(want), 1e-300));
    }
    chart.eval_into(U, f, fp, g);
    const double r2 = U[0] * U[0] + U[1] * U[1];
    for (int a = 0; a < 2; ++a) {
      const double want = -4.0 * U[a] / (1.0 + r2);
      worst = std::max(worst, std::abs(fp[a] - want) / std::max(std::abs(want), 1e-300));
    }
  }
  CHECK(worst <= 1e-12);
}

TEST_CASE("f' matches a central difference of f") {
  const double h = 1e-6;
  for (const auto& spec : {WeightSpec::gaussian(0.5), WeightSpec::sphere_chart(2.0), WeightSpec::sphere_chart(0.3)}) {
    const auto w = make_weight(spec);
    double U[] = {0.4, -1.3, 0.8};
    const auto e = w.eval(U);
    for (int a = 0; a < 3; ++a) {
      double up[] = {U[0], U[1], U[2]}, dn[] = {U[0], U[1], U[2]};
      up[a] += h;
      dn[a] -= h;
      CHECK(e.fprime[a] == doctest::Approx((w.f(up) - w.f(dn)) / (2 * h)).epsilon(1e-8));
    }
  }
}

TEST_CASE("structural identity f' + U g = 0") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> dist(0.0, 3.0);
  for (const auto& spec : {WeightSpec::gaussian(2.0), WeightSpec::sphere_chart(2.0), WeightSpec::constant(-1.0)}) {
    const auto w = make_weight(spec);
    for (int i = 0; i < 1000; ++i) {
      const double U[] = {dist(rng), dist(rng), dist(rng)};
      const auto e = w.eval(U);
      for (int a = 0; a < 3; ++a) CHECK(e.fprime[a] + U[a] * e.g == 0.0);
    }
  }
}

TEST_CASE("shift moves f only") {
  const auto w = make_weight(WeightSpec::sphere_chart(2.0));
  const auto s = w.shifted(0.75);
  const double U[] = {0.2, 1.1};
  const auto a = w.eval(U), b = s.eval(U);
  CHECK(b.f - a.f == doctest::Approx(0.75).epsilon(1e-15));
  CHECK(b.g == a.g);
  CHECK(b.fprime == a.fprime);
  CHECK(s.shifted(-0.75).f(U) == doctest::Approx(a.f).epsilon(1e-15));
}

TEST_CASE("validate_weight") {
  const double C[] = {1.0, 1.0};
  auto gauss = validate_weight(make_weight(WeightSpec::gaussian(1.0)), C, 11);
  CHECK(gauss.min_g == 2.0);
  CHECK(gauss.ok);

  auto flat = validate_weight(make_weight(WeightSpec::constant(0.0)), C, 11);
  CHECK(flat.min_g == 0.0);
  CHECK_FALSE(flat.ok);

  auto chart = validate_weight(make_weight(WeightSpec::sphere_chart(2.0)), C, 101);
  CHECK(chart.min_g == doctest::Approx(4.0 / 3.0).epsilon(1e-15));
  CHECK(chart.ok);
}

TEST_CASE("invalid parameters") {
  CHECK_THROWS_AS(make_weight(WeightSpec::gaussian(0.0)), std::invalid_argument);
  CHECK_THROWS_AS(make_weight(WeightSpec::sphere_chart(-1.0)), std::invalid_argument);
  const auto w = make_weight(WeightSpec::custom([](std::span<const double>) { return std::nan(""); },
                                                [](std::span<const double>) { return 1.0; }));
  const double U[] = {0.0};
  CHECK_THROWS_AS(w.eval(U), std::domain_error);
}
