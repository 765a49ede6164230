/// @file test_classical.cpp
/// @brief Finite-difference level-set solver: upwind gradient oracle cases,
///        exact one-step advection, circle convergence, monotonicity,
///        and serial/parallel agreement.

#include "doctest.h"

#include <cmath>
#include <random>

#include "firefront/classical.hpp"
#include "firefront/geometry.hpp"

using namespace firefront;

namespace {

ScenarioConfig unit_circle_scenario() {
  // S tilde = 1 with identity scaling: [-5,5]^2, extent 10, r0 = 1 m/s,
  // time span 3.5 mapped with extent 3.5 so t.factor = 1.
  ScenarioConfig sc;
  sc.domain = {0, 3.5, -5, 5, -5, 5};
  sc.scaling = make_scaling(sc.domain, 3.5, 10.0, 10.0);
  sc.fuel.r0 = 1.0;
  sc.fuel.wind_exp = 1.0;
  sc.fuel.wind_cap = 1.0;
  sc.fuel.burn_time = 1.0;
  sc.ignition.cones.push_back({5.0, 5.0, 1.0, 1.0, 1.0});
  sc.validate();
  return sc;
}

ScalarField2 fill(const Grid2& g, double (*f)(double, double)) {
  ScalarField2 out(g.nx, g.ny);
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) out.at(i, j) = f(g.x(i), g.y(j));
  return out;
}

}  // namespace

TEST_CASE("godunov gradient of a plane is exactly one") {
  Grid2 g = make_grid(0, 1, 0, 1, 11, 11);
  ScalarField2 psi = fill(g, [](double x, double) { return x; });
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i)
      CHECK(godunov_grad_mag(psi, g, i, j) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("godunov gradient vanishes at an expanding kink and not at a closing one") {
  Grid2 g = make_grid(-1, 1, -1, 1, 21, 21);
  // psi = |x|: at the kink D- = -1, D+ = +1; for an outward-moving front
  // max(D-,0)^2 + min(D+,0)^2 = 0 (the rarefaction case)
  ScalarField2 vee = fill(g, [](double x, double) { return std::abs(x); });
  const int mid = 10;
  CHECK(godunov_grad_mag(vee, g, mid, 5) == doctest::Approx(0.0));
  // psi = -|x|: both one-sided slopes drive the front, magnitude sqrt(2)... per
  // axis it picks max(D-,0)^2 + min(D+,0)^2 = 1 + 1 from the x pair
  ScalarField2 hat = fill(g, [](double x, double) { return -std::abs(x); });
  CHECK(godunov_grad_mag(hat, g, mid, 5) == doctest::Approx(std::sqrt(2.0)));
}

TEST_CASE("one heun step advects a plane front exactly") {
  // With psi = x and constant spread S both stages see the same unit
  // gradient, so the two-stage average is exact: psi' = x - S dt.
  Grid2 g = make_grid(0, 1, 0, 1, 21, 21);
  ScalarField2 psi = fill(g, [](double x, double) { return x; });
  ScalarField2 spread(g.nx, g.ny, 0.25);
  ScalarField2 out(g.nx, g.ny);
  const double dt = 0.01;
  heun_step(psi, spread, g, dt, 0.0, out);
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i)
      CHECK(out.at(i, j) == doctest::Approx(g.x(i) - 0.25 * dt).epsilon(1e-13));
}

TEST_CASE("parallel and serial heun steps agree bitwise") {
  Grid2 g = make_grid(-2, 2, -1, 3, 57, 43);
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  ScalarField2 psi(g.nx, g.ny), spread(g.nx, g.ny);
  for (auto& v : psi.v) v = u(rng);
  for (auto& v : spread.v) v = 0.5 + 0.2 * u(rng);

  ScalarField2 a(g.nx, g.ny), b(g.nx, g.ny);
  heun_step(psi, spread, g, 0.004, 0.001, a);
  heun_step_serial(psi, spread, g, 0.004, 0.001, b);
  for (size_t k = 0; k < a.v.size(); ++k) CHECK(a.v[k] == b.v[k]);
}

TEST_CASE("expanding circle tracks the analytic front radius") {
  ScenarioConfig sc = unit_circle_scenario();
  Grid2 g = make_grid(0, 10, 0, 10, 101, 101);  // scaled grid, dx = 0.1
  const std::vector<double> times{0.5, 1.0, 2.0};
  FieldStack fs = solve(sc, g, times);

  REQUIRE(fs.fields.size() == 3);
  for (size_t k = 0; k < times.size(); ++k) {
    Fireline fl = extract_fireline(fs.fields[k], g, times[k]);
    REQUIRE_FALSE(fl.lines.empty());
    const double want_r = 1.0 + times[k];
    double worst = 0.0;
    for (const auto& line : fl.lines)
      for (const auto& p : line.pts) {
        const double r = std::hypot(p[0] - 5.0, p[1] - 5.0);
        worst = std::max(worst, std::abs(r - want_r));
      }
    CHECK(worst < 2.0 * g.dx);
  }
}

TEST_CASE("level set is pointwise non-increasing and burned area grows") {
  ScenarioConfig sc = unit_circle_scenario();
  sc.fuel.wind_coeff = 0.4;
  sc.fuel.wind_exp = 1.1;
  sc.fuel.wind_cap = 5.0;
  sc.wind.u = Poly3{0, 0, 0, {1.0}};
  sc.validate();

  Grid2 g = make_grid(0, 10, 0, 10, 81, 81);
  const std::vector<double> times{0.5, 1.0, 1.5, 2.0, 2.5};
  FieldStack fs = solve(sc, g, times);

  double prev_area = -1.0;
  for (size_t k = 0; k < fs.fields.size(); ++k) {
    if (k > 0)
      for (size_t n = 0; n < fs.fields[k].v.size(); ++n)
        CHECK(fs.fields[k].v[n] <= fs.fields[k - 1].v[n]);
    const double area = region_area(fs.fields[k], g);
    CHECK(area >= prev_area);
    prev_area = area;
  }
}

TEST_CASE("zero spread freezes the field bitwise") {
  ScenarioConfig sc = unit_circle_scenario();
  sc.fuel.r0 = 0.0;
  sc.validate();
  Grid2 g = make_grid(0, 10, 0, 10, 41, 41);
  const std::vector<double> times{1.0, 2.0, 3.0};
  FieldStack fs = solve(sc, g, times);

  ScalarField2 psi0(g.nx, g.ny);
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i)
      psi0.at(i, j) = initial_levelset(sc.ignition, g.x(i), g.y(j));

  for (const auto& f : fs.fields)
    for (size_t n = 0; n < f.v.size(); ++n) CHECK(f.v[n] == psi0.v[n]);
}

TEST_CASE("ignition times are zero inside the initial front and ordered outward") {
  ScenarioConfig sc = unit_circle_scenario();
  Grid2 g = make_grid(0, 10, 0, 10, 101, 101);
  const std::vector<double> times{2.0};
  FieldStack fs = solve(sc, g, times);

  // center node starts burned
  CHECK(fs.ignition_time.at(50, 50) == 0.0);
  // inside radius 3 everything has ignited by t = 2 (front reaches 3)
  // and ignition time grows with radius along the +x ray
  double prev = 0.0;
  for (int i = 50; i < 78; ++i) {
    const double ti = fs.ignition_time.at(i, 50);
    if (std::isnan(ti)) continue;  // outermost nodes may not have ignited
    CHECK(ti >= prev);
    prev = ti;
  }
  // a node at radius ~2 ignites near t = 1 (front speed 1, initial radius 1)
  const double t_r2 = fs.ignition_time.at(70, 50);  // x = 7.0, radius 2
  CHECK(t_r2 == doctest::Approx(1.0).epsilon(0.1));
}

TEST_CASE("requested times outside the scaled domain are rejected") {
  ScenarioConfig sc = unit_circle_scenario();
  Grid2 g = make_grid(0, 10, 0, 10, 21, 21);
  const std::vector<double> beyond{5.0};      // beyond t_hi = 3.5
  const std::vector<double> before{-1.0};     // before 0
  const std::vector<double> descending{2.0, 1.0};
  CHECK_THROWS_AS(solve(sc, g, beyond), ValidationError);
  CHECK_THROWS_AS(solve(sc, g, before), ValidationError);
  CHECK_THROWS_AS(solve(sc, g, descending), ValidationError);
}

TEST_CASE("fuel fraction decays exponentially after ignition") {
  CHECK(fuel_fraction(5.0, 10.0, 100.0) == 1.0);  // before ignition
  CHECK(fuel_fraction(10.0, 10.0, 100.0) == 1.0);
  CHECK(fuel_fraction(110.0, 10.0, 100.0) == doctest::Approx(std::exp(-1.0)));
  const double nan = std::nan("");
  CHECK(fuel_fraction(50.0, nan, 100.0) == 1.0);  // never ignited
}

TEST_CASE("viscosity smooths but stays close to the exact front") {
  ScenarioConfig sc = unit_circle_scenario();
  sc.viscosity_eps = 0.005;
  sc.validate();
  Grid2 g = make_grid(0, 10, 0, 10, 101, 101);
  const std::vector<double> times{1.0};
  FieldStack fs = solve(sc, g, times);
  Fireline fl = extract_fireline(fs.fields[0], g, 1.0);
  REQUIRE_FALSE(fl.lines.empty());
  for (const auto& line : fl.lines)
    for (const auto& p : line.pts) {
      const double r = std::hypot(p[0] - 5.0, p[1] - 5.0);
      CHECK(std::abs(r - 2.0) < 5.0 * g.dx);
    }
}
