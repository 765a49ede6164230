/// @file test_spread.cpp
/// @brief Rate-of-spread closure: wind/slope response, caps, the
///        degenerate-gradient fallback, and scalar/dual agreement.

#include "doctest.h"

#include <cmath>

#include "firefront/spread.hpp"

using namespace firefront;

namespace {

FuelParameters grass() {
  FuelParameters f;
  f.r0 = 0.2;
  f.wind_coeff = 0.5;
  f.wind_exp = 1.2;
  f.wind_cap = 10.0;
  f.slope_coeff = 0.3;
  f.burn_time = 120.0;
  return f;
}

ScenarioConfig flat_windy() {
  ScenarioConfig sc;
  sc.domain = {0, 600, 0, 1000, 0, 1000};
  sc.scaling = make_scaling(sc.domain);
  sc.fuel = grass();
  sc.wind.v = Poly3{0, 0, 0, {2.0}};
  sc.ignition.cones.push_back({5.0, 5.0, 1.0, 1.0, 0.5});
  sc.validate();
  return sc;
}

}  // namespace

TEST_CASE("wind factor responds only to the along-normal component") {
  FuelParameters f = grass();
  // headwind: u . n < 0 clamps to zero
  CHECK(wind_factor(0.0, -3.0, 0.0, 1.0, f) == 0.0);
  // crosswind: orthogonal to the normal contributes nothing
  CHECK(wind_factor(4.0, 0.0, 0.0, 1.0, f) == 0.0);
  // tailwind of 2 m/s: c * 2^b
  CHECK(wind_factor(0.0, 2.0, 0.0, 1.0, f) ==
        doctest::Approx(0.5 * std::pow(2.0, 1.2)).epsilon(1e-14));
  // monotone below the cap
  CHECK(wind_factor(0.0, 3.0, 0.0, 1.0, f) > wind_factor(0.0, 2.0, 0.0, 1.0, f));
  // capped at e = 10 m/s
  CHECK(wind_factor(0.0, 25.0, 0.0, 1.0, f) ==
        doctest::Approx(0.5 * std::pow(10.0, 1.2)).epsilon(1e-14));
  // zero coefficient short-circuits
  f.wind_coeff = 0.0;
  CHECK(wind_factor(0.0, 5.0, 0.0, 1.0, f) == 0.0);
}

TEST_CASE("slope factor is quadratic uphill and zero downhill") {
  FuelParameters f = grass();
  // upslope along the normal: d * (dz.n)^2
  CHECK(slope_factor(0.3, 0.0, 1.0, 0.0, f) ==
        doctest::Approx(0.3 * 0.09).epsilon(1e-14));
  // downhill: clamped
  CHECK(slope_factor(-0.3, 0.0, 1.0, 0.0, f) == 0.0);
  CHECK(slope_factor(0.4, 0.0, 1.0, 0.0, f) > slope_factor(0.2, 0.0, 1.0, 0.0, f));
}

TEST_CASE("spread rate composes base, wind, and slope multiplicatively") {
  FuelParameters f = grass();
  CHECK(spread_rate(f, 0.0, 0.0) == doctest::Approx(0.2));
  CHECK(spread_rate(f, 1.5, 0.5) == doctest::Approx(0.2 * 3.0));
}

TEST_CASE("scaled spread falls back to the base rate under the gradient floor") {
  ScenarioConfig sc = flat_windy();
  const double unit = sc.scaling.spread_scale();
  const double tiny = 1e-9;  // below kGradFloor = 1e-8
  CHECK(scaled_spread(sc, 1.0, 5.0, 5.0, tiny, 0.0) ==
        doctest::Approx(sc.fuel.r0 * unit));
  // above the floor the wind term engages when the normal has +y component
  const double with_wind = scaled_spread(sc, 1.0, 5.0, 5.0, 0.0, 1.0);
  CHECK(with_wind > sc.fuel.r0 * unit);
}

TEST_CASE("scaled spread is invariant to the gradient magnitude") {
  // only the direction of (gx, gy) matters
  ScenarioConfig sc = flat_windy();
  const double a = scaled_spread(sc, 2.0, 3.0, 4.0, 0.6, 0.8);
  const double b = scaled_spread(sc, 2.0, 3.0, 4.0, 6.0, 8.0);
  CHECK(a == doctest::Approx(b).epsilon(1e-14));
}

TEST_CASE("scaled spread rotates with a co-rotated wind") {
  // rotating both the wind vector and the front normal by the same angle
  // leaves the rate unchanged (flat terrain)
  ScenarioConfig sc = flat_windy();
  sc.fuel.slope_coeff = 0.0;
  const double phi = 0.7;
  const double c = std::cos(phi), s = std::sin(phi);

  // original: wind (0, 2), normal (0.6, 0.8)
  const double r1 = scaled_spread(sc, 1.0, 5.0, 5.0, 0.6, 0.8);

  ScenarioConfig rot = sc;
  // wind rotated by phi
  rot.wind.u = Poly3{0, 0, 0, {-2.0 * s}};
  rot.wind.v = Poly3{0, 0, 0, {2.0 * c}};
  const double gx = 0.6 * c - 0.8 * s;
  const double gy = 0.6 * s + 0.8 * c;
  const double r2 = scaled_spread(rot, 1.0, 5.0, 5.0, gx, gy);
  CHECK(r2 == doctest::Approx(r1).epsilon(1e-12));
}

TEST_CASE("dual-number spread agrees with the scalar value and its FD slope") {
  ScenarioConfig sc = flat_windy();
  const double gx = 0.3, gy = 1.1;
  const double base = scaled_spread(sc, 2.0, 4.0, 6.0, gx, gy);

  Dual<2> dgx = Dual<2>::seeded(gx, 0);
  Dual<2> dgy = Dual<2>::seeded(gy, 1);
  Dual<2> ds = scaled_spread(sc, 2.0, 4.0, 6.0, dgx, dgy);
  CHECK(ds.v == base);

  const double h = 1e-7;
  const double fd_x =
      (scaled_spread(sc, 2.0, 4.0, 6.0, gx + h, gy) -
       scaled_spread(sc, 2.0, 4.0, 6.0, gx - h, gy)) / (2 * h);
  const double fd_y =
      (scaled_spread(sc, 2.0, 4.0, 6.0, gx, gy + h) -
       scaled_spread(sc, 2.0, 4.0, 6.0, gx, gy - h)) / (2 * h);
  CHECK(ds.d[0] == doctest::Approx(fd_x).epsilon(1e-6));
  CHECK(ds.d[1] == doctest::Approx(fd_y).epsilon(1e-6));
}

TEST_CASE("terrain slope is sampled at the physical point") {
  ScenarioConfig sc = flat_windy();
  sc.wind = WindModel{};
  // z = 0.05 x (physical meters): uphill toward +x
  sc.terrain.z = Poly3{0, 1, 0, {0.0, 0.05}};
  sc.validate();

  const double unit = sc.scaling.spread_scale();
  const double uphill = scaled_spread(sc, 0.0, 5.0, 5.0, 1.0, 0.0);
  const double downhill = scaled_spread(sc, 0.0, 5.0, 5.0, -1.0, 0.0);
  CHECK(uphill ==
        doctest::Approx(sc.fuel.r0 * (1.0 + 0.3 * 0.05 * 0.05) * unit).epsilon(1e-13));
  CHECK(downhill == doctest::Approx(sc.fuel.r0 * unit).epsilon(1e-13));
}
