/// @file spread.hpp
/// @brief Rate-of-spread closure: base rate amplified by wind and slope
///        resolved against the front normal.
///
/// Templated on the scalar type so the finite-difference solver (plain
/// doubles) and the training residual (dual numbers seeded on the level-set
/// gradient) evaluate literally the same expressions.

#pragma once

#include "firefront/dual.hpp"
#include "firefront/scenario.hpp"

namespace firefront {

/// Wind amplification phi_w = c * min(e, max(0, u . n))^b.
/// Only the component of the wind along the outward normal pushes the front;
/// a headwind clamps to zero rather than retarding it.
template <class T>
T wind_factor(double wind_u, double wind_v, const T& nx, const T& ny,
              const FuelParameters& fuel) {
  if (fuel.wind_coeff == 0.0) return T(0.0);
  T along = positive_part(wind_u * nx + wind_v * ny);
  T capped = cap_at(along, fuel.wind_cap);
  return fuel.wind_coeff * pow_t(capped, fuel.wind_exp);
}

/// Slope amplification phi_s = d * max(0, grad z . n)^2: upslope spread only.
template <class T>
T slope_factor(double dz_dx, double dz_dy, const T& nx, const T& ny,
               const FuelParameters& fuel) {
  if (fuel.slope_coeff == 0.0) return T(0.0);
  T upslope = positive_part(dz_dx * nx + dz_dy * ny);
  return fuel.slope_coeff * (upslope * upslope);
}

template <class T>
T spread_rate(const FuelParameters& fuel, const T& phi_w, const T& phi_s) {
  return fuel.r0 * (T(1.0) + phi_w + phi_s);
}

/// Degenerate-gradient threshold below which the normal is undefined and the
/// closure falls back to the base rate.
inline constexpr double kGradFloor = 1e-8;

/// Scaled spread rate at a scaled point, given the scaled spatial gradient
/// (gx, gy) of the level set. Wind and terrain are sampled at the physical
/// image of the point; the result carries the t.factor/x.factor unit change.
/// Below the gradient floor the normal is undefined and the wind/slope terms
/// drop out.
template <class T>
T scaled_spread(const ScenarioConfig& sc, double ts, double xs, double ys,
                const T& gx, const T& gy, double grad_floor = kGradFloor) {
  const double unit = sc.scaling.spread_scale();
  T norm2 = gx * gx + gy * gy;
  if (value_of(norm2) < grad_floor * grad_floor)
    return T(sc.fuel.r0 * unit);

  T norm = sqrt_t(norm2);
  T nx = gx / norm;
  T ny = gy / norm;

  const auto [tp, xp, yp] = sc.scaling.unscale(ts, xs, ys);
  const double wu = sc.wind.u.eval(tp, xp, yp);
  const double wv = sc.wind.v.eval(tp, xp, yp);
  const double zx = sc.terrain.z.ddx(0.0, xp, yp);
  const double zy = sc.terrain.z.ddy(0.0, xp, yp);

  T phi_w = wind_factor(wu, wv, nx, ny, sc.fuel);
  T phi_s = slope_factor(zx, zy, nx, ny, sc.fuel);
  return spread_rate(sc.fuel, phi_w, phi_s) * unit;
}

}  // namespace firefront
