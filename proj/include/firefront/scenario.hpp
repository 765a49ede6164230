/// @file scenario.hpp
/// @brief Scenario configuration: domain, unit scaling, fuel, wind, terrain,
///        ignition geometry, and the text file format that carries them.

#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "firefront/errors.hpp"

namespace firefront {

/// Physical space-time box. Times in seconds, lengths in meters.
struct Domain3 {
  double t_min = 0.0, t_max = 0.0;
  double x_min = 0.0, x_max = 0.0;
  double y_min = 0.0, y_max = 0.0;
};

/// One affine axis map: scaled = (physical - offset) / factor.
/// `factor` is physical units per scaled unit and must be positive.
struct AxisMap {
  double offset = 0.0;
  double factor = 1.0;

  double scale(double p) const { return (p - offset) / factor; }
  double unscale(double s) const { return s * factor + offset; }
};

/// Affine scaling of (t, x, y) into solver units. The two spatial axes share
/// one factor so the scaled level-set equation stays isotropic: a spread rate
/// S in m/s becomes S * t.factor / x.factor in scaled units, and front
/// normals keep their directions.
struct ScalingTransform {
  AxisMap t, x, y;

  std::array<double, 3> scale(double tp, double xp, double yp) const {
    return {t.scale(tp), x.scale(xp), y.scale(yp)};
  }
  std::array<double, 3> unscale(double ts, double xs, double ys) const {
    return {t.unscale(ts), x.unscale(xs), y.unscale(ys)};
  }
  /// Multiplier taking a physical rate (m/s) to scaled units per scaled time.
  double spread_scale() const { return t.factor / x.factor; }

  void validate() const;
};

/// Builds the scaling for a domain: time maps to [0, extent_t]; space shares
/// the single factor that lets the larger axis exactly reach its extent, so
/// both spatial images fit inside [0, extent].
ScalingTransform make_scaling(const Domain3& d, double extent_t = 10.0,
                              double extent_x = 10.0, double extent_y = 10.0);

/// Scaled image of the domain (t from 0, x/y from 0).
struct ScaledBox {
  double t_hi = 0.0, x_hi = 0.0, y_hi = 0.0;
};

/// Fuel-bed coefficients for the spread-rate closure
/// S = r0 * (1 + phi_wind + phi_slope).
struct FuelParameters {
  double r0 = 0.0;          ///< zero-wind, zero-slope rate of spread, m/s
  double wind_coeff = 0.0;  ///< c in c * min(e, max(0, u.n))^b
  double wind_exp = 1.0;    ///< b (dimensionless, > 0)
  double wind_cap = 1.0;    ///< e, caps the effective normal wind, m/s (> 0)
  double slope_coeff = 0.0; ///< d in d * max(0, grad z . n)^2
  double burn_time = 1.0;   ///< Tf: e-folding time of fuel depletion, s (> 0)
  int category = 0;         ///< Anderson-style label, informational

  void validate() const;
};

/// Trivariate polynomial in (t, x, y) with per-axis degrees. Coefficient
/// layout is row-major over (it, ix, iy): index (it*(dx+1) + ix)*(dy+1) + iy.
struct Poly3 {
  int deg_t = 0, deg_x = 0, deg_y = 0;
  std::vector<double> coeff{0.0};

  double eval(double t, double x, double y) const;
  double ddx(double t, double x, double y) const;
  double ddy(double t, double x, double y) const;
  void validate(const char* what) const;
};

/// Horizontal wind components in m/s as polynomials in (t, x, y) physical.
struct WindModel {
  Poly3 u, v;
};

/// Terrain elevation z(x, y) in meters (time-independent polynomial).
struct TerrainModel {
  Poly3 z;  // deg_t must be 0
};

/// One elliptic cone in scaled coordinates:
/// psi(x, y) = sqrt((a(x-x0))^2 + (b(y-y0))^2) - h.
struct Cone {
  double x0 = 0.0, y0 = 0.0;
  double a = 1.0, b = 1.0;  ///< axis scales, > 0
  double h = 1.0;           ///< apex depth, > 0 (initial front reach)
};

/// Ignition geometry: pointwise minimum over cones, so several ignitions
/// union their burning regions. Single-cone is the validated configuration;
/// multi-ignition is accepted but experimental.
struct IgnitionShape {
  std::vector<Cone> cones;
};

/// Signed distance-like initial level set at a scaled point.
double initial_levelset(const IgnitionShape& shape, double xs, double ys);

struct ScenarioConfig {
  Domain3 domain;
  ScalingTransform scaling;
  FuelParameters fuel;
  WindModel wind;
  TerrainModel terrain;
  IgnitionShape ignition;
  double viscosity_eps = 0.0;  ///< vanishing-viscosity coefficient, scaled units

  ScaledBox scaled_box() const;
  void validate() const;
};

/// Parses the INI-style scenario text. Unknown sections or keys are errors.
ScenarioConfig load_scenario(const std::string& text);
ScenarioConfig load_scenario_file(const std::string& path);

/// Bundled fuel table: category -> coefficients.
std::map<int, FuelParameters> load_fuel_table(const std::string& path);

// --- Shared INI-ish reader, also used by the atmospheric study config. ---

struct ConfigSection {
  std::string name;
  std::map<std::string, std::string> kv;
  std::vector<std::string> key_order;
};

/// Splits text into sections. `[name]` opens a unique section (duplicate is
/// an error), `[[name]]` opens one more instance of a repeatable section.
std::vector<ConfigSection> parse_config_sections(const std::string& text);

double parse_double(const std::string& s, const std::string& context);
long long parse_int(const std::string& s, const std::string& context);
std::vector<double> parse_double_list(const std::string& s, const std::string& context);

}  // namespace firefront
