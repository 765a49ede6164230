#include "firefront/classical.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "firefront/spread.hpp"

namespace firefront {

namespace {

/// One-sided neighbours substitute at the borders, so a linear ramp keeps
/// |grad| exact everywhere including the frame.
inline double backward_x(const ScalarField2& f, const Grid2& g, int i, int j) {
  if (i > 0) return (f.at(i, j) - f.at(i - 1, j)) / g.dx;
  return (f.at(i + 1, j) - f.at(i, j)) / g.dx;
}
inline double forward_x(const ScalarField2& f, const Grid2& g, int i, int j) {
  if (i < f.nx - 1) return (f.at(i + 1, j) - f.at(i, j)) / g.dx;
  return (f.at(i, j) - f.at(i - 1, j)) / g.dx;
}
inline double backward_y(const ScalarField2& f, const Grid2& g, int i, int j) {
  if (j > 0) return (f.at(i, j) - f.at(i, j - 1)) / g.dy;
  return (f.at(i, j + 1) - f.at(i, j)) / g.dy;
}
inline double forward_y(const ScalarField2& f, const Grid2& g, int i, int j) {
  if (j < f.ny - 1) return (f.at(i, j + 1) - f.at(i, j)) / g.dy;
  return (f.at(i, j) - f.at(i, j - 1)) / g.dy;
}

inline double central_x(const ScalarField2& f, const Grid2& g, int i, int j) {
  if (i > 0 && i < f.nx - 1) return (f.at(i + 1, j) - f.at(i - 1, j)) / (2.0 * g.dx);
  return i == 0 ? forward_x(f, g, i, j) : backward_x(f, g, i, j);
}
inline double central_y(const ScalarField2& f, const Grid2& g, int i, int j) {
  if (j > 0 && j < f.ny - 1) return (f.at(i, j + 1) - f.at(i, j - 1)) / (2.0 * g.dy);
  return j == 0 ? forward_y(f, g, i, j) : backward_y(f, g, i, j);
}

/// Five-point Laplacian with a reflected ghost layer at the frame.
inline double laplacian(const ScalarField2& f, const Grid2& g, int i, int j) {
  const double c = f.at(i, j);
  const double xm = i > 0 ? f.at(i - 1, j) : f.at(i + 1, j);
  const double xp = i < f.nx - 1 ? f.at(i + 1, j) : f.at(i - 1, j);
  const double ym = j > 0 ? f.at(i, j - 1) : f.at(i, j + 1);
  const double yp = j < f.ny - 1 ? f.at(i, j + 1) : f.at(i, j - 1);
  return (xm - 2.0 * c + xp) / (g.dx * g.dx) + (ym - 2.0 * c + yp) / (g.dy * g.dy);
}

/// Right-hand side -S |grad psi| + eps Lap psi at one node.
inline double rhs(const ScalarField2& psi, const ScalarField2& spread,
                  const Grid2& g, double viscosity, int i, int j) {
  double f = -spread.at(i, j) * godunov_grad_mag(psi, g, i, j);
  if (viscosity > 0.0) f += viscosity * laplacian(psi, g, i, j);
  return f;
}

template <bool Parallel>
void heun_step_impl(const ScalarField2& psi, const ScalarField2& spread,
                    const Grid2& g, double dt, double viscosity,
                    ScalarField2& out) {
  ScalarField2 stage(g.nx, g.ny);  // predictor field
  out.nx = g.nx;
  out.ny = g.ny;
  out.v.resize(g.nodes());

#pragma omp parallel for schedule(static) if (Parallel)
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i)
      stage.at(i, j) = psi.at(i, j) + dt * rhs(psi, spread, g, viscosity, i, j);

#pragma omp parallel for schedule(static) if (Parallel)
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i)
      out.at(i, j) = psi.at(i, j) + 0.5 * dt *
                                        (rhs(psi, spread, g, viscosity, i, j) +
                                         rhs(stage, spread, g, viscosity, i, j));
}

}  // namespace

double godunov_grad_mag(const ScalarField2& psi, const Grid2& g, int i, int j) {
  const double bx = backward_x(psi, g, i, j);
  const double fx = forward_x(psi, g, i, j);
  const double by = backward_y(psi, g, i, j);
  const double fy = forward_y(psi, g, i, j);
  const double a = std::max(bx, 0.0), b = std::min(fx, 0.0);
  const double c = std::max(by, 0.0), d = std::min(fy, 0.0);
  return std::sqrt(a * a + b * b + c * c + d * d);
}

void spread_field(const ScenarioConfig& sc, const Grid2& g, double t_scaled,
                  const ScalarField2& psi, ScalarField2& out) {
  out.nx = g.nx;
  out.ny = g.ny;
  out.v.resize(g.nodes());
#pragma omp parallel for schedule(static)
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) {
      const double gx = central_x(psi, g, i, j);
      const double gy = central_y(psi, g, i, j);
      out.at(i, j) = scaled_spread(sc, t_scaled, g.x(i), g.y(j), gx, gy);
    }
}

void heun_step(const ScalarField2& psi, const ScalarField2& spread, const Grid2& g,
               double dt, double viscosity, ScalarField2& out) {
  heun_step_impl<true>(psi, spread, g, dt, viscosity, out);
}

void heun_step_serial(const ScalarField2& psi, const ScalarField2& spread,
                      const Grid2& g, double dt, double viscosity,
                      ScalarField2& out) {
  heun_step_impl<false>(psi, spread, g, dt, viscosity, out);
}

FieldStack solve(const ScenarioConfig& sc, const Grid2& g,
                 std::span<const double> out_times_scaled, const SolveOptions& opt) {
  const ScaledBox box = sc.scaled_box();
  if (out_times_scaled.empty())
    throw ValidationError("at least one output time is required");
  for (std::size_t k = 0; k < out_times_scaled.size(); ++k) {
    const double t = out_times_scaled[k];
    if (t < 0.0 || t > box.t_hi)
      throw ValidationError("output time outside the scaled domain [0, " +
                            std::to_string(box.t_hi) + "]");
    if (k > 0 && t <= out_times_scaled[k - 1])
      throw ValidationError("output times must be strictly increasing");
  }

  FieldStack stack;
  stack.grid = g;
  stack.ignition_time = ScalarField2(g.nx, g.ny, std::numeric_limits<double>::quiet_NaN());

  ScalarField2 psi(g.nx, g.ny);
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i)
      psi.at(i, j) = initial_levelset(sc.ignition, g.x(i), g.y(j));

  auto mark_ignited = [&](double t) {
    for (std::size_t k = 0; k < psi.v.size(); ++k)
      if (psi.v[k] <= 0.0 && std::isnan(stack.ignition_time.v[k]))
        stack.ignition_time.v[k] = t;
  };
  mark_ignited(0.0);

  const double h = std::min(g.dx, g.dy);
  ScalarField2 spread, next;
  double t = 0.0;
  long long steps = 0;

  for (double t_out : out_times_scaled) {
    while (t < t_out - 1e-12 * std::max(1.0, box.t_hi)) {
      spread_field(sc, g, t, psi, spread);
      double s_max = 0.0;
      for (double s : spread.v) s_max = std::max(s_max, s);
      double dt = t_out - t;
      if (s_max > 0.0) dt = std::min(dt, opt.cfl * h / s_max);
      if (sc.viscosity_eps > 0.0)
        dt = std::min(dt, 0.25 * h * h / sc.viscosity_eps);

      if (opt.parallel)
        heun_step(psi, spread, g, dt, sc.viscosity_eps, next);
      else
        heun_step_serial(psi, spread, g, dt, sc.viscosity_eps, next);
      std::swap(psi.v, next.v);
      t += dt;
      ++steps;

      for (double v : psi.v)
        if (!std::isfinite(v))
          throw DivergenceError("level-set field became non-finite at scaled time " +
                                    std::to_string(t),
                                steps);
      mark_ignited(t);
    }
    stack.times.push_back(t_out);
    stack.fields.push_back(psi);
  }

  if (opt.steps_taken) *opt.steps_taken = steps;
  return stack;
}

double fuel_fraction(double t, double t_ignite, double burn_time) {
  if (std::isnan(t_ignite) || t < t_ignite) return 1.0;
  return std::exp(-(t - t_ignite) / burn_time);
}

}  // namespace firefront
