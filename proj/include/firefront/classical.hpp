/// @file classical.hpp
/// @brief Finite-difference level-set solver: Godunov upwind gradient,
///        two-stage explicit time stepping, CFL-limited adaptive dt.
///
/// Works entirely on the scaled grid; export to physical units happens in io.

#pragma once

#include <span>
#include <vector>

#include "firefront/field.hpp"
#include "firefront/scenario.hpp"

namespace firefront {

/// Time history of the level set plus the first-ignition times.
struct FieldStack {
  Grid2 grid;                        // scaled coordinates
  std::vector<double> times;         // scaled output times, ascending
  std::vector<ScalarField2> fields;  // one snapshot per time
  ScalarField2 ignition_time;        // scaled first time psi <= 0; NaN = unburned
};

/// Upwind (Godunov) magnitude of the level-set gradient at node (i, j) for a
/// front moving with positive speed. One-sided differences substitute for the
/// missing neighbor at the borders.
double godunov_grad_mag(const ScalarField2& psi, const Grid2& g, int i, int j);

/// Scaled spread rate at every node, front normal taken from central
/// differences of psi (one-sided at the borders).
void spread_field(const ScenarioConfig& sc, const Grid2& g, double t_scaled,
                  const ScalarField2& psi, ScalarField2& out);

/// One predictor-corrector step of d psi/dt = -S |grad psi| + eps * Lap psi
/// with the spread field frozen for both stages. OpenMP over rows.
void heun_step(const ScalarField2& psi, const ScalarField2& spread,
               const Grid2& g, double dt, double viscosity, ScalarField2& out);
/// Reference implementation of the identical update, single thread.
void heun_step_serial(const ScalarField2& psi, const ScalarField2& spread,
                      const Grid2& g, double dt, double viscosity,
                      ScalarField2& out);

struct SolveOptions {
  double cfl = 0.5;          ///< dt = cfl * min(dx, dy) / max spread
  bool parallel = true;      ///< use the OpenMP step kernel
  long long* steps_taken = nullptr;  ///< optional step counter for reporting
};

/// Integrates the scenario's initial level set to each requested scaled
/// output time (ascending, within the scaled domain), recording snapshots
/// and per-node first-ignition times. Throws DivergenceError if the field
/// stops being finite.
FieldStack solve(const ScenarioConfig& sc, const Grid2& g,
                 std::span<const double> out_times_scaled,
                 const SolveOptions& opt = {});

/// Remaining fuel fraction at physical time t for a node first ignited at
/// physical time t_ignite (NaN = never): exp(-(t - t_ignite)/burn_time),
/// clamped to 1 before ignition.
double fuel_fraction(double t, double t_ignite, double burn_time);

}  // namespace firefront
