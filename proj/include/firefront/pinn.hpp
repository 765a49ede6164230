/// @file pinn.hpp
/// @brief Level-set network surrogate: collocation sampling, residual loss,
///        exact loss gradient, training loop, and field evaluation.

#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <random>
#include <span>
#include <vector>

#include "firefront/field.hpp"
#include "firefront/net.hpp"
#include "firefront/scenario.hpp"

namespace firefront {

struct TrainingConfig {
  int iterations = 4800;
  double learning_rate = 1e-3;
  /// If >= 0, the learning rate decays linearly to this value at the last
  /// iteration; otherwise it stays constant.
  double final_learning_rate = -1.0;
  int interior_batch = 4096;
  int boundary_batch = 1024;
  double pde_weight = 1.0;
  double bc_weight = 10.0;
  /// Gradient regularizer: residual uses sqrt(|grad u|^2 + grad_reg^2).
  double grad_reg = 1e-8;
  std::uint64_t seed = 0;
  /// Sample collocation points from the training lattice instead of
  /// continuously (the lattice is subsampled per iteration either way).
  bool grid_sampling = false;
  std::array<double, 3> mesh_spacing{0.17, 0.02, 0.02};  // dt, dx, dy scaled
  std::vector<int> hidden{16};
  bool parallel = true;

  void validate() const;
};

/// Trained surrogate plus everything needed to evaluate it on physical
/// coordinates and to trace it back to its scenario.
struct LevelSetSolution {
  DenseNet net;
  ScalingTransform scaling;
  Domain3 domain;
  std::string scenario_hash;  ///< FNV-1a of the scenario file bytes, hex
  std::vector<double> loss_history;
};

/// Collocation batches in scaled coordinates, row-major (t, x, y) triples.
/// Boundary points sit at t = 0.
struct SampleBatches {
  std::vector<double> interior;
  std::vector<double> boundary;
  int n_interior = 0;
  int n_boundary = 0;
};

/// Stratified sampling: the interior batch spreads over the 8 octants of the
/// scaled box (counts equal up to 1), the boundary batch over the 4 spatial
/// quadrants at t = 0.
SampleBatches sample_batches(const TrainingConfig& cfg, const ScaledBox& box,
                             std::mt19937_64& rng);

/// Level-set residual r = u_t + S(grad u) * sqrt(|grad u|^2 + grad_reg^2)
/// at one scaled point. Throws DivergenceError if non-finite.
double pde_residual(const DenseNet& net, const ScenarioConfig& sc,
                    std::span<const double> pt, double grad_reg,
                    EvalWorkspace& ws);

struct LossBreakdown {
  double total = 0.0;
  double pde = 0.0;  ///< mean squared residual (unweighted)
  double bc = 0.0;   ///< mean squared initial-condition mismatch (unweighted)
};

/// Loss over explicit batches; convenience wrapper without gradient.
LossBreakdown total_loss(const DenseNet& net, const ScenarioConfig& sc,
                         const TrainingConfig& cfg, const SampleBatches& batches);

/// Loss and d loss/d theta in one pass. The gradient buffer must hold
/// net.param_count() entries; it is overwritten. Summation runs block by
/// block in a fixed order, so results are independent of thread count.
LossBreakdown loss_and_grad(const DenseNet& net, const ScenarioConfig& sc,
                            const TrainingConfig& cfg, const SampleBatches& batches,
                            std::span<double> grad);
/// Reference implementation: same block order, single thread.
LossBreakdown loss_and_grad_serial(const DenseNet& net, const ScenarioConfig& sc,
                                   const TrainingConfig& cfg,
                                   const SampleBatches& batches,
                                   std::span<double> grad);

using ProgressFn = std::function<void(int iteration, const LossBreakdown&)>;

/// Adam-trains a fresh net on the scenario. Throws DivergenceError with the
/// iteration index if the loss stops being finite.
LevelSetSolution train(const ScenarioConfig& sc, const TrainingConfig& cfg,
                       const ProgressFn& progress = nullptr);

/// Level set on a physical-coordinate grid at a physical time (each node is
/// scaled, the net evaluated, the value returned unchanged — level-set values
/// carry no unit).
ScalarField2 evaluate(const LevelSetSolution& sol, double t_phys, const Grid2& g);

struct Extrapolation {
  ScalarField2 field;
  double beyond = 0.0;  ///< physical seconds outside [t_min, t_max]; 0 inside
  double max_abs = 0.0; ///< largest |value| on the grid, for range warnings
};

/// evaluate() plus metadata: how far outside the training window the query
/// sits and the value range, for out-of-window diagnostics.
Extrapolation extrapolate(const LevelSetSolution& sol, double t_phys, const Grid2& g);

// --- Solution file (text; net + scaling + domain + hash) ---

void save_solution(const LevelSetSolution& sol, std::ostream& os);
LevelSetSolution load_solution(std::istream& is);
void save_solution_file(const LevelSetSolution& sol, const std::string& path);
LevelSetSolution load_solution_file(const std::string& path);

}  // namespace firefront
