/// @file firefront_main.cpp
/// @brief Command-line front end: training, classical simulation, front
///        comparison, forensic extrapolation, the atmospheric convergence
///        study, and timing reports. The only place with side effects.

#include <omp.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <limits>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "firefront/classical.hpp"
#include "firefront/errors.hpp"
#include "firefront/euler.hpp"
#include "firefront/geometry.hpp"
#include "firefront/io.hpp"
#include "firefront/pinn.hpp"
#include "firefront/scenario.hpp"
#include "json.hpp"

namespace ff = firefront;

namespace {

struct GlobalOpts {
  std::uint64_t seed = 0;
  bool seed_given = false;
  int threads = 0;
  std::string out_dir = ".";
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
      .count();
}

void prepare_out_dir(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw ff::IoError("cannot create output directory: " + dir);
}

int effective_threads() { return omp_get_max_threads(); }

const char* build_profile() {
#ifdef NDEBUG
  return "release";
#else
  return "debug";
#endif
}

struct LoadedScenario {
  ff::ScenarioConfig sc;
  std::string path;
  std::string hash;
};

LoadedScenario load_scenario_hashed(const std::string& path) {
  LoadedScenario out;
  out.path = path;
  const std::string text = ff::read_file(path);
  out.hash = ff::fnv1a_hex(text);
  out.sc = ff::load_scenario(text);
  return out;
}

std::string join_ints(const std::vector<int>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ',';
    s += std::to_string(v[i]);
  }
  return s;
}

std::string fmt(double v) { return ff::format_double(v); }

// --- train ---

struct TrainOpts {
  std::string scenario;
  ff::TrainingConfig cfg;
  int progress_every = 200;
  bool serial = false;
};

void echo_training_config(const ff::TrainingConfig& cfg, ff::RunManifest& m) {
  m.config["iterations"] = std::to_string(cfg.iterations);
  m.config["learning_rate"] = fmt(cfg.learning_rate);
  m.config["final_learning_rate"] = fmt(cfg.final_learning_rate);
  m.config["interior_batch"] = std::to_string(cfg.interior_batch);
  m.config["boundary_batch"] = std::to_string(cfg.boundary_batch);
  m.config["pde_weight"] = fmt(cfg.pde_weight);
  m.config["bc_weight"] = fmt(cfg.bc_weight);
  m.config["grad_reg"] = fmt(cfg.grad_reg);
  m.config["grid_sampling"] = cfg.grid_sampling ? "1" : "0";
  m.config["mesh_spacing"] = fmt(cfg.mesh_spacing[0]) + "," +
                             fmt(cfg.mesh_spacing[1]) + "," +
                             fmt(cfg.mesh_spacing[2]);
  m.config["hidden"] = join_ints(cfg.hidden);
  m.config["parallel"] = cfg.parallel ? "1" : "0";
}

void cmd_train(const GlobalOpts& g, TrainOpts o) {
  const LoadedScenario L = load_scenario_hashed(o.scenario);
  o.cfg.seed = g.seed;
  o.cfg.parallel = !o.serial;
  o.cfg.validate();
  prepare_out_dir(g.out_dir);

  ff::ProgressFn progress;
  if (o.progress_every > 0) {
    const int every = o.progress_every, total = o.cfg.iterations;
    progress = [every, total](int it, const ff::LossBreakdown& l) {
      if ((it + 1) % every == 0 || it + 1 == total)
        std::printf("iteration %d/%d  loss %.6e  (pde %.4e, bc %.4e)\n", it + 1,
                    total, l.total, l.pde, l.bc);
    };
  }

  const auto t0 = std::chrono::steady_clock::now();
  ff::LevelSetSolution sol = ff::train(L.sc, o.cfg, progress);
  const double train_s = seconds_since(t0);
  sol.scenario_hash = L.hash;

  ff::save_solution_file(sol, ff::path_join(g.out_dir, "solution.txt"));
  ff::write_loss_csv(ff::path_join(g.out_dir, "loss_history.csv"),
                     sol.loss_history);

  ff::RunManifest m;
  m.command = "train";
  m.scenario_path = L.path;
  m.scenario_hash = L.hash;
  m.seed = g.seed;
  m.threads = effective_threads();
  echo_training_config(o.cfg, m);
  m.artifacts = {"solution.txt", "loss_history.csv"};
  m.timings_s["train"] = train_s;
  ff::write_manifest(g.out_dir, m);

  std::printf("final loss %.6e after %d iterations (%.1f s)\n",
              sol.loss_history.back(), o.cfg.iterations, train_s);
}

// --- simulate ---

struct SimulateOpts {
  std::string scenario;
  std::vector<double> times;
  int nx = 201, ny = 201;
  double cfl = 0.5;
  bool serial = false;
};

void cmd_simulate(const GlobalOpts& g, SimulateOpts o) {
  const LoadedScenario L = load_scenario_hashed(o.scenario);
  prepare_out_dir(g.out_dir);
  std::sort(o.times.begin(), o.times.end());
  o.times.erase(std::unique(o.times.begin(), o.times.end()), o.times.end());
  if (o.times.empty()) throw ff::ValidationError("at least one output time is required");

  const ff::Domain3& d = L.sc.domain;
  const ff::Grid2 grid_phys =
      ff::make_grid(d.x_min, d.x_max, d.y_min, d.y_max, o.nx, o.ny);
  const ff::ScaledBox box = L.sc.scaled_box();
  const ff::Grid2 grid_scaled = ff::make_grid(0.0, box.x_hi, 0.0, box.y_hi, o.nx, o.ny);

  std::vector<double> times_scaled(o.times.size());
  for (std::size_t i = 0; i < o.times.size(); ++i)
    times_scaled[i] = L.sc.scaling.scale(o.times[i], d.x_min, d.y_min)[0];

  long long steps = 0;
  ff::SolveOptions opt;
  opt.cfl = o.cfl;
  opt.parallel = !o.serial;
  opt.steps_taken = &steps;

  const auto t0 = std::chrono::steady_clock::now();
  const ff::FieldStack stack = ff::solve(L.sc, grid_scaled, times_scaled, opt);
  const double solve_s = seconds_since(t0);

  ff::RunManifest m;
  m.command = "simulate";
  m.scenario_path = L.path;
  m.scenario_hash = L.hash;
  m.seed = g.seed;
  m.threads = effective_threads();
  m.config["times"] = [&] {
    std::string s;
    for (std::size_t i = 0; i < o.times.size(); ++i)
      s += (i ? "," : "") + fmt(o.times[i]);
    return s;
  }();
  m.config["nx"] = std::to_string(o.nx);
  m.config["ny"] = std::to_string(o.ny);
  m.config["cfl"] = fmt(o.cfl);
  m.config["parallel"] = o.serial ? "0" : "1";

  for (std::size_t i = 0; i < stack.times.size(); ++i) {
    char name[64];
    std::snprintf(name, sizeof name, "snapshot_%03zu.csv", i);
    ff::write_snapshot_csv(ff::path_join(g.out_dir, name), o.times[i],
                           stack.fields[i], grid_phys);
    m.artifacts.push_back(name);
  }

  // first-ignition times back in physical seconds (NaN survives the map)
  ff::ScalarField2 ignite_phys = stack.ignition_time;
  for (double& v : ignite_phys.v)
    v = v * L.sc.scaling.t.factor + L.sc.scaling.t.offset;
  ff::write_ignition_csv(ff::path_join(g.out_dir, "ignition_time.csv"),
                         ignite_phys, grid_phys);
  m.artifacts.push_back("ignition_time.csv");

  m.timings_s["solve"] = solve_s;
  ff::write_manifest(g.out_dir, m);
  std::printf("%zu snapshots on a %dx%d grid, %lld steps (%.1f s)\n",
              stack.times.size(), o.nx, o.ny, steps, solve_s);
}

// --- compare ---

struct CompareOpts {
  std::string solution;
  std::string source;
  std::vector<double> times;
  int nx = 201, ny = 201;
  std::string norm = "sqrt_area";
};

bool same_grid(const ff::Grid2& a, const ff::Grid2& b) {
  const double tol = 1e-9 * (std::abs(a.dx) + std::abs(a.dy) + 1.0);
  return a.nx == b.nx && a.ny == b.ny && std::abs(a.x0 - b.x0) < tol &&
         std::abs(a.y0 - b.y0) < tol && std::abs(a.dx - b.dx) < tol &&
         std::abs(a.dy - b.dy) < tol;
}

std::string box_string(double x0, double x1, double y0, double y1) {
  return "[" + fmt(x0) + ", " + fmt(x1) + "] x [" + fmt(y0) + ", " + fmt(y1) + "]";
}

void cmd_compare(const GlobalOpts& g, CompareOpts o) {
  const ff::LevelSetSolution sol = ff::load_solution_file(o.solution);
  prepare_out_dir(g.out_dir);
  const ff::AreaNorm norm =
      o.norm == "area" ? ff::AreaNorm::Area : ff::AreaNorm::SqrtArea;

  ff::FieldSource source_a, source_b;
  std::vector<double> times;
  ff::Grid2 grid;

  auto check_time_cover = [](const std::vector<double>& ts, const ff::Domain3& d,
                             const std::string& which) {
    const double tt = 1e-9 * (1.0 + std::abs(d.t_max - d.t_min));
    for (double t : ts)
      if (t < d.t_min - tt || t > d.t_max + tt)
        throw ff::ValidationError("time " + fmt(t) + " is outside the " + which +
                                  " window [" + fmt(d.t_min) + ", " +
                                  fmt(d.t_max) + "] s");
  };

  const bool dir_source = std::filesystem::is_directory(o.source);
  std::vector<ff::SnapshotFile> snaps;
  if (dir_source) {
    snaps = ff::read_snapshot_dir(o.source);
    grid = snaps.front().grid;
    for (const auto& s : snaps)
      if (!same_grid(s.grid, grid))
        throw ff::ValidationError("snapshots in " + o.source +
                                  " use different grids");
    const ff::Domain3& d = sol.domain;
    const double xt = 1e-9 * (1.0 + std::abs(d.x_max - d.x_min));
    const double gx1 = grid.x(grid.nx - 1), gy1 = grid.y(grid.ny - 1);
    if (grid.x0 < d.x_min - xt || gx1 > d.x_max + xt || grid.y0 < d.y_min - xt ||
        gy1 > d.y_max + xt)
      throw ff::ValidationError(
          "snapshot grid box " + box_string(grid.x0, gx1, grid.y0, gy1) +
          " is not covered by the solution domain " +
          box_string(d.x_min, d.x_max, d.y_min, d.y_max));

    auto find_snap = [&snaps](double t) -> const ff::SnapshotFile& {
      for (const auto& s : snaps)
        if (std::abs(s.time - t) <= 1e-6 * std::max(1.0, std::abs(t))) return s;
      throw ff::ValidationError("no snapshot at time " + fmt(t));
    };
    if (o.times.empty())
      for (const auto& s : snaps) times.push_back(s.time);
    else {
      times = o.times;
      for (double t : times) find_snap(t);  // fail early on missing times
    }
    check_time_cover(times, sol.domain, "solution's trained");
    source_a = [find_snap](double t, const ff::Grid2&) {
      return find_snap(t).field;
    };
    source_b = [&sol](double t, const ff::Grid2& gq) {
      return ff::evaluate(sol, t, gq);
    };
  } else {
    ff::LevelSetSolution other = ff::load_solution_file(o.source);
    const ff::Domain3 &da = sol.domain, &db = other.domain;
    const double tol = 1e-9 * (1.0 + std::abs(da.x_max - da.x_min));
    if (std::abs(da.x_min - db.x_min) > tol || std::abs(da.x_max - db.x_max) > tol ||
        std::abs(da.y_min - db.y_min) > tol || std::abs(da.y_max - db.y_max) > tol)
      throw ff::ValidationError(
          "solution domains differ: " +
          box_string(da.x_min, da.x_max, da.y_min, da.y_max) + " vs " +
          box_string(db.x_min, db.x_max, db.y_min, db.y_max));
    if (o.times.empty())
      throw ff::ValidationError("--times is required when comparing two solutions");
    times = o.times;
    check_time_cover(times, da, "first solution's trained");
    check_time_cover(times, db, "second solution's trained");
    grid = ff::make_grid(da.x_min, da.x_max, da.y_min, da.y_max, o.nx, o.ny);
    source_a = [&sol](double t, const ff::Grid2& gq) {
      return ff::evaluate(sol, t, gq);
    };
    // moved into the closure: `other` is block-local but compare_series
    // runs after this block ends
    source_b = [other = std::move(other)](double t, const ff::Grid2& gq) {
      return ff::evaluate(other, t, gq);
    };
  }

  const auto t0 = std::chrono::steady_clock::now();
  const ff::MetricsSeries ms = ff::compare_series(source_a, source_b, times, grid, norm);
  const double compare_s = seconds_since(t0);

  ff::write_metrics_csv(ff::path_join(g.out_dir, "metrics.csv"), ms);
  ff::write_file(ff::path_join(g.out_dir, "metrics.json"), ff::metrics_json(ms));

  ff::RunManifest m;
  m.command = "compare";
  m.scenario_path = o.solution + " | " + o.source;
  m.scenario_hash = sol.scenario_hash;
  m.seed = g.seed;
  m.threads = effective_threads();
  m.config["norm"] = o.norm;
  m.config["nx"] = std::to_string(grid.nx);
  m.config["ny"] = std::to_string(grid.ny);
  m.artifacts = {"metrics.csv", "metrics.json"};
  m.timings_s["compare"] = compare_s;
  ff::write_manifest(g.out_dir, m);

  for (const auto& e : ms) {
    if (e.valid)
      std::printf("t=%-10g d_H=%.6g normalized=%.6g\n", e.time, e.hausdorff,
                  e.norm_area);
    else
      std::printf("t=%-10g (no front on one side)\n", e.time);
  }
}

// --- forensic ---

struct ForensicOpts {
  std::string solution;
  std::vector<double> times;
  int nx = 201, ny = 201;
};

void cmd_forensic(const GlobalOpts& g, ForensicOpts o) {
  const ff::LevelSetSolution sol = ff::load_solution_file(o.solution);
  prepare_out_dir(g.out_dir);
  if (o.times.empty()) throw ff::ValidationError("at least one time is required");
  const ff::Domain3& d = sol.domain;
  const ff::Grid2 grid = ff::make_grid(d.x_min, d.x_max, d.y_min, d.y_max, o.nx, o.ny);

  ff::RunManifest m;
  m.command = "forensic";
  m.scenario_path = o.solution;
  m.scenario_hash = sol.scenario_hash;
  m.seed = g.seed;
  m.threads = effective_threads();
  m.config["nx"] = std::to_string(o.nx);
  m.config["ny"] = std::to_string(o.ny);

  const auto t0 = std::chrono::steady_clock::now();
  for (std::size_t i = 0; i < o.times.size(); ++i) {
    const ff::Extrapolation ex = ff::extrapolate(sol, o.times[i], grid);
    char name[64];
    std::snprintf(name, sizeof name, "forensic_%03zu.csv", i);
    ff::write_snapshot_csv(ff::path_join(g.out_dir, name), o.times[i], ex.field,
                           grid);
    m.artifacts.push_back(name);
    if (ex.max_abs > 20.0)
      std::fprintf(stderr,
                   "warning: |psi| reaches %.3g at t=%g, outside the trusted "
                   "(-20, 20) range\n",
                   ex.max_abs, o.times[i]);
    if (ex.beyond > 0)
      std::printf("t=%g lies %.6g s outside the trained window\n", o.times[i],
                  ex.beyond);
  }
  m.timings_s["forensic"] = seconds_since(t0);
  ff::write_manifest(g.out_dir, m);
}

// --- euler-study ---

struct EulerOpts {
  std::string config;
  bool serial = false;
};

void cmd_euler_study(const GlobalOpts& g, EulerOpts o) {
  const std::string text = ff::read_file(o.config);
  ff::EulerStudyConfig cfg = ff::load_euler_config(text);
  if (g.seed_given) cfg.seed = g.seed;
  cfg.parallel = !o.serial;
  prepare_out_dir(g.out_dir);

  const auto t0 = std::chrono::steady_clock::now();
  const ff::EulerStudyResult res = ff::convergence_study(cfg);
  const double study_s = seconds_since(t0);

  ff::write_loss_csv(ff::path_join(g.out_dir, "euler_history.csv"), res.history);

  nlohmann::json verdict;
  verdict["converged"] = res.converged;
  verdict["initial_window_mean"] = res.initial_window_mean;
  verdict["final_window_mean"] = res.final_window_mean;
  verdict["reduction_factor"] = res.final_window_mean > 0
                                    ? res.initial_window_mean / res.final_window_mean
                                    : std::numeric_limits<double>::infinity();
  verdict["reduction_target"] = cfg.reduction_target;
  verdict["iterations"] = cfg.iterations;
  verdict["window"] = cfg.window;
  verdict["moist"] = cfg.moist;
  ff::write_file(ff::path_join(g.out_dir, "euler_verdict.json"),
                 verdict.dump(2) + "\n");

  ff::RunManifest m;
  m.command = "euler-study";
  m.scenario_path = o.config;
  m.scenario_hash = ff::fnv1a_hex(text);
  m.seed = cfg.seed;
  m.threads = effective_threads();
  m.config["iterations"] = std::to_string(cfg.iterations);
  m.config["interior_batch"] = std::to_string(cfg.interior_batch);
  m.config["initial_batch"] = std::to_string(cfg.initial_batch);
  m.config["learning_rate"] = fmt(cfg.learning_rate);
  m.config["final_learning_rate"] = fmt(cfg.final_learning_rate);
  m.config["ic_weight"] = fmt(cfg.ic_weight);
  m.config["perturb_amplitude"] = fmt(cfg.perturb_amplitude);
  m.config["hidden"] = join_ints(cfg.hidden);
  m.config["moist"] = cfg.moist ? "1" : "0";
  m.config["window"] = std::to_string(cfg.window);
  m.config["reduction_target"] = fmt(cfg.reduction_target);
  m.artifacts = {"euler_history.csv", "euler_verdict.json"};
  m.timings_s["study"] = study_s;
  ff::write_manifest(g.out_dir, m);

  std::printf("loss %.6e -> %.6e (%s %.1fx reduction) in %.1f s\n",
              res.initial_window_mean, res.final_window_mean,
              res.converged ? "converged," : "NOT converged,",
              res.final_window_mean > 0
                  ? res.initial_window_mean / res.final_window_mean
                  : std::numeric_limits<double>::infinity(),
              study_s);
}

// --- bench ---

struct BenchOpts {
  std::string scenario;
  int iterations = 200;
  int nx = 201, ny = 201;
  int snapshots = 5;
  bool serial = false;
};

void cmd_bench(const GlobalOpts& g, BenchOpts o) {
  const LoadedScenario L = load_scenario_hashed(o.scenario);
  prepare_out_dir(g.out_dir);

  ff::TrainingConfig cfg;
  cfg.iterations = o.iterations;
  cfg.seed = g.seed;
  cfg.parallel = !o.serial;

  auto t0 = std::chrono::steady_clock::now();
  const ff::LevelSetSolution sol = ff::train(L.sc, cfg);
  const double train_s = seconds_since(t0);

  const ff::ScaledBox box = L.sc.scaled_box();
  const ff::Grid2 grid_scaled = ff::make_grid(0.0, box.x_hi, 0.0, box.y_hi, o.nx, o.ny);
  std::vector<double> times_scaled;
  for (int i = 1; i <= o.snapshots; ++i)
    times_scaled.push_back(box.t_hi * i / o.snapshots);

  long long steps = 0;
  ff::SolveOptions opt;
  opt.parallel = !o.serial;
  opt.steps_taken = &steps;
  t0 = std::chrono::steady_clock::now();
  ff::solve(L.sc, grid_scaled, times_scaled, opt);
  const double solve_s = seconds_since(t0);

  nlohmann::json rep;
  rep["command"] = "bench";
  rep["scenario"] = L.path;
  rep["scenario_hash"] = L.hash;
  rep["seed"] = g.seed;
  rep["threads"] = effective_threads();
  rep["build_profile"] = build_profile();
  rep["train"]["iterations"] = o.iterations;
  rep["train"]["seconds"] = train_s;
  rep["train"]["per_iteration_us"] = 1e6 * train_s / o.iterations;
  rep["train"]["final_loss"] = sol.loss_history.back();
  rep["classical"]["grid"] = {o.nx, o.ny};
  rep["classical"]["steps"] = steps;
  rep["classical"]["seconds"] = solve_s;
  rep["classical"]["per_step_us"] = steps > 0 ? 1e6 * solve_s / steps : 0.0;
  ff::write_file(ff::path_join(g.out_dir, "bench.json"), rep.dump(2) + "\n");

  ff::RunManifest m;
  m.command = "bench";
  m.scenario_path = L.path;
  m.scenario_hash = L.hash;
  m.seed = g.seed;
  m.threads = effective_threads();
  m.config["iterations"] = std::to_string(o.iterations);
  m.config["nx"] = std::to_string(o.nx);
  m.config["ny"] = std::to_string(o.ny);
  m.config["snapshots"] = std::to_string(o.snapshots);
  m.artifacts = {"bench.json"};
  m.timings_s["train"] = train_s;
  m.timings_s["solve"] = solve_s;
  ff::write_manifest(g.out_dir, m);

  std::printf("train %.2f s (%d iterations, %.0f us/iter); classical %.2f s "
              "(%lld steps)\n",
              train_s, o.iterations, 1e6 * train_s / o.iterations, solve_s, steps);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Wildfire level-set solver: neural surrogate + classical scheme"};
  app.require_subcommand(1);
  app.fallthrough();

  GlobalOpts g;
  app.add_option("--seed", g.seed, "RNG seed (echoed in manifests)")
      ->capture_default_str();
  app.add_option("--threads", g.threads, "cap worker threads (0 = default)")
      ->capture_default_str();
  app.add_option("--out-dir", g.out_dir, "directory for artifacts")
      ->capture_default_str();

  TrainOpts tr;
  CLI::App* train = app.add_subcommand("train", "train a level-set surrogate");
  train->add_option("scenario", tr.scenario, "scenario file")->required();
  train->add_option("--iterations", tr.cfg.iterations)->capture_default_str();
  train->add_option("--learning-rate,--lr", tr.cfg.learning_rate)
      ->capture_default_str();
  train->add_option("--final-learning-rate", tr.cfg.final_learning_rate,
                    "linear decay target (< 0 keeps the rate constant)")
      ->capture_default_str();
  train->add_option("--interior-batch", tr.cfg.interior_batch)->capture_default_str();
  train->add_option("--boundary-batch", tr.cfg.boundary_batch)->capture_default_str();
  train->add_option("--pde-weight", tr.cfg.pde_weight)->capture_default_str();
  train->add_option("--bc-weight", tr.cfg.bc_weight)->capture_default_str();
  train->add_option("--grad-reg", tr.cfg.grad_reg)->capture_default_str();
  train->add_option("--hidden", tr.cfg.hidden, "hidden layer sizes")
      ->delimiter(',')
      ->capture_default_str();
  train->add_flag("--grid-sampling", tr.cfg.grid_sampling,
                  "draw collocation points from the training lattice");
  train->add_option("--mesh-dt", tr.cfg.mesh_spacing[0])->capture_default_str();
  train->add_option("--mesh-dx", tr.cfg.mesh_spacing[1])->capture_default_str();
  train->add_option("--mesh-dy", tr.cfg.mesh_spacing[2])->capture_default_str();
  train->add_option("--progress-every", tr.progress_every, "0 silences progress")
      ->capture_default_str();
  train->add_flag("--serial", tr.serial, "single-thread reference path");

  SimulateOpts sim;
  CLI::App* simulate =
      app.add_subcommand("simulate", "run the classical finite-difference solver");
  simulate->add_option("scenario", sim.scenario, "scenario file")->required();
  simulate->add_option("--times", sim.times, "physical output times (s)")
      ->required()
      ->delimiter(',');
  simulate->add_option("--nx", sim.nx)->capture_default_str();
  simulate->add_option("--ny", sim.ny)->capture_default_str();
  simulate->add_option("--cfl", sim.cfl)->capture_default_str();
  simulate->add_flag("--serial", sim.serial, "single-thread reference path");

  CompareOpts cmp;
  CLI::App* compare = app.add_subcommand(
      "compare", "front-error series between a solution and a reference");
  compare->add_option("solution", cmp.solution, "trained solution file")->required();
  compare->add_option("source", cmp.source,
                      "snapshot directory or second solution file")
      ->required();
  compare->add_option("--times", cmp.times, "physical times (default: all snapshots)")
      ->delimiter(',');
  compare->add_option("--nx", cmp.nx)->capture_default_str();
  compare->add_option("--ny", cmp.ny)->capture_default_str();
  compare->add_option("--norm", cmp.norm, "sqrt_area or area")
      ->check(CLI::IsMember({"sqrt_area", "area"}))
      ->capture_default_str();

  ForensicOpts fo;
  CLI::App* forensic = app.add_subcommand(
      "forensic", "evaluate a solution outside its training window");
  forensic->add_option("solution", fo.solution, "trained solution file")->required();
  forensic->add_option("--times", fo.times, "physical times, any")->required()->delimiter(',');
  forensic->add_option("--nx", fo.nx)->capture_default_str();
  forensic->add_option("--ny", fo.ny)->capture_default_str();

  EulerOpts eu;
  CLI::App* euler =
      app.add_subcommand("euler-study", "atmospheric-system convergence study");
  euler->add_option("config", eu.config, "study config file")->required();
  euler->add_flag("--serial", eu.serial, "single-thread reference path");

  BenchOpts be;
  CLI::App* bench = app.add_subcommand("bench", "timing report (train + classical)");
  bench->add_option("scenario", be.scenario, "scenario file")->required();
  bench->add_option("--iterations", be.iterations)->capture_default_str();
  bench->add_option("--nx", be.nx)->capture_default_str();
  bench->add_option("--ny", be.ny)->capture_default_str();
  bench->add_option("--snapshots", be.snapshots)->capture_default_str();
  bench->add_flag("--serial", be.serial, "single-thread reference path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  g.seed_given = app.count("--seed") > 0;
  if (g.threads > 0) omp_set_num_threads(g.threads);

  try {
    if (train->parsed()) cmd_train(g, tr);
    if (simulate->parsed()) cmd_simulate(g, sim);
    if (compare->parsed()) cmd_compare(g, cmp);
    if (forensic->parsed()) cmd_forensic(g, fo);
    if (euler->parsed()) cmd_euler_study(g, eu);
    if (bench->parsed()) cmd_bench(g, be);
  } catch (const ff::DivergenceError& e) {
    if (e.iteration >= 0)
      std::fprintf(stderr, "error: %s (iteration %lld)\n", e.what(), e.iteration);
    else
      std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const ff::IoError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  } catch (const ff::ValidationError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
