#include "firefront/pinn.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "firefront/dual.hpp"
#include "firefront/io.hpp"
#include "firefront/spread.hpp"

namespace firefront {

void TrainingConfig::validate() const {
  if (iterations <= 0) throw ValidationError("iterations must be positive");
  if (interior_batch <= 0 || boundary_batch <= 0)
    throw ValidationError("batch sizes must be positive");
  if (!(learning_rate > 0)) throw ValidationError("learning rate must be positive");
  if (final_learning_rate >= 0 && !(final_learning_rate > 0))
    throw ValidationError("final learning rate must be positive when set");
  if (pde_weight < 0 || bc_weight < 0)
    throw ValidationError("loss weights must be >= 0");
  if (grad_reg < 0) throw ValidationError("gradient regularizer must be >= 0");
  for (double h : mesh_spacing)
    if (!(h > 0)) throw ValidationError("mesh spacings must be positive");
  for (int n : hidden)
    if (n < 1) throw ValidationError("hidden layer sizes must be positive");
}

// --- sampling ---

namespace {

constexpr std::uint64_t kSampleSalt = 0x9e3779b97f4a7c15ull;

/// Splits `total` across `strata` parts, first (total % strata) parts get the
/// extra point.
int stratum_count(int total, int strata, int s) {
  return total / strata + (s < total % strata ? 1 : 0);
}

double draw_uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

/// Lattice coordinate drawn uniformly from the index range covering
/// [half ? mid+1, n-1 : 0, mid] where mid splits the lattice in two.
double draw_lattice(std::mt19937_64& rng, double spacing, int n, bool upper) {
  const int mid = (n - 1) / 2;
  const int lo = upper ? std::min(mid + 1, n - 1) : 0;
  const int hi = upper ? n - 1 : mid;
  return spacing * std::uniform_int_distribution<int>(lo, hi)(rng);
}

int lattice_nodes(double hi, double spacing) {
  return std::max(2, static_cast<int>(std::floor(hi / spacing)) + 1);
}

}  // namespace

SampleBatches sample_batches(const TrainingConfig& cfg, const ScaledBox& box,
                             std::mt19937_64& rng) {
  SampleBatches out;
  out.n_interior = cfg.interior_batch;
  out.n_boundary = cfg.boundary_batch;
  out.interior.reserve(3 * cfg.interior_batch);
  out.boundary.reserve(3 * cfg.boundary_batch);

  const double mid_t = 0.5 * box.t_hi, mid_x = 0.5 * box.x_hi, mid_y = 0.5 * box.y_hi;
  const int nt = lattice_nodes(box.t_hi, cfg.mesh_spacing[0]);
  const int nx = lattice_nodes(box.x_hi, cfg.mesh_spacing[1]);
  const int ny = lattice_nodes(box.y_hi, cfg.mesh_spacing[2]);

  for (int o = 0; o < 8; ++o) {
    const bool upper_t = o & 1, upper_x = o & 2, upper_y = o & 4;
    const int count = stratum_count(cfg.interior_batch, 8, o);
    for (int k = 0; k < count; ++k) {
      double t, x, y;
      if (cfg.grid_sampling) {
        t = draw_lattice(rng, cfg.mesh_spacing[0], nt, upper_t);
        x = draw_lattice(rng, cfg.mesh_spacing[1], nx, upper_x);
        y = draw_lattice(rng, cfg.mesh_spacing[2], ny, upper_y);
      } else {
        t = draw_uniform(rng, upper_t ? mid_t : 0.0, upper_t ? box.t_hi : mid_t);
        x = draw_uniform(rng, upper_x ? mid_x : 0.0, upper_x ? box.x_hi : mid_x);
        y = draw_uniform(rng, upper_y ? mid_y : 0.0, upper_y ? box.y_hi : mid_y);
      }
      out.interior.insert(out.interior.end(), {t, x, y});
    }
  }

  for (int q = 0; q < 4; ++q) {
    const bool upper_x = q & 1, upper_y = q & 2;
    const int count = stratum_count(cfg.boundary_batch, 4, q);
    for (int k = 0; k < count; ++k) {
      double x, y;
      if (cfg.grid_sampling) {
        x = draw_lattice(rng, cfg.mesh_spacing[1], nx, upper_x);
        y = draw_lattice(rng, cfg.mesh_spacing[2], ny, upper_y);
      } else {
        x = draw_uniform(rng, upper_x ? mid_x : 0.0, upper_x ? box.x_hi : mid_x);
        y = draw_uniform(rng, upper_y ? mid_y : 0.0, upper_y ? box.y_hi : mid_y);
      }
      out.boundary.insert(out.boundary.end(), {0.0, x, y});
    }
  }
  return out;
}

// --- residual and loss ---

namespace {

struct ResidualEval {
  double r = 0.0;
  std::array<double, 3> dr_djac{};  // d r / d (u_t, u_x, u_y)
  bool finite = true;
};

const DerivPlan kInteriorPlan{3, {}};
const DerivPlan kBoundaryPlan{0, {}};

ResidualEval residual_eval(const DenseNet& net, const ScenarioConfig& sc,
                           const double* pt, double grad_reg, EvalWorkspace& ws) {
  eval_point(net, {pt, 3}, kInteriorPlan, ws);
  using D3 = Dual<3>;
  const D3 gt = D3::seeded(ws.jac(0, 0), 0);
  const D3 gx = D3::seeded(ws.jac(0, 1), 1);
  const D3 gy = D3::seeded(ws.jac(0, 2), 2);

  const D3 s = scaled_spread(sc, pt[0], pt[1], pt[2], gx, gy);
  const D3 q = sqrt(gx * gx + gy * gy + D3(grad_reg * grad_reg));
  const D3 r = gt + s * q;

  ResidualEval out;
  out.r = r.v;
  out.dr_djac = r.d;
  out.finite = std::isfinite(r.v) && std::isfinite(r.d[0]) &&
               std::isfinite(r.d[1]) && std::isfinite(r.d[2]);
  return out;
}

constexpr int kBlock = 64;

struct BadPoint {
  int found = 0;  // 1 = residual, 2 = boundary value
  double pt[3] = {0, 0, 0};
};

LossBreakdown loss_impl(const DenseNet& net, const ScenarioConfig& sc,
                        const TrainingConfig& cfg, const SampleBatches& batches,
                        std::span<double> grad, bool with_grad, bool parallel) {
  const int n_int = batches.n_interior;
  const int n_bc = batches.n_boundary;
  if (static_cast<int>(batches.interior.size()) != 3 * n_int ||
      static_cast<int>(batches.boundary.size()) != 3 * n_bc)
    throw ValidationError("batch buffers do not match their point counts");
  const std::size_t n_params = net.param_count();
  if (with_grad && grad.size() != n_params)
    throw ValidationError("gradient buffer has wrong length");

  const int blocks_int = (n_int + kBlock - 1) / kBlock;
  const int blocks_bc = (n_bc + kBlock - 1) / kBlock;
  const int blocks = blocks_int + blocks_bc;

  std::vector<double> block_grad(with_grad ? static_cast<std::size_t>(blocks) * n_params : 0,
                                 0.0);
  std::vector<double> block_sq(blocks, 0.0);
  std::vector<BadPoint> block_bad(blocks);

  const double int_coeff = 2.0 * cfg.pde_weight / n_int;
  const double bc_coeff = 2.0 * cfg.bc_weight / n_bc;

#pragma omp parallel for schedule(static) if (parallel)
  for (int blk = 0; blk < blocks; ++blk) {
    EvalWorkspace ws;
    SeedAdjoints seeds;
    std::span<double> g;
    if (with_grad)
      g = std::span<double>(block_grad.data() + static_cast<std::size_t>(blk) * n_params,
                            n_params);

    if (blk < blocks_int) {
      seeds.resize(net.output_dim(), 3, 0);
      const int lo = blk * kBlock, hi = std::min(n_int, lo + kBlock);
      double sq = 0.0;
      for (int k = lo; k < hi; ++k) {
        const double* pt = batches.interior.data() + 3 * k;
        const ResidualEval res = residual_eval(net, sc, pt, cfg.grad_reg, ws);
        if (!res.finite) {
          if (!block_bad[blk].found) {
            block_bad[blk].found = 1;
            std::copy(pt, pt + 3, block_bad[blk].pt);
          }
          continue;
        }
        sq += res.r * res.r;
        if (with_grad) {
          seeds.zero();
          for (int i = 0; i < 3; ++i)
            seeds.wrt_jac[i] = int_coeff * res.r * res.dr_djac[i];
          backward_params(net, ws, seeds, g);
        }
      }
      block_sq[blk] = sq;
    } else {
      seeds.resize(net.output_dim(), 0, 0);
      const int b = blk - blocks_int;
      const int lo = b * kBlock, hi = std::min(n_bc, lo + kBlock);
      double sq = 0.0;
      for (int k = lo; k < hi; ++k) {
        const double* pt = batches.boundary.data() + 3 * k;
        eval_point(net, {pt, 3}, kBoundaryPlan, ws);
        const double target = initial_levelset(sc.ignition, pt[1], pt[2]);
        const double diff = ws.out(0) - target;
        if (!std::isfinite(diff)) {
          if (!block_bad[blk].found) {
            block_bad[blk].found = 2;
            std::copy(pt, pt + 3, block_bad[blk].pt);
          }
          continue;
        }
        sq += diff * diff;
        if (with_grad) {
          seeds.wrt_out[0] = bc_coeff * diff;
          backward_params(net, ws, seeds, g);
        }
      }
      block_sq[blk] = sq;
    }
  }

  for (int blk = 0; blk < blocks; ++blk) {
    if (block_bad[blk].found) {
      const auto& bp = block_bad[blk];
      std::ostringstream msg;
      msg << (bp.found == 1 ? "non-finite residual" : "non-finite boundary value")
          << " at scaled point (" << bp.pt[0] << ", " << bp.pt[1] << ", "
          << bp.pt[2] << ")";
      throw DivergenceError(msg.str(), -1);
    }
  }

  // fixed-order combination: independent of thread count
  LossBreakdown out;
  double pde_sum = 0.0, bc_sum = 0.0;
  for (int blk = 0; blk < blocks_int; ++blk) pde_sum += block_sq[blk];
  for (int blk = blocks_int; blk < blocks; ++blk) bc_sum += block_sq[blk];
  if (with_grad) {
    std::fill(grad.begin(), grad.end(), 0.0);
    for (int blk = 0; blk < blocks; ++blk) {
      const double* src = block_grad.data() + static_cast<std::size_t>(blk) * n_params;
      for (std::size_t p = 0; p < n_params; ++p) grad[p] += src[p];
    }
  }
  out.pde = pde_sum / n_int;
  out.bc = bc_sum / n_bc;
  out.total = cfg.pde_weight * out.pde + cfg.bc_weight * out.bc;
  return out;
}

}  // namespace

double pde_residual(const DenseNet& net, const ScenarioConfig& sc,
                    std::span<const double> pt, double grad_reg, EvalWorkspace& ws) {
  if (pt.size() != 3) throw ValidationError("collocation point must be (t, x, y)");
  const ResidualEval res = residual_eval(net, sc, pt.data(), grad_reg, ws);
  if (!res.finite) {
    std::ostringstream msg;
    msg << "non-finite residual at scaled point (" << pt[0] << ", " << pt[1]
        << ", " << pt[2] << ")";
    throw DivergenceError(msg.str(), -1);
  }
  return res.r;
}

LossBreakdown total_loss(const DenseNet& net, const ScenarioConfig& sc,
                         const TrainingConfig& cfg, const SampleBatches& batches) {
  return loss_impl(net, sc, cfg, batches, {}, false, cfg.parallel);
}

LossBreakdown loss_and_grad(const DenseNet& net, const ScenarioConfig& sc,
                            const TrainingConfig& cfg, const SampleBatches& batches,
                            std::span<double> grad) {
  return loss_impl(net, sc, cfg, batches, grad, true, true);
}

LossBreakdown loss_and_grad_serial(const DenseNet& net, const ScenarioConfig& sc,
                                   const TrainingConfig& cfg,
                                   const SampleBatches& batches,
                                   std::span<double> grad) {
  return loss_impl(net, sc, cfg, batches, grad, true, false);
}

// --- training ---

LevelSetSolution train(const ScenarioConfig& sc, const TrainingConfig& cfg,
                       const ProgressFn& progress) {
  cfg.validate();
  sc.validate();

  std::vector<int> sizes;
  sizes.push_back(3);
  for (int h : cfg.hidden) sizes.push_back(h);
  sizes.push_back(1);

  LevelSetSolution sol;
  sol.net = DenseNet::init_uniform(sizes, cfg.seed);
  sol.scaling = sc.scaling;
  sol.domain = sc.domain;
  sol.loss_history.reserve(cfg.iterations);

  const ScaledBox box = sc.scaled_box();
  std::mt19937_64 rng(cfg.seed ^ kSampleSalt);
  AdamState adam;
  AdamParams hp;
  std::vector<double> grad(sol.net.param_count());

  for (int it = 0; it < cfg.iterations; ++it) {
    const SampleBatches batches = sample_batches(cfg, box, rng);
    const LossBreakdown loss =
        loss_impl(sol.net, sc, cfg, batches, grad, true, cfg.parallel);
    sol.loss_history.push_back(loss.total);
    if (!std::isfinite(loss.total))
      throw DivergenceError("training loss became non-finite", it);

    if (cfg.final_learning_rate >= 0 && cfg.iterations > 1) {
      const double f = static_cast<double>(it) / (cfg.iterations - 1);
      hp.lr = cfg.learning_rate +
              f * (cfg.final_learning_rate - cfg.learning_rate);
    } else {
      hp.lr = cfg.learning_rate;
    }
    adam_step(sol.net.params(), grad, adam, hp);
    if (progress) progress(it, loss);
  }
  return sol;
}

// --- evaluation ---

namespace {

ScalarField2 eval_grid(const LevelSetSolution& sol, double t_phys, const Grid2& g) {
  ScalarField2 f(std::max(g.nx, 1), std::max(g.ny, 1));
  EvalWorkspace ws;
  const DerivPlan plan{};
  double in[3];
  for (int j = 0; j < f.ny; ++j)
    for (int i = 0; i < f.nx; ++i) {
      const auto p = sol.scaling.scale(t_phys, g.x(i), g.y(j));
      in[0] = p[0];
      in[1] = p[1];
      in[2] = p[2];
      eval_point(sol.net, {in, 3}, plan, ws);
      f.at(i, j) = ws.out(0);
    }
  return f;
}

}  // namespace

ScalarField2 evaluate(const LevelSetSolution& sol, double t_phys, const Grid2& g) {
  // No guard on t: the surrogate is defined everywhere, and forensic use
  // queries it outside the training window on purpose.
  return eval_grid(sol, t_phys, g);
}

Extrapolation extrapolate(const LevelSetSolution& sol, double t_phys, const Grid2& g) {
  Extrapolation out;
  out.field = eval_grid(sol, t_phys, g);
  if (t_phys < sol.domain.t_min)
    out.beyond = sol.domain.t_min - t_phys;
  else if (t_phys > sol.domain.t_max)
    out.beyond = t_phys - sol.domain.t_max;
  for (double v : out.field.v) out.max_abs = std::max(out.max_abs, std::abs(v));
  return out;
}

// --- solution files ---

void save_solution(const LevelSetSolution& sol, std::ostream& os) {
  os << "levelset-solution 1\n";
  os << "scenario_hash " << (sol.scenario_hash.empty() ? "-" : sol.scenario_hash)
     << "\n";
  os << "domain " << format_double(sol.domain.t_min) << ' '
     << format_double(sol.domain.t_max) << ' ' << format_double(sol.domain.x_min)
     << ' ' << format_double(sol.domain.x_max) << ' '
     << format_double(sol.domain.y_min) << ' ' << format_double(sol.domain.y_max)
     << "\n";
  os << "scaling " << format_double(sol.scaling.t.offset) << ' '
     << format_double(sol.scaling.t.factor) << ' '
     << format_double(sol.scaling.x.offset) << ' '
     << format_double(sol.scaling.x.factor) << ' '
     << format_double(sol.scaling.y.offset) << ' '
     << format_double(sol.scaling.y.factor) << "\n";
  os << "loss_history " << sol.loss_history.size() << "\n";
  for (double v : sol.loss_history) os << format_double(v) << "\n";
  save_net(sol.net, os);
}

LevelSetSolution load_solution(std::istream& is) {
  LevelSetSolution sol;
  std::string word;
  int version = 0;
  if (!(is >> word >> version) || word != "levelset-solution" || version != 1)
    throw ParseError("not a level-set solution file");
  if (!(is >> word >> sol.scenario_hash) || word != "scenario_hash")
    throw ParseError("solution: expected scenario_hash");
  if (sol.scenario_hash == "-") sol.scenario_hash.clear();

  auto read_num = [&](const char* what) {
    if (!(is >> word)) throw ParseError(std::string("solution: truncated ") + what);
    return parse_double(word, what);
  };
  if (!(is >> word) || word != "domain") throw ParseError("solution: expected domain");
  sol.domain.t_min = read_num("domain");
  sol.domain.t_max = read_num("domain");
  sol.domain.x_min = read_num("domain");
  sol.domain.x_max = read_num("domain");
  sol.domain.y_min = read_num("domain");
  sol.domain.y_max = read_num("domain");
  if (!(is >> word) || word != "scaling") throw ParseError("solution: expected scaling");
  sol.scaling.t.offset = read_num("scaling");
  sol.scaling.t.factor = read_num("scaling");
  sol.scaling.x.offset = read_num("scaling");
  sol.scaling.x.factor = read_num("scaling");
  sol.scaling.y.offset = read_num("scaling");
  sol.scaling.y.factor = read_num("scaling");
  std::size_t n = 0;
  if (!(is >> word >> n) || word != "loss_history")
    throw ParseError("solution: expected loss_history");
  sol.loss_history.resize(n);
  for (std::size_t i = 0; i < n; ++i) sol.loss_history[i] = read_num("loss value");
  sol.net = load_net(is);
  return sol;
}

void save_solution_file(const LevelSetSolution& sol, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open for writing: " + path);
  save_solution(sol, os);
  os.flush();
  if (!os) throw IoError("write failed: " + path);
}

LevelSetSolution load_solution_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open for reading: " + path);
  return load_solution(is);
}

}  // namespace firefront
