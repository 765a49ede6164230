#include "firefront/euler.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include "firefront/io.hpp"
#include "firefront/scenario.hpp"

namespace firefront {

void EulerStudyConfig::validate() const {
  if (iterations <= 0) throw ValidationError("iterations must be positive");
  if (interior_batch <= 0 || initial_batch <= 0)
    throw ValidationError("batch sizes must be positive");
  if (!(learning_rate > 0)) throw ValidationError("learning rate must be positive");
  if (final_learning_rate >= 0 && !(final_learning_rate > 0))
    throw ValidationError("final learning rate must be positive when set");
  if (ic_weight < 0) throw ValidationError("initial-condition weight must be >= 0");
  if (perturb_amplitude < 0)
    throw ValidationError("perturbation amplitude must be >= 0");
  if (!(t_max > 0) || !(x_max > 0) || !(y_max > 0))
    throw ValidationError("domain extents must be positive");
  if (!(reduction_target > 0))
    throw ValidationError("reduction target must be positive");
  if (window < 1) throw ValidationError("window must be at least 1");
  if (2 * window > iterations)
    throw ValidationError("two loss windows must fit into the iteration count");
  for (int n : hidden)
    if (n < 1) throw ValidationError("hidden layer sizes must be positive");
}

EulerDiagnostics diagnostics(const EulerState& s, const EulerConstants& c,
                             bool moist) {
  EulerDiagnostics d;
  const double mu = s.val[FMU];
  if (!(mu > 0)) throw ValidationError("column mass must be positive");
  d.theta_m = s.val[FTHETA] / mu;
  d.alpha_d = -s.d1[FPHI][DETA] / mu;
  if (!(d.alpha_d > kAlphaFloor))
    throw ValidationError("dry specific volume is not positive");
  if (!(d.theta_m > kAlphaFloor))
    throw ValidationError("potential temperature is not positive");
  d.alpha = d.alpha_d;
  if (moist) d.alpha = d.alpha_d / (1.0 + s.val[FQM] / mu);
  d.p = c.p0 * std::pow(c.rd * d.theta_m / (c.p0 * d.alpha_d), c.gamma);
  return d;
}

// --- hydrostatic reference column ---

double BaseState::theta_m(const EulerConstants& c) const {
  return alpha_top * c.p0 * std::pow(p_top / c.p0, 1.0 / c.gamma) / c.rd;
}

double BaseState::alpha_d(double eta, const EulerConstants& c) const {
  // isentropic: alpha ~ p^{-1/gamma}, anchored at the column top
  return alpha_top * std::pow(p_top / pressure(eta), 1.0 / c.gamma);
}

double BaseState::phi(double eta, const EulerConstants& c) const {
  // exact integral of -mu0 * alpha_d with phi(1) = 0
  const double ex = 1.0 - 1.0 / c.gamma;
  const double k = alpha_top * std::pow(p_top, 1.0 / c.gamma) / ex;
  return k * (std::pow(pressure(1.0), ex) - std::pow(pressure(eta), ex));
}

EulerState BaseState::state_at(double x, double y, double eta,
                               const EulerConstants& c) const {
  (void)x;
  (void)y;
  EulerState s{};
  const double ad = alpha_d(eta, c);
  s.val[FTHETA] = mu0 * theta_m(c);
  s.val[FPHI] = phi(eta, c);
  s.val[FMU] = mu0;
  s.d1[FPHI][DETA] = -mu0 * ad;
  s.phi2[2] = mu0 * mu0 * ad / (c.gamma * pressure(eta));
  return s;
}

std::array<double, kEulerFields> study_targets(const BaseState& base,
                                               const EulerStudyConfig& cfg,
                                               const EulerConstants& c, double x,
                                               double y, double eta) {
  std::array<double, kEulerFields> t{};
  const double xh = x / cfg.x_max, yh = y / cfg.y_max;
  const double bump = 16.0 * xh * (1.0 - xh) * yh * (1.0 - yh);
  t[FTHETA] = base.mu0 * base.theta_m(c) * (1.0 + cfg.perturb_amplitude * bump);
  t[FPHI] = base.phi(eta, c);
  t[FMU] = base.mu0;
  return t;
}

// --- network state extraction ---

void euler_state_from_net(const DenseNet& net, std::span<const double> txye,
                          bool moist, EvalWorkspace& ws, EulerState& raw) {
  const int m = moist ? kEulerFields : kEulerFields - 1;
  if (net.input_dim() != kEulerInputs || net.output_dim() != m)
    throw ValidationError("network shape does not match the study fields");
  static const DerivPlan plan{
      kEulerInputs, {{DX, DETA}, {DY, DETA}, {DETA, DETA}}};
  eval_point(net, txye, plan, ws);
  for (int j = 0; j < m; ++j) {
    raw.val[j] = ws.out(j);
    for (int dir = 0; dir < kEulerInputs; ++dir) raw.d1[j][dir] = ws.jac(j, dir);
  }
  if (!moist) {
    raw.val[FQM] = 0.0;
    raw.d1[FQM] = {};
  }
  for (int p = 0; p < 3; ++p) raw.phi2[p] = ws.second(FPHI, p);
}

// --- loss with exact parameter gradient ---

namespace {

constexpr int kBlock = 64;
constexpr std::uint64_t kSampleSalt = 0x9e3779b97f4a7c15ull;

// One derivative slot per raw degree of freedom feeding the residual:
// 8 values, 8 x 4 first derivatives, 3 geopotential seconds.
constexpr int kSlots = kEulerFields + kEulerFields * kEulerInputs + 3;
using DR = Dual<kSlots>;
constexpr int val_slot(int f) { return f; }
constexpr int d1_slot(int f, int dir) {
  return kEulerFields + f * kEulerInputs + dir;
}
constexpr int phi2_slot(int p) {
  return kEulerFields + kEulerFields * kEulerInputs + p;
}

struct BadPoint {
  bool found = false;
  double pt[4] = {0, 0, 0, 0};
};

/// Squared-residual sum at one point as a dual over the raw network outputs.
DR point_objective(const EulerState& raw, const EulerConstants& c, bool moist) {
  EulerStateT<DR> s;
  const int m = moist ? kEulerFields : kEulerFields - 1;
  for (int f = 0; f < kEulerFields; ++f) {
    if (f < m) {
      s.val[f] = DR::seeded(raw.val[f], val_slot(f));
      for (int dir = 0; dir < kEulerInputs; ++dir)
        s.d1[f][dir] = DR::seeded(raw.d1[f][dir], d1_slot(f, dir));
    } else {
      s.val[f] = DR(0.0);
      for (int dir = 0; dir < kEulerInputs; ++dir) s.d1[f][dir] = DR(0.0);
    }
  }
  for (int p = 0; p < 3; ++p) s.phi2[p] = DR::seeded(raw.phi2[p], phi2_slot(p));

  const EulerStateT<DR> phys = apply_positivity(s);
  const EulerResiduals<DR> res = euler_residuals(phys, c, moist);

  if (!res.alpha_valid)
    return kAlphaPenaltyWeight * res.alpha_penalty * res.alpha_penalty;

  DR acc(0.0);
  for (EulerField eq : {FU, FV, FW, FTHETA, FMU, FPHI})
    acc = acc + res.r[eq] * res.r[eq];
  if (moist) acc = acc + res.r[FQM] * res.r[FQM];
  return acc;
}

EulerLoss euler_loss_impl(const DenseNet& net, const EulerStudyConfig& cfg,
                          const BaseState& base, const EulerConstants& c,
                          std::span<const double> interior_pts, int n_interior,
                          std::span<const double> initial_pts, int n_initial,
                          std::span<double> grad, bool parallel) {
  if (static_cast<int>(interior_pts.size()) != kEulerInputs * n_interior ||
      static_cast<int>(initial_pts.size()) != kEulerInputs * n_initial)
    throw ValidationError("point buffers do not match their counts");
  const std::size_t n_params = net.param_count();
  if (grad.size() != n_params)
    throw ValidationError("gradient buffer has wrong length");
  const int m = net.output_dim();

  const int blocks_int = (n_interior + kBlock - 1) / kBlock;
  const int blocks_ic = (n_initial + kBlock - 1) / kBlock;
  const int blocks = blocks_int + blocks_ic;

  std::vector<double> block_grad(static_cast<std::size_t>(blocks) * n_params, 0.0);
  std::vector<double> block_sq(blocks, 0.0);
  std::vector<BadPoint> block_bad(blocks);

  const double int_coeff = 1.0 / n_interior;
  const double ic_coeff = 2.0 * cfg.ic_weight / n_initial;

#pragma omp parallel for schedule(static) if (parallel)
  for (int blk = 0; blk < blocks; ++blk) {
    EvalWorkspace ws;
    SeedAdjoints seeds;
    EulerState raw;
    std::span<double> g(block_grad.data() + static_cast<std::size_t>(blk) * n_params,
                        n_params);

    if (blk < blocks_int) {
      seeds.resize(m, kEulerInputs, 3);
      const int lo = blk * kBlock, hi = std::min(n_interior, lo + kBlock);
      double sq = 0.0;
      for (int k = lo; k < hi; ++k) {
        const double* pt = interior_pts.data() + kEulerInputs * k;
        euler_state_from_net(net, {pt, kEulerInputs}, cfg.moist, ws, raw);
        const DR obj = point_objective(raw, c, cfg.moist);
        if (!std::isfinite(obj.v)) {
          if (!block_bad[blk].found) {
            block_bad[blk].found = true;
            std::copy(pt, pt + 4, block_bad[blk].pt);
          }
          continue;
        }
        sq += obj.v;
        seeds.zero();
        for (int j = 0; j < m; ++j) {
          seeds.wrt_out[j] = int_coeff * obj.d[val_slot(j)];
          for (int dir = 0; dir < kEulerInputs; ++dir)
            seeds.wrt_jac[j * kEulerInputs + dir] =
                int_coeff * obj.d[d1_slot(j, dir)];
        }
        for (int p = 0; p < 3; ++p)
          seeds.wrt_second[FPHI * 3 + p] = int_coeff * obj.d[phi2_slot(p)];
        backward_params(net, ws, seeds, g);
      }
      block_sq[blk] = sq;
    } else {
      seeds.resize(m, 0, 0);
      const DerivPlan value_plan{};
      const int b = blk - blocks_int;
      const int lo = b * kBlock, hi = std::min(n_initial, lo + kBlock);
      double sq = 0.0;
      for (int k = lo; k < hi; ++k) {
        const double* pt = initial_pts.data() + kEulerInputs * k;
        eval_point(net, {pt, kEulerInputs}, value_plan, ws);
        const auto targets = study_targets(base, cfg, c, pt[1], pt[2], pt[3]);
        double point_sq = 0.0;
        bool finite = true;
        for (int j = 0; j < m; ++j) {
          const double raw_j = ws.out(j);
          const double phys_j = (j == FMU) ? softplus_t(raw_j) : raw_j;
          const double diff = phys_j - targets[j];
          if (!std::isfinite(diff)) {
            finite = false;
            break;
          }
          point_sq += diff * diff;
          seeds.wrt_out[j] =
              ic_coeff * diff * ((j == FMU) ? sigmoid_t(raw_j) : 1.0);
        }
        if (!finite) {
          if (!block_bad[blk].found) {
            block_bad[blk].found = true;
            std::copy(pt, pt + 4, block_bad[blk].pt);
          }
          continue;
        }
        sq += point_sq;
        backward_params(net, ws, seeds, g);
      }
      block_sq[blk] = sq;
    }
  }

  for (int blk = 0; blk < blocks; ++blk) {
    if (block_bad[blk].found) {
      const auto& bp = block_bad[blk];
      std::ostringstream msg;
      msg << "non-finite loss term at point (" << bp.pt[0] << ", " << bp.pt[1]
          << ", " << bp.pt[2] << ", " << bp.pt[3] << ")";
      throw DivergenceError(msg.str(), -1);
    }
  }

  EulerLoss out;
  double int_sum = 0.0, ic_sum = 0.0;
  for (int blk = 0; blk < blocks_int; ++blk) int_sum += block_sq[blk];
  for (int blk = blocks_int; blk < blocks; ++blk) ic_sum += block_sq[blk];
  std::fill(grad.begin(), grad.end(), 0.0);
  for (int blk = 0; blk < blocks; ++blk) {
    const double* src = block_grad.data() + static_cast<std::size_t>(blk) * n_params;
    for (std::size_t p = 0; p < n_params; ++p) grad[p] += src[p];
  }
  out.interior = int_sum / n_interior;
  out.initial = ic_sum / n_initial;
  out.total = out.interior + cfg.ic_weight * out.initial;
  return out;
}

}  // namespace

EulerLoss euler_loss_and_grad(const DenseNet& net, const EulerStudyConfig& cfg,
                              const BaseState& base, const EulerConstants& c,
                              std::span<const double> interior_pts, int n_interior,
                              std::span<const double> initial_pts, int n_initial,
                              std::span<double> grad) {
  return euler_loss_impl(net, cfg, base, c, interior_pts, n_interior, initial_pts,
                         n_initial, grad, true);
}

EulerLoss euler_loss_and_grad_serial(const DenseNet& net,
                                     const EulerStudyConfig& cfg,
                                     const BaseState& base, const EulerConstants& c,
                                     std::span<const double> interior_pts,
                                     int n_interior,
                                     std::span<const double> initial_pts,
                                     int n_initial, std::span<double> grad) {
  return euler_loss_impl(net, cfg, base, c, interior_pts, n_interior, initial_pts,
                         n_initial, grad, false);
}

// --- convergence study ---

EulerStudyResult convergence_study(const EulerStudyConfig& cfg,
                                   const BaseState& base,
                                   const EulerConstants& c) {
  cfg.validate();

  std::vector<int> sizes;
  sizes.push_back(kEulerInputs);
  for (int h : cfg.hidden) sizes.push_back(h);
  sizes.push_back(cfg.moist ? kEulerFields : kEulerFields - 1);

  EulerStudyResult result;
  result.net = DenseNet::init_uniform(sizes, cfg.seed);
  result.history.reserve(cfg.iterations);

  std::mt19937_64 rng(cfg.seed ^ kSampleSalt);
  auto uniform = [&](double hi) {
    return std::uniform_real_distribution<double>(0.0, hi)(rng);
  };

  std::vector<double> interior(static_cast<std::size_t>(kEulerInputs) *
                               cfg.interior_batch);
  std::vector<double> initial(static_cast<std::size_t>(kEulerInputs) *
                              cfg.initial_batch);
  std::vector<double> grad(result.net.param_count());
  AdamState adam;
  AdamParams hp;

  for (int it = 0; it < cfg.iterations; ++it) {
    for (int k = 0; k < cfg.interior_batch; ++k) {
      double* p = interior.data() + static_cast<std::size_t>(kEulerInputs) * k;
      p[DT] = uniform(cfg.t_max);
      p[DX] = uniform(cfg.x_max);
      p[DY] = uniform(cfg.y_max);
      p[DETA] = uniform(1.0);
    }
    for (int k = 0; k < cfg.initial_batch; ++k) {
      double* p = initial.data() + static_cast<std::size_t>(kEulerInputs) * k;
      p[DT] = 0.0;
      p[DX] = uniform(cfg.x_max);
      p[DY] = uniform(cfg.y_max);
      p[DETA] = uniform(1.0);
    }

    const EulerLoss loss =
        euler_loss_impl(result.net, cfg, base, c, interior, cfg.interior_batch,
                        initial, cfg.initial_batch, grad, cfg.parallel);
    result.history.push_back(loss.total);
    if (!std::isfinite(loss.total))
      throw DivergenceError("study loss became non-finite", it);

    if (cfg.final_learning_rate >= 0 && cfg.iterations > 1) {
      const double f = static_cast<double>(it) / (cfg.iterations - 1);
      hp.lr = cfg.learning_rate +
              f * (cfg.final_learning_rate - cfg.learning_rate);
    } else {
      hp.lr = cfg.learning_rate;
    }
    adam_step(result.net.params(), grad, adam, hp);
  }

  auto window_mean = [&](int lo) {
    double s = 0.0;
    for (int i = lo; i < lo + cfg.window; ++i) s += result.history[i];
    return s / cfg.window;
  };
  result.initial_window_mean = window_mean(0);
  result.final_window_mean = window_mean(cfg.iterations - cfg.window);
  result.converged =
      result.initial_window_mean > 0 &&
      result.initial_window_mean >= cfg.reduction_target * result.final_window_mean;
  return result;
}

// --- config file ---

EulerStudyConfig load_euler_config(const std::string& text) {
  const std::vector<ConfigSection> sections = parse_config_sections(text);
  EulerStudyConfig cfg;
  const ConfigSection* euler = nullptr;
  for (const ConfigSection& sec : sections) {
    if (sec.name == "euler") {
      euler = &sec;
    } else {
      throw ValidationError("unknown section [" + sec.name +
                            "] in a study config");
    }
  }
  if (!euler) throw ValidationError("missing [euler] section");

  std::set<std::string> used;
  auto raw = [&](const std::string& key) -> const std::string* {
    auto it = euler->kv.find(key);
    if (it == euler->kv.end()) return nullptr;
    used.insert(key);
    return &it->second;
  };
  auto num_or = [&](const std::string& key, double dflt) {
    const std::string* s = raw(key);
    return s ? parse_double(*s, "[euler] " + key) : dflt;
  };
  auto int_or = [&](const std::string& key, long long dflt) {
    const std::string* s = raw(key);
    return s ? parse_int(*s, "[euler] " + key) : dflt;
  };

  cfg.iterations = static_cast<int>(int_or("iterations", cfg.iterations));
  cfg.interior_batch =
      static_cast<int>(int_or("interior_batch", cfg.interior_batch));
  cfg.initial_batch = static_cast<int>(int_or("initial_batch", cfg.initial_batch));
  cfg.learning_rate = num_or("learning_rate", cfg.learning_rate);
  cfg.final_learning_rate =
      num_or("final_learning_rate", cfg.final_learning_rate);
  cfg.ic_weight = num_or("ic_weight", cfg.ic_weight);
  cfg.perturb_amplitude = num_or("perturb_amplitude", cfg.perturb_amplitude);
  cfg.seed = static_cast<std::uint64_t>(int_or("seed", 0));
  cfg.moist = int_or("moist", cfg.moist ? 1 : 0) != 0;
  cfg.t_max = num_or("t_max", cfg.t_max);
  cfg.x_max = num_or("x_max", cfg.x_max);
  cfg.y_max = num_or("y_max", cfg.y_max);
  cfg.reduction_target = num_or("reduction_target", cfg.reduction_target);
  cfg.window = static_cast<int>(int_or("window", cfg.window));
  if (const std::string* s = raw("hidden")) {
    cfg.hidden.clear();
    for (double v : parse_double_list(*s, "[euler] hidden")) {
      if (v != std::floor(v) || v < 1)
        throw ValidationError("[euler] hidden sizes must be positive integers");
      cfg.hidden.push_back(static_cast<int>(v));
    }
  }
  for (const std::string& key : euler->key_order)
    if (!used.count(key))
      throw ValidationError("unknown key '" + key + "' in [euler]");

  cfg.validate();
  return cfg;
}

EulerStudyConfig load_euler_config_file(const std::string& path) {
  return load_euler_config(read_file(path));
}

}  // namespace firefront
