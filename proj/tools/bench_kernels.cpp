/// @file bench_kernels.cpp
/// @brief Microbenchmarks pitting the OpenMP kernels against their serial
///        reference twins: Heun step, residual loss gradient, Hausdorff
///        distance, and the atmospheric loss.

#include <benchmark/benchmark.h>

#include <cmath>
#include <random>
#include <vector>

#include "firefront/classical.hpp"
#include "firefront/euler.hpp"
#include "firefront/geometry.hpp"
#include "firefront/pinn.hpp"
#include "firefront/scenario.hpp"

namespace ff = firefront;

namespace {

ff::ScenarioConfig bench_scenario() {
  ff::ScenarioConfig sc;
  sc.domain = {0.0, 600.0, 0.0, 1000.0, 0.0, 1000.0};
  sc.scaling = ff::make_scaling(sc.domain);
  sc.fuel.r0 = 0.2;
  sc.fuel.wind_coeff = 0.5;
  sc.fuel.wind_exp = 1.2;
  sc.fuel.wind_cap = 10.0;
  sc.fuel.slope_coeff = 0.3;
  sc.fuel.burn_time = 120.0;
  sc.fuel.category = 3;
  sc.wind.v = ff::Poly3{0, 0, 0, {2.0}};
  sc.ignition.cones.push_back({5.0, 5.0, 1.0, 1.0, 0.5});
  sc.validate();
  return sc;
}

struct HeunSetup {
  ff::ScenarioConfig sc = bench_scenario();
  ff::Grid2 g;
  ff::ScalarField2 psi, spread, out;
  double dt = 0.0;

  explicit HeunSetup(int n)
      : g(ff::make_grid(0.0, 10.0, 0.0, 10.0, n, n)),
        psi(n, n),
        spread(n, n),
        out(n, n) {
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i)
        psi.at(i, j) = ff::initial_levelset(sc.ignition, g.x(i), g.y(j));
    ff::spread_field(sc, g, 0.0, psi, spread);
    double s_max = 0.0;
    for (double s : spread.v) s_max = std::max(s_max, s);
    dt = 0.5 * std::min(g.dx, g.dy) / s_max;
  }
};

void BM_HeunStepSerial(benchmark::State& state) {
  HeunSetup h(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    ff::heun_step_serial(h.psi, h.spread, h.g, h.dt, 0.0, h.out);
    benchmark::DoNotOptimize(h.out.v.data());
  }
}
BENCHMARK(BM_HeunStepSerial)->Arg(201)->Arg(401);

void BM_HeunStepParallel(benchmark::State& state) {
  HeunSetup h(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    ff::heun_step(h.psi, h.spread, h.g, h.dt, 0.0, h.out);
    benchmark::DoNotOptimize(h.out.v.data());
  }
}
BENCHMARK(BM_HeunStepParallel)->Arg(201)->Arg(401);

struct LossSetup {
  ff::ScenarioConfig sc = bench_scenario();
  ff::TrainingConfig cfg;
  ff::DenseNet net;
  ff::SampleBatches batches;
  std::vector<double> grad;

  LossSetup() {
    cfg.interior_batch = 512;
    cfg.boundary_batch = 128;
    net = ff::DenseNet::init_uniform({3, 16, 1}, 1);
    std::mt19937_64 rng(2);
    batches = ff::sample_batches(cfg, sc.scaled_box(), rng);
    grad.resize(net.param_count());
  }
};

void BM_LossGradSerial(benchmark::State& state) {
  LossSetup s;
  for (auto _ : state) {
    auto l = ff::loss_and_grad_serial(s.net, s.sc, s.cfg, s.batches, s.grad);
    benchmark::DoNotOptimize(l.total);
  }
}
BENCHMARK(BM_LossGradSerial);

void BM_LossGradParallel(benchmark::State& state) {
  LossSetup s;
  for (auto _ : state) {
    auto l = ff::loss_and_grad(s.net, s.sc, s.cfg, s.batches, s.grad);
    benchmark::DoNotOptimize(l.total);
  }
}
BENCHMARK(BM_LossGradParallel);

std::vector<ff::Point2> circle_points(double r, int n) {
  std::vector<ff::Point2> pts(n);
  for (int i = 0; i < n; ++i) {
    const double a = 2.0 * M_PI * i / n;
    pts[i] = {r * std::cos(a), r * std::sin(a)};
  }
  return pts;
}

void BM_HausdorffSerial(benchmark::State& state) {
  const auto a = circle_points(1.0, static_cast<int>(state.range(0)));
  const auto b = circle_points(1.1, static_cast<int>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(ff::hausdorff_serial(a, b));
  }
}
BENCHMARK(BM_HausdorffSerial)->Arg(2000);

void BM_HausdorffParallel(benchmark::State& state) {
  const auto a = circle_points(1.0, static_cast<int>(state.range(0)));
  const auto b = circle_points(1.1, static_cast<int>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(ff::hausdorff(a, b));
  }
}
BENCHMARK(BM_HausdorffParallel)->Arg(2000);

struct EulerSetup {
  ff::EulerStudyConfig cfg;
  ff::BaseState base;
  ff::EulerConstants consts;
  ff::DenseNet net;
  std::vector<double> interior, initial, grad;

  EulerSetup() {
    cfg.interior_batch = 256;
    cfg.initial_batch = 64;
    net = ff::DenseNet::init_uniform({4, 24, 7}, 3);
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    interior.resize(4 * cfg.interior_batch);
    for (double& v : interior) v = u(rng);
    initial.resize(4 * cfg.initial_batch);
    for (int k = 0; k < cfg.initial_batch; ++k) {
      initial[4 * k + 0] = 0.0;
      initial[4 * k + 1] = u(rng);
      initial[4 * k + 2] = u(rng);
      initial[4 * k + 3] = u(rng);
    }
    grad.resize(net.param_count());
  }
};

void BM_EulerLossSerial(benchmark::State& state) {
  EulerSetup s;
  for (auto _ : state) {
    auto l = ff::euler_loss_and_grad_serial(s.net, s.cfg, s.base, s.consts,
                                            s.interior, s.cfg.interior_batch,
                                            s.initial, s.cfg.initial_batch, s.grad);
    benchmark::DoNotOptimize(l.total);
  }
}
BENCHMARK(BM_EulerLossSerial);

void BM_EulerLossParallel(benchmark::State& state) {
  EulerSetup s;
  for (auto _ : state) {
    auto l = ff::euler_loss_and_grad(s.net, s.cfg, s.base, s.consts, s.interior,
                                     s.cfg.interior_batch, s.initial,
                                     s.cfg.initial_batch, s.grad);
    benchmark::DoNotOptimize(l.total);
  }
}
BENCHMARK(BM_EulerLossParallel);

}  // namespace

BENCHMARK_MAIN();
