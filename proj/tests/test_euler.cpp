/// @file test_euler.cpp
/// @brief Flux-form residual assembly, hydrostatic reference column, dual
///        chain rule through the positivity transform, study loss gradient,
///        and the study config parser.

#include "doctest.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <random>
#include <utility>
#include <vector>

#include "firefront/euler.hpp"

using namespace firefront;

namespace {

/// Residuals from a raw (pre-positivity) state, templated so the same code
/// runs on doubles and on dual numbers.
template <class T>
EulerResiduals<T> residuals_from_raw(const EulerStateT<T>& raw,
                                     const EulerConstants& c, bool moist) {
  return euler_residuals(apply_positivity(raw), c, moist);
}

/// A fixed, fully populated state in the valid-alpha regime.
EulerState sample_state() {
  EulerState s{};
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  for (int f = 0; f < kEulerFields; ++f) {
    s.val[f] = u(rng);
    for (int d = 0; d < kEulerInputs; ++d) s.d1[f][d] = u(rng);
  }
  for (int p = 0; p < 3; ++p) s.phi2[p] = u(rng);
  s.val[FMU] = 2.0;
  s.val[FTHETA] = 3.0;         // specific theta 1.5
  s.d1[FPHI][DETA] = -1.6;     // alpha_d = 0.8
  return s;
}

}  // namespace

TEST_CASE("the hydrostatic column satisfies every residual to near epsilon") {
  const BaseState base;
  const EulerConstants c;
  for (double eta : {0.02, 0.17, 0.4, 0.63, 0.85, 1.0}) {
    const EulerState s = base.state_at(0.3, 0.7, eta, c);
    const EulerResiduals<double> r = euler_residuals(s, c);
    REQUIRE(r.alpha_valid);
    for (EulerField eq : {FU, FV, FW, FTHETA, FMU, FPHI})
      CHECK(std::abs(r.r[eq]) <= 1e-10);
    CHECK(r.r[FQM] == 0.0);
  }
}

TEST_CASE("the reference column is internally consistent") {
  const BaseState base;
  const EulerConstants c;

  CHECK(base.pressure(0.0) == base.p_top);
  CHECK(base.pressure(1.0) == base.p_top + base.mu0);
  CHECK(base.phi(1.0, c) == 0.0);

  const double h = 1e-6;
  for (double eta : {0.1, 0.5, 0.9}) {
    const EulerState s = base.state_at(0.0, 0.0, eta, c);

    // d phi / d eta = -mu alpha_d, and its eta-derivative fills phi2[2]
    const double fd1 = (base.phi(eta + h, c) - base.phi(eta - h, c)) / (2 * h);
    CHECK(s.d1[FPHI][DETA] == doctest::Approx(fd1).epsilon(1e-7));
    const double fd2 = (-base.mu0 * base.alpha_d(eta + h, c) -
                        -base.mu0 * base.alpha_d(eta - h, c)) /
                       (2 * h);
    CHECK(s.phi2[2] == doctest::Approx(fd2).epsilon(1e-7));

    // diagnosed pressure closes the loop back to the linear profile
    const EulerDiagnostics d = diagnostics(s, c);
    CHECK(d.p == doctest::Approx(base.pressure(eta)).epsilon(1e-12));
    CHECK(d.alpha_d == doctest::Approx(base.alpha_d(eta, c)).epsilon(1e-12));
    CHECK(d.theta_m == doctest::Approx(base.theta_m(c)).epsilon(1e-12));
    CHECK(d.alpha == d.alpha_d);
  }
}

TEST_CASE("diagnostics reject unphysical states") {
  const EulerConstants c;
  EulerState s = sample_state();

  s.val[FMU] = 0.0;
  CHECK_THROWS_WITH_AS(diagnostics(s, c), "column mass must be positive",
                       ValidationError);

  s = sample_state();
  s.d1[FPHI][DETA] = 1.0;  // alpha_d < 0
  CHECK_THROWS_WITH_AS(diagnostics(s, c), "dry specific volume is not positive",
                       ValidationError);

  s = sample_state();
  s.val[FTHETA] = -1.0;
  CHECK_THROWS_WITH_AS(diagnostics(s, c), "potential temperature is not positive",
                       ValidationError);
}

TEST_CASE("residuals are equivariant under swapping the horizontal axes") {
  const EulerConstants c;
  const EulerState s = sample_state();
  const EulerResiduals<double> r = euler_residuals(s, c);
  REQUIRE(r.alpha_valid);

  auto sf = [](int f) { return f == FU ? FV : f == FV ? int(FU) : f; };
  auto sd = [](int d) { return d == DX ? DY : d == DY ? int(DX) : d; };
  EulerState sw{};
  for (int f = 0; f < kEulerFields; ++f) {
    sw.val[sf(f)] = s.val[f];
    for (int d = 0; d < kEulerInputs; ++d) sw.d1[sf(f)][sd(d)] = s.d1[f][d];
  }
  sw.phi2[0] = s.phi2[1];
  sw.phi2[1] = s.phi2[0];
  sw.phi2[2] = s.phi2[2];

  const EulerResiduals<double> rs = euler_residuals(sw, c);
  REQUIRE(rs.alpha_valid);
  CHECK(rs.r[FU] == doctest::Approx(r.r[FV]).epsilon(1e-12));
  CHECK(rs.r[FV] == doctest::Approx(r.r[FU]).epsilon(1e-12));
  for (EulerField eq : {FW, FTHETA, FMU, FPHI})
    CHECK(rs.r[eq] == doctest::Approx(r.r[eq]).epsilon(1e-12));
}

TEST_CASE("invalid alpha or theta switches to the linear penalty") {
  const EulerConstants c;

  EulerState s = sample_state();
  s.d1[FPHI][DETA] = 1.0;  // alpha_d = -0.5
  EulerResiduals<double> r = euler_residuals(s, c);
  CHECK(!r.alpha_valid);
  CHECK(r.alpha_penalty == kAlphaFloor - (-0.5));
  for (EulerField eq : {FU, FV, FW, FTHETA, FMU, FPHI})
    CHECK(r.r[eq] == 0.0);  // residuals stay untouched on the penalty path

  s.val[FTHETA] = -3.0;  // specific theta = -1.5 on top of the bad alpha
  r = euler_residuals(s, c);
  CHECK(!r.alpha_valid);
  CHECK(r.alpha_penalty == (kAlphaFloor - (-0.5)) + (kAlphaFloor - (-1.5)));

  s = sample_state();
  s.val[FTHETA] = -3.0;  // only theta invalid
  r = euler_residuals(s, c);
  CHECK(!r.alpha_valid);
  CHECK(r.alpha_penalty == kAlphaFloor - (-1.5));
}

TEST_CASE("softplus and sigmoid are stable and consistent at extreme inputs") {
  for (double x : {-700.0, -50.0, -2.0, 0.0, 1.0, 3.0, 50.0, 700.0}) {
    const double sp = softplus_t(x);
    CHECK(std::isfinite(sp));
    CHECK(sp >= 0.0);
    // log(1+e^x) - log(1+e^-x) = x, a branch-crossing identity
    CHECK(sp - softplus_t(-x) == doctest::Approx(x).epsilon(1e-12));
    const double sg = sigmoid_t(x);
    CHECK(sg >= 0.0);
    CHECK(sg <= 1.0);
    CHECK(sg + sigmoid_t(-x) == doctest::Approx(1.0).epsilon(1e-14));
  }
  CHECK(sigmoid_t(0.0) == 0.5);
  CHECK(softplus_t(50.0) == doctest::Approx(50.0).epsilon(1e-12));
}

TEST_CASE("the positivity transform carries the chain rule in its tangents") {
  EulerState raw = sample_state();
  raw.val[FMU] = 0.3;
  raw.d1[FMU] = {1.0, 2.0, 3.0, 4.0};

  const EulerState s = apply_positivity(raw);
  CHECK(s.val[FMU] == softplus_t(0.3));
  const double h = 1e-6;
  const double fd = (softplus_t(0.3 + h) - softplus_t(0.3 - h)) / (2 * h);
  CHECK(sigmoid_t(0.3) == doctest::Approx(fd).epsilon(1e-8));
  for (int d = 0; d < kEulerInputs; ++d)
    CHECK(s.d1[FMU][d] == sigmoid_t(0.3) * raw.d1[FMU][d]);

  // every other field passes through unchanged
  for (int f = 0; f < kEulerFields; ++f) {
    if (f == FMU) continue;
    CHECK(s.val[f] == raw.val[f]);
    for (int d = 0; d < kEulerInputs; ++d) CHECK(s.d1[f][d] == raw.d1[f][d]);
  }
  for (int p = 0; p < 3; ++p) CHECK(s.phi2[p] == raw.phi2[p]);
}

TEST_CASE("dual tangents through positivity and residuals match finite differences") {
  const EulerConstants c;
  const EulerState base_raw = sample_state();

  // seed one raw slot at a time and compare against central differences
  struct Slot {
    int field, dir;  // dir = -1 seeds the value, -2 seeds phi2[field]
  };
  const Slot slots[] = {{FMU, -1}, {FTHETA, -1}, {FPHI, DETA}, {FU, DX}, {0, -2}, {2, -2}};

  for (const Slot& sl : slots) {
    using D = Dual<1>;
    EulerStateT<D> s;
    for (int f = 0; f < kEulerFields; ++f) {
      s.val[f] = D(base_raw.val[f]);
      for (int d = 0; d < kEulerInputs; ++d) s.d1[f][d] = D(base_raw.d1[f][d]);
    }
    for (int p = 0; p < 3; ++p) s.phi2[p] = D(base_raw.phi2[p]);

    auto slot_ref = [&](EulerState& st) -> double& {
      if (sl.dir == -1) return st.val[sl.field];
      if (sl.dir == -2) return st.phi2[sl.field];
      return st.d1[sl.field][sl.dir];
    };
    if (sl.dir == -1)
      s.val[sl.field] = D::seeded(base_raw.val[sl.field], 0);
    else if (sl.dir == -2)
      s.phi2[sl.field] = D::seeded(base_raw.phi2[sl.field], 0);
    else
      s.d1[sl.field][sl.dir] = D::seeded(base_raw.d1[sl.field][sl.dir], 0);

    const EulerResiduals<D> rd = residuals_from_raw(s, c, false);
    REQUIRE(rd.alpha_valid);

    const double h = 1e-6;
    EulerState up = base_raw, dn = base_raw;
    slot_ref(up) += h;
    slot_ref(dn) -= h;
    const EulerResiduals<double> ru = residuals_from_raw(up, c, false);
    const EulerResiduals<double> rn = residuals_from_raw(dn, c, false);
    REQUIRE(ru.alpha_valid);
    REQUIRE(rn.alpha_valid);

    for (EulerField eq : {FU, FV, FW, FTHETA, FMU, FPHI}) {
      const double fd = (ru.r[eq] - rn.r[eq]) / (2 * h);
      CHECK(rd.r[eq].d[0] == doctest::Approx(fd).epsilon(2e-5));
    }
  }
}

TEST_CASE("network state extraction matches plain evaluation and differencing") {
  const DenseNet net = DenseNet::init_uniform({4, 9, 7}, 21);
  EvalWorkspace ws;
  EulerState raw;

  std::mt19937_64 rng(22);
  std::uniform_real_distribution<double> u(0.1, 0.9);
  for (int trial = 0; trial < 4; ++trial) {
    const double pt[4] = {u(rng), u(rng), u(rng), u(rng)};
    euler_state_from_net(net, {pt, 4}, false, ws, raw);

    const std::vector<double> out = forward(net, {pt, 4});
    const std::vector<double> jac = input_gradient(net, {pt, 4});
    for (int j = 0; j < 7; ++j) {
      CHECK(raw.val[j] == out[j]);
      for (int d = 0; d < 4; ++d) CHECK(raw.d1[j][d] == jac[4 * j + d]);
    }
    CHECK(raw.val[FQM] == 0.0);
    for (int d = 0; d < 4; ++d) CHECK(raw.d1[FQM][d] == 0.0);

    // phi2 = d/d{x,y,eta} of d phi/d eta, checked by differencing the Jacobian
    const double h = 1e-5;
    const int probe_dirs[3] = {DX, DY, DETA};
    for (int p = 0; p < 3; ++p) {
      double qp[4], qm[4];
      std::copy(pt, pt + 4, qp);
      std::copy(pt, pt + 4, qm);
      qp[probe_dirs[p]] += h;
      qm[probe_dirs[p]] -= h;
      const std::vector<double> jp = input_gradient(net, {qp, 4});
      const std::vector<double> jm = input_gradient(net, {qm, 4});
      const double fd = (jp[4 * FPHI + DETA] - jm[4 * FPHI + DETA]) / (2 * h);
      CHECK(raw.phi2[p] == doctest::Approx(fd).epsilon(1e-4));
    }
  }

  // shape gates: wrong output width for the mode, wrong input width
  const DenseNet moist_net = DenseNet::init_uniform({4, 9, 8}, 23);
  CHECK_THROWS_AS(euler_state_from_net(moist_net, {std::array<double, 4>{}.data(), 4},
                                       false, ws, raw),
                  ValidationError);
  CHECK_NOTHROW(euler_state_from_net(moist_net, {std::array<double, 4>{}.data(), 4},
                                     true, ws, raw));
  const DenseNet narrow = DenseNet::init_uniform({3, 9, 7}, 24);
  CHECK_THROWS_AS(euler_state_from_net(narrow, {std::array<double, 4>{}.data(), 3},
                                       false, ws, raw),
                  ValidationError);
}

TEST_CASE("study targets reduce to the column and vanish at lateral walls") {
  const BaseState base;
  const EulerConstants c;
  EulerStudyConfig cfg;

  cfg.perturb_amplitude = 0.0;
  for (double eta : {0.0, 0.5, 1.0}) {
    const auto t = study_targets(base, cfg, c, 0.3, 0.8, eta);
    const EulerState s = base.state_at(0.3, 0.8, eta, c);
    for (int f = 0; f < kEulerFields; ++f) CHECK(t[f] == s.val[f]);
  }

  cfg.perturb_amplitude = 0.05;
  const double base_theta = base.mu0 * base.theta_m(c);
  // zero at all four lateral walls
  const std::pair<double, double> walls[] = {
      {0.0, 0.4}, {1.0, 0.4}, {0.4, 0.0}, {0.4, 1.0}};
  for (const auto& [x, y] : walls)
    CHECK(study_targets(base, cfg, c, x, y, 0.5)[FTHETA] == base_theta);
  // maximal at the center, with the parabolic-bump amplitude
  const auto tc = study_targets(base, cfg, c, 0.5, 0.5, 0.5);
  CHECK(tc[FTHETA] == doctest::Approx(base_theta * 1.05).epsilon(1e-14));
  CHECK(tc[FMU] == base.mu0);
  CHECK(tc[FU] == 0.0);
  CHECK(tc[FPHI] == base.phi(0.5, c));
}

TEST_CASE("study loss gradient matches finite differences") {
  const BaseState base;
  const EulerConstants c;
  EulerStudyConfig cfg;
  cfg.interior_batch = 6;
  cfg.initial_batch = 4;

  DenseNet net = DenseNet::init_uniform({4, 8, 7}, 31);
  std::mt19937_64 rng(33);
  std::uniform_real_distribution<double> u(0.05, 0.95);
  std::vector<double> interior(4 * 6), initial(4 * 4);
  for (double& v : interior) v = u(rng);
  for (int k = 0; k < 4; ++k) {
    initial[4 * k + DT] = 0.0;
    initial[4 * k + DX] = u(rng);
    initial[4 * k + DY] = u(rng);
    initial[4 * k + DETA] = u(rng);
  }

  std::vector<double> grad(net.param_count());
  const EulerLoss l = euler_loss_and_grad(net, cfg, base, c, interior, 6, initial, 4, grad);
  CHECK(l.total == doctest::Approx(l.interior + cfg.ic_weight * l.initial).epsilon(1e-14));
  CHECK(l.total > 0.0);

  DenseNet pert = net;
  std::vector<double> scratch(net.param_count());
  for (size_t i = 0; i < net.param_count(); i += 7) {
    const double h = 1e-6;
    const double save = pert.params()[i];
    pert.params()[i] = save + h;
    const double up =
        euler_loss_and_grad(pert, cfg, base, c, interior, 6, initial, 4, scratch).total;
    pert.params()[i] = save - h;
    const double dn =
        euler_loss_and_grad(pert, cfg, base, c, interior, 6, initial, 4, scratch).total;
    pert.params()[i] = save;
    const double fd = (up - dn) / (2 * h);
    CHECK(grad[i] == doctest::Approx(fd).epsilon(3e-5));
  }
}

TEST_CASE("parallel and serial study losses agree bitwise") {
  const BaseState base;
  const EulerConstants c;
  EulerStudyConfig cfg;
  cfg.interior_batch = 100;
  cfg.initial_batch = 40;

  DenseNet net = DenseNet::init_uniform({4, 10, 7}, 41);
  std::mt19937_64 rng(43);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> interior(4 * 100), initial(4 * 40);
  for (double& v : interior) v = u(rng);
  for (int k = 0; k < 40; ++k) {
    initial[4 * k + DT] = 0.0;
    initial[4 * k + DX] = u(rng);
    initial[4 * k + DY] = u(rng);
    initial[4 * k + DETA] = u(rng);
  }

  std::vector<double> gp(net.param_count()), gs(net.param_count());
  const EulerLoss lp = euler_loss_and_grad(net, cfg, base, c, interior, 100, initial, 40, gp);
  const EulerLoss ls =
      euler_loss_and_grad_serial(net, cfg, base, c, interior, 100, initial, 40, gs);
  CHECK(lp.total == ls.total);
  CHECK(lp.interior == ls.interior);
  CHECK(lp.initial == ls.initial);
  for (size_t i = 0; i < gp.size(); ++i) CHECK(gp[i] == gs[i]);
}

TEST_CASE("a short convergence study is deterministic and bookkeeps windows") {
  EulerStudyConfig cfg;
  cfg.iterations = 40;
  cfg.window = 10;
  cfg.interior_batch = 24;
  cfg.initial_batch = 12;
  cfg.hidden = {6};
  cfg.seed = 9;

  const EulerStudyResult a = convergence_study(cfg);
  const EulerStudyResult b = convergence_study(cfg);
  REQUIRE(a.history.size() == 40);
  for (size_t k = 0; k < a.history.size(); ++k) {
    CHECK(std::isfinite(a.history[k]));
    CHECK(a.history[k] == b.history[k]);
  }
  for (size_t i = 0; i < a.net.param_count(); ++i)
    CHECK(a.net.params()[i] == b.net.params()[i]);

  auto mean = [&](size_t from) {
    double s = 0.0;
    for (size_t k = from; k < from + 10; ++k) s += a.history[k];
    return s / 10.0;
  };
  CHECK(a.initial_window_mean == mean(0));
  CHECK(a.final_window_mean == mean(30));
  CHECK(a.converged == (a.initial_window_mean >= cfg.reduction_target * a.final_window_mean));
}

TEST_CASE("study config validation enforces window and extent rules") {
  EulerStudyConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  cfg.iterations = 80;
  cfg.window = 50;
  CHECK_THROWS_WITH_AS(cfg.validate(),
                       "two loss windows must fit into the iteration count",
                       ValidationError);
  cfg = EulerStudyConfig{};
  cfg.x_max = 0.0;
  CHECK_THROWS_AS(cfg.validate(), ValidationError);
  cfg = EulerStudyConfig{};
  cfg.perturb_amplitude = -0.1;
  CHECK_THROWS_AS(cfg.validate(), ValidationError);
}

TEST_CASE("study config files parse with defaults and reject junk") {
  const EulerStudyConfig d = load_euler_config("[euler]\n");
  CHECK(d.iterations == 2000);
  CHECK(d.interior_batch == 2048);
  CHECK(d.initial_batch == 512);
  CHECK(d.learning_rate == 2e-3);
  CHECK(d.ic_weight == 10.0);
  CHECK(d.perturb_amplitude == 0.05);
  CHECK(d.window == 50);
  CHECK(!d.moist);
  REQUIRE(d.hidden.size() == 1);
  CHECK(d.hidden[0] == 24);

  const EulerStudyConfig o = load_euler_config(
      "[euler]\n"
      "iterations = 500\n"
      "interior_batch = 128\n"
      "initial_batch = 64\n"
      "learning_rate = 1e-2\n"
      "final_learning_rate = 1e-4\n"
      "ic_weight = 5\n"
      "perturb_amplitude = 0.1\n"
      "seed = 77\n"
      "moist = 1\n"
      "t_max = 2\n"
      "x_max = 3\n"
      "y_max = 4\n"
      "reduction_target = 20\n"
      "window = 25\n"
      "hidden = 12, 8\n");
  CHECK(o.iterations == 500);
  CHECK(o.learning_rate == 1e-2);
  CHECK(o.final_learning_rate == 1e-4);
  CHECK(o.ic_weight == 5.0);
  CHECK(o.seed == 77);
  CHECK(o.moist);
  CHECK(o.t_max == 2.0);
  CHECK(o.reduction_target == 20.0);
  CHECK(o.window == 25);
  REQUIRE(o.hidden.size() == 2);
  CHECK(o.hidden[0] == 12);
  CHECK(o.hidden[1] == 8);

  CHECK_THROWS_WITH_AS(load_euler_config("[euler]\njunk = 1\n"),
                       "unknown key 'junk' in [euler]", ValidationError);
  CHECK_THROWS_WITH_AS(load_euler_config("[fuel]\n"),
                       "unknown section [fuel] in a study config", ValidationError);
  CHECK_THROWS_WITH_AS(load_euler_config(""), "missing [euler] section",
                       ValidationError);
  CHECK_THROWS_WITH_AS(load_euler_config("iterations = 3\n"),
                       "key before any section at line 1", ParseError);
  CHECK_THROWS_WITH_AS(load_euler_config("[euler]\nhidden = 12, -3\n"),
                       "[euler] hidden sizes must be positive integers",
                       ValidationError);
  // validate() runs on the parsed result too
  CHECK_THROWS_AS(load_euler_config("[euler]\niterations = 30\nwindow = 20\n"),
                  ValidationError);
}
