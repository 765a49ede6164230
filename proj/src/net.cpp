#include "firefront/net.hpp"

#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <random>
#include <sstream>

#include "firefront/io.hpp"

namespace firefront {

std::string activation_name(Activation a) {
  return a == Activation::Tanh ? "tanh" : "sigmoid";
}

Activation activation_from_name(const std::string& name) {
  if (name == "tanh") return Activation::Tanh;
  if (name == "sigmoid") return Activation::Sigmoid;
  throw ValidationError("unknown activation '" + name + "'");
}

DenseNet::DenseNet(std::vector<int> layer_sizes, Activation act)
    : sizes_(std::move(layer_sizes)), act_(act) {
  if (sizes_.size() < 2)
    throw ValidationError("net needs an input and an output size");
  for (int n : sizes_)
    if (n < 1) throw ValidationError("net layer sizes must be positive");
  build_offsets();
}

void DenseNet::build_offsets() {
  w_off_.clear();
  b_off_.clear();
  std::size_t off = 0;
  for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
    w_off_.push_back(off);
    off += static_cast<std::size_t>(sizes_[l]) * sizes_[l + 1];
    b_off_.push_back(off);
    off += sizes_[l + 1];
  }
  params_.assign(off, 0.0);
}

DenseNet DenseNet::init_uniform(std::vector<int> layer_sizes, std::uint64_t seed,
                                Activation act) {
  DenseNet net(std::move(layer_sizes), act);
  std::mt19937_64 rng(seed);
  for (int l = 0; l < net.layer_count(); ++l) {
    const int n_in = net.sizes_[l], n_out = net.sizes_[l + 1];
    const double bound = std::sqrt(6.0 / (n_in + n_out));
    std::uniform_real_distribution<double> dist(-bound, bound);
    for (double& w : net.weights(l)) w = dist(rng);
    // biases stay zero
  }
  return net;
}

void DenseNet::set_params(std::span<const double> theta) {
  if (theta.size() != params_.size())
    throw ValidationError("parameter vector has wrong length");
  std::copy(theta.begin(), theta.end(), params_.begin());
}

std::span<const double> DenseNet::weights(int layer) const {
  return {params_.data() + w_off_[layer],
          static_cast<std::size_t>(sizes_[layer]) * sizes_[layer + 1]};
}
std::span<double> DenseNet::weights(int layer) {
  return {params_.data() + w_off_[layer],
          static_cast<std::size_t>(sizes_[layer]) * sizes_[layer + 1]};
}
std::span<const double> DenseNet::biases(int layer) const {
  return {params_.data() + b_off_[layer], static_cast<std::size_t>(sizes_[layer + 1])};
}
std::span<double> DenseNet::biases(int layer) {
  return {params_.data() + b_off_[layer], static_cast<std::size_t>(sizes_[layer + 1])};
}

// --- forward with derivative tracks ---

namespace {

/// Activation value and its first three derivatives expressed through the
/// post-activation value a (both supported activations allow this).
struct ActDerivs {
  double s1, s2, s3;
};

inline double act_value(Activation act, double z) {
  if (act == Activation::Tanh) return std::tanh(z);
  return z >= 0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z));
}

inline ActDerivs act_derivs(Activation act, double a) {
  ActDerivs d;
  if (act == Activation::Tanh) {
    d.s1 = 1.0 - a * a;
    d.s2 = -2.0 * a * d.s1;
    d.s3 = d.s1 * (6.0 * a * a - 2.0);
  } else {
    d.s1 = a * (1.0 - a);
    const double c = 1.0 - 2.0 * a;
    d.s2 = d.s1 * c;
    d.s3 = d.s1 * c * c - 2.0 * d.s1 * d.s1;
  }
  return d;
}

void ensure_tracks(std::vector<std::vector<double>>& tracks, int count, int width) {
  tracks.resize(count);
  for (auto& t : tracks) t.assign(width, 0.0);
}

void check_plan(const DenseNet& net, const DerivPlan& plan) {
  if (plan.dirs < 0 || plan.dirs > net.input_dim())
    throw ValidationError("derivative directions exceed the input dimension");
  for (auto [i, j] : plan.pairs)
    if (i < 0 || j < 0 || i >= plan.dirs || j >= plan.dirs)
      throw ValidationError("second-derivative pair outside the tangent directions");
}

}  // namespace

void eval_point(const DenseNet& net, std::span<const double> x,
                const DerivPlan& plan, EvalWorkspace& ws) {
  if (static_cast<int>(x.size()) != net.input_dim())
    throw ValidationError("input point has wrong dimension");
  check_plan(net, plan);

  const int L = net.layer_count();
  const int dirs = plan.dirs;
  const int np = static_cast<int>(plan.pairs.size());
  ws.plan = plan;
  ws.level.resize(L + 1);

  // level 0: the input and its trivial tangents
  {
    EvalWorkspace::Level& lv = ws.level[0];
    lv.a.assign(x.begin(), x.end());
    ensure_tracks(lv.ad, dirs, net.input_dim());
    for (int i = 0; i < dirs; ++i) lv.ad[i][i] = 1.0;
    ensure_tracks(lv.add, np, net.input_dim());
    lv.zd.clear();
    lv.zdd.clear();
  }

  for (int l = 1; l <= L; ++l) {
    const int n_prev = net.layer_sizes()[l - 1];
    const int n = net.layer_sizes()[l];
    const auto W = net.weights(l - 1);
    const auto b = net.biases(l - 1);
    EvalWorkspace::Level& prev = ws.level[l - 1];
    EvalWorkspace::Level& cur = ws.level[l];

    cur.a.assign(n, 0.0);
    ensure_tracks(cur.zd, dirs, n);
    ensure_tracks(cur.ad, dirs, n);
    ensure_tracks(cur.zdd, np, n);
    ensure_tracks(cur.add, np, n);

    for (int r = 0; r < n; ++r) {
      const double* row = W.data() + static_cast<std::size_t>(r) * n_prev;
      double z = b[r];
      for (int c = 0; c < n_prev; ++c) z += row[c] * prev.a[c];
      cur.a[r] = z;
      for (int i = 0; i < dirs; ++i) {
        double zd = 0.0;
        const double* pad = prev.ad[i].data();
        for (int c = 0; c < n_prev; ++c) zd += row[c] * pad[c];
        cur.zd[i][r] = zd;
      }
      for (int p = 0; p < np; ++p) {
        double zdd = 0.0;
        const double* padd = prev.add[p].data();
        for (int c = 0; c < n_prev; ++c) zdd += row[c] * padd[c];
        cur.zdd[p][r] = zdd;
      }
    }

    if (l < L) {
      for (int r = 0; r < n; ++r) {
        const double a = act_value(net.activation(), cur.a[r]);
        cur.a[r] = a;
        const ActDerivs d = act_derivs(net.activation(), a);
        for (int i = 0; i < dirs; ++i) cur.ad[i][r] = d.s1 * cur.zd[i][r];
        for (int p = 0; p < np; ++p) {
          const auto [pi, pj] = plan.pairs[p];
          cur.add[p][r] =
              d.s2 * cur.zd[pi][r] * cur.zd[pj][r] + d.s1 * cur.zdd[p][r];
        }
      }
    } else {
      for (int i = 0; i < dirs; ++i) cur.ad[i] = cur.zd[i];
      for (int p = 0; p < np; ++p) cur.add[p] = cur.zdd[p];
    }
  }
}

void forward(const DenseNet& net, std::span<const double> x, std::span<double> out) {
  if (static_cast<int>(out.size()) != net.output_dim())
    throw ValidationError("output buffer has wrong dimension");
  thread_local EvalWorkspace ws;
  eval_point(net, x, DerivPlan{}, ws);
  std::copy(ws.level.back().a.begin(), ws.level.back().a.end(), out.begin());
}

std::vector<double> forward(const DenseNet& net, std::span<const double> x) {
  std::vector<double> out(net.output_dim());
  forward(net, x, out);
  return out;
}

std::vector<double> input_gradient(const DenseNet& net, std::span<const double> x) {
  EvalWorkspace ws;
  DerivPlan plan;
  plan.dirs = net.input_dim();
  eval_point(net, x, plan, ws);
  const int m = net.output_dim(), k = net.input_dim();
  std::vector<double> jac(static_cast<std::size_t>(m) * k);
  for (int j = 0; j < m; ++j)
    for (int i = 0; i < k; ++i) jac[static_cast<std::size_t>(j) * k + i] = ws.jac(j, i);
  return jac;
}

// --- backward ---

void SeedAdjoints::resize(int m, int dirs, int npairs) {
  wrt_out.assign(m, 0.0);
  wrt_jac.assign(static_cast<std::size_t>(m) * dirs, 0.0);
  wrt_second.assign(static_cast<std::size_t>(m) * npairs, 0.0);
}

void SeedAdjoints::zero() {
  std::fill(wrt_out.begin(), wrt_out.end(), 0.0);
  std::fill(wrt_jac.begin(), wrt_jac.end(), 0.0);
  std::fill(wrt_second.begin(), wrt_second.end(), 0.0);
}

void backward_params(const DenseNet& net, EvalWorkspace& ws,
                     const SeedAdjoints& seeds, std::span<double> grad) {
  if (grad.size() != net.param_count())
    throw ValidationError("gradient buffer has wrong length");
  const int L = net.layer_count();
  const int dirs = ws.plan.dirs;
  const int np = static_cast<int>(ws.plan.pairs.size());
  const int m = net.output_dim();
  if (static_cast<int>(seeds.wrt_out.size()) != m ||
      seeds.wrt_jac.size() != static_cast<std::size_t>(m) * dirs ||
      seeds.wrt_second.size() != static_cast<std::size_t>(m) * np)
    throw ValidationError("seed adjoints do not match the evaluation plan");
  if (dirs > 8 || np > 8)
    throw ValidationError("backward pass supports at most 8 tangent tracks");

  int max_n = 0;
  for (int n : net.layer_sizes()) max_n = std::max(max_n, n);

  // Adjoints of the post-activation value / first tangents / second tangents
  // at the current level; a second set receives the pullback.
  auto& da = ws.adj_a;
  auto& dad = ws.adj_ad;
  auto& dadd = ws.adj_add;
  auto& da2 = ws.adj_a2;
  auto& dad2 = ws.adj_ad2;
  auto& dadd2 = ws.adj_add2;
  da.assign(max_n, 0.0);
  dad.assign(static_cast<std::size_t>(dirs) * max_n, 0.0);
  dadd.assign(static_cast<std::size_t>(np) * max_n, 0.0);
  da2.assign(max_n, 0.0);
  dad2.assign(static_cast<std::size_t>(dirs) * max_n, 0.0);
  dadd2.assign(static_cast<std::size_t>(np) * max_n, 0.0);

  for (int r = 0; r < m; ++r) {
    da[r] = seeds.wrt_out[r];
    for (int i = 0; i < dirs; ++i)
      dad[static_cast<std::size_t>(i) * m + r] =
          seeds.wrt_jac[static_cast<std::size_t>(r) * dirs + i];
    for (int p = 0; p < np; ++p)
      dadd[static_cast<std::size_t>(p) * m + r] =
          seeds.wrt_second[static_cast<std::size_t>(r) * np + p];
  }

  for (int l = L; l >= 1; --l) {
    const int n = net.layer_sizes()[l];
    const int n_prev = net.layer_sizes()[l - 1];
    const EvalWorkspace::Level& cur = ws.level[l];
    const EvalWorkspace::Level& prev = ws.level[l - 1];
    const auto W = net.weights(l - 1);

    // 1) pre-activation adjoints (lambda, mu_i, nu_p); pointwise in r, so the
    // conversion happens in place with small local temporaries.
    if (l < L) {
      double mu_tmp[8];   // dirs <= 4 in every use; headroom is cheap
      double nu_tmp[8];
      for (int r = 0; r < n; ++r) {
        const ActDerivs d = act_derivs(net.activation(), cur.a[r]);
        double lam = d.s1 * da[r];
        for (int i = 0; i < dirs; ++i)
          lam += d.s2 * cur.zd[i][r] * dad[static_cast<std::size_t>(i) * n + r];
        for (int p = 0; p < np; ++p) {
          const auto [pi, pj] = ws.plan.pairs[p];
          lam += (d.s3 * cur.zd[pi][r] * cur.zd[pj][r] + d.s2 * cur.zdd[p][r]) *
                 dadd[static_cast<std::size_t>(p) * n + r];
        }
        for (int i = 0; i < dirs; ++i)
          mu_tmp[i] = d.s1 * dad[static_cast<std::size_t>(i) * n + r];
        for (int p = 0; p < np; ++p) {
          const auto [pi, pj] = ws.plan.pairs[p];
          const double w = dadd[static_cast<std::size_t>(p) * n + r];
          if (pi == pj) {
            mu_tmp[pi] += 2.0 * d.s2 * cur.zd[pi][r] * w;
          } else {
            mu_tmp[pi] += d.s2 * cur.zd[pj][r] * w;
            mu_tmp[pj] += d.s2 * cur.zd[pi][r] * w;
          }
        }
        for (int p = 0; p < np; ++p)
          nu_tmp[p] = d.s1 * dadd[static_cast<std::size_t>(p) * n + r];

        da[r] = lam;
        for (int i = 0; i < dirs; ++i) dad[static_cast<std::size_t>(i) * n + r] = mu_tmp[i];
        for (int p = 0; p < np; ++p) dadd[static_cast<std::size_t>(p) * n + r] = nu_tmp[p];
      }
    }
    // at l == L the output layer is affine: lambda = da, mu = dad, nu = dadd

    // 2) parameter gradients of this affine map
    double* gW = grad.data() + net.weight_offset(l - 1);
    double* gb = grad.data() + net.bias_offset(l - 1);
    for (int r = 0; r < n; ++r) {
      const double lam = da[r];
      gb[r] += lam;
      double* grow = gW + static_cast<std::size_t>(r) * n_prev;
      for (int c = 0; c < n_prev; ++c) grow[c] += lam * prev.a[c];
      for (int i = 0; i < dirs; ++i) {
        const double mu = dad[static_cast<std::size_t>(i) * n + r];
        if (mu == 0.0) continue;
        const double* pad = prev.ad[i].data();
        for (int c = 0; c < n_prev; ++c) grow[c] += mu * pad[c];
      }
      for (int p = 0; p < np; ++p) {
        const double nu = dadd[static_cast<std::size_t>(p) * n + r];
        if (nu == 0.0) continue;
        const double* padd = prev.add[p].data();
        for (int c = 0; c < n_prev; ++c) grow[c] += nu * padd[c];
      }
    }

    // 3) pull the adjoints back through W to the previous level
    if (l > 1) {
      std::fill(da2.begin(), da2.begin() + n_prev, 0.0);
      std::fill(dad2.begin(), dad2.begin() + static_cast<std::size_t>(dirs) * n_prev, 0.0);
      std::fill(dadd2.begin(), dadd2.begin() + static_cast<std::size_t>(np) * n_prev, 0.0);
      for (int r = 0; r < n; ++r) {
        const double* row = W.data() + static_cast<std::size_t>(r) * n_prev;
        const double lam = da[r];
        for (int c = 0; c < n_prev; ++c) da2[c] += row[c] * lam;
        for (int i = 0; i < dirs; ++i) {
          const double mu = dad[static_cast<std::size_t>(i) * n + r];
          if (mu == 0.0) continue;
          double* dst = dad2.data() + static_cast<std::size_t>(i) * n_prev;
          for (int c = 0; c < n_prev; ++c) dst[c] += row[c] * mu;
        }
        for (int p = 0; p < np; ++p) {
          const double nu = dadd[static_cast<std::size_t>(p) * n + r];
          if (nu == 0.0) continue;
          double* dst = dadd2.data() + static_cast<std::size_t>(p) * n_prev;
          for (int c = 0; c < n_prev; ++c) dst[c] += row[c] * nu;
        }
      }
      std::swap(da, da2);
      std::swap(dad, dad2);
      std::swap(dadd, dadd2);
    }
  }
}

// --- optimizer ---

void adam_step(std::span<double> theta, std::span<const double> grad,
               AdamState& state, const AdamParams& hp) {
  if (theta.size() != grad.size())
    throw ValidationError("gradient length does not match parameters");
  if (state.m.size() != theta.size()) {
    state.m.assign(theta.size(), 0.0);
    state.v.assign(theta.size(), 0.0);
    state.step = 0;
  }
  ++state.step;
  const double bc1 = 1.0 - std::pow(hp.beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(hp.beta2, static_cast<double>(state.step));
  for (std::size_t i = 0; i < theta.size(); ++i) {
    const double g = grad[i];
    state.m[i] = hp.beta1 * state.m[i] + (1.0 - hp.beta1) * g;
    state.v[i] = hp.beta2 * state.v[i] + (1.0 - hp.beta2) * g * g;
    const double mhat = state.m[i] / bc1;
    const double vhat = state.v[i] / bc2;
    theta[i] -= hp.lr * mhat / (std::sqrt(vhat) + hp.eps);
  }
}

// --- serialization ---

void save_net(const DenseNet& net, std::ostream& os) {
  os << "densenet 1\n";
  os << "activation " << activation_name(net.activation()) << "\n";
  os << "layers";
  for (int n : net.layer_sizes()) os << ' ' << n;
  os << "\nparams " << net.param_count() << "\n";
  for (double p : net.params()) os << format_double(p) << "\n";
}

DenseNet load_net(std::istream& is) {
  std::string word;
  int version = 0;
  if (!(is >> word >> version) || word != "densenet" || version != 1)
    throw ParseError("not a densenet file");
  std::string act_name;
  if (!(is >> word >> act_name) || word != "activation")
    throw ParseError("densenet: expected activation line");
  const Activation act = activation_from_name(act_name);
  if (!(is >> word) || word != "layers")
    throw ParseError("densenet: expected layers line");
  std::vector<int> sizes;
  while (is.peek() != '\n' && is >> word) {
    sizes.push_back(static_cast<int>(parse_int(word, "densenet layer size")));
    while (is.peek() == ' ') is.get();
  }
  std::size_t count = 0;
  if (!(is >> word >> count) || word != "params")
    throw ParseError("densenet: expected params line");
  DenseNet net(sizes, act);
  if (count != net.param_count())
    throw ParseError("densenet: parameter count does not match layer sizes");
  for (std::size_t i = 0; i < count; ++i) {
    if (!(is >> word)) throw ParseError("densenet: truncated parameter list");
    net.params()[i] = parse_double(word, "densenet parameter");
  }
  return net;
}

}  // namespace firefront
