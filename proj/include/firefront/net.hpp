/// @file net.hpp
/// @brief Dense network with exact input tangents (first and second order)
///        and a parameter backward pass that consumes adjoints of the value,
///        the input Jacobian, and selected second derivatives.
///
/// The forward pass propagates, next to the primal activations, one tangent
/// track per requested input direction and one second-order track per
/// requested direction pair. The backward pass reverses all tracks, so
/// gradients of any scalar built from (value, first derivatives, second
/// derivatives) of the outputs are exact — no finite differences anywhere.

#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "firefront/errors.hpp"

namespace firefront {

enum class Activation { Tanh, Sigmoid };

std::string activation_name(Activation a);
Activation activation_from_name(const std::string& name);

/// Fully connected net. Hidden layers apply the activation; the output layer
/// is affine. Parameters live in one flat vector, per layer weights
/// (row-major, out x in) followed by biases — the layout the optimizer and
/// the serializer both use.
class DenseNet {
public:
  DenseNet() = default;
  DenseNet(std::vector<int> layer_sizes, Activation act = Activation::Tanh);

  /// Seeded uniform init in +-sqrt(6/(n_in+n_out)) per layer; biases zero.
  static DenseNet init_uniform(std::vector<int> layer_sizes, std::uint64_t seed,
                               Activation act = Activation::Tanh);

  int input_dim() const { return sizes_.front(); }
  int output_dim() const { return sizes_.back(); }
  /// Number of affine maps (>= 1; a single map is a plain linear model).
  int layer_count() const { return static_cast<int>(sizes_.size()) - 1; }
  const std::vector<int>& layer_sizes() const { return sizes_; }
  Activation activation() const { return act_; }

  std::size_t param_count() const { return params_.size(); }
  std::span<double> params() { return params_; }
  std::span<const double> params() const { return params_; }
  void set_params(std::span<const double> theta);

  std::span<const double> weights(int layer) const;
  std::span<double> weights(int layer);
  std::span<const double> biases(int layer) const;
  std::span<double> biases(int layer);
  std::size_t weight_offset(int layer) const { return w_off_[layer]; }
  std::size_t bias_offset(int layer) const { return b_off_[layer]; }

private:
  std::vector<int> sizes_;
  Activation act_ = Activation::Tanh;
  std::vector<double> params_;
  std::vector<std::size_t> w_off_, b_off_;

  void build_offsets();
};

/// Which derivative tracks to carry: tangents along input axes 0..dirs-1 and
/// second-order tracks for the listed (axis, axis) pairs (each component must
/// be < dirs).
struct DerivPlan {
  int dirs = 0;
  std::vector<std::pair<int, int>> pairs;
};

/// Per-point evaluation record. Reused across points to avoid reallocation;
/// holds everything the backward pass needs.
struct EvalWorkspace {
  struct Level {
    std::vector<double> a;                    // post-activation values
    std::vector<std::vector<double>> zd;      // pre-activation first tangents
    std::vector<std::vector<double>> ad;      // post-activation first tangents
    std::vector<std::vector<double>> zdd;     // pre-activation second tangents
    std::vector<std::vector<double>> add;     // post-activation second tangents
  };
  std::vector<Level> level;  // level[0] holds the input and its (unit) tangents
  DerivPlan plan;

  double out(int j) const { return level.back().a[j]; }
  /// d out_j / d x_dir
  double jac(int j, int dir) const { return level.back().ad[dir][j]; }
  /// d^2 out_j / (d x_p1 d x_p2) for pair index p
  double second(int j, int p) const { return level.back().add[p][j]; }

  // scratch for the backward pass (sized lazily; two alternating levels)
  std::vector<double> adj_a, adj_ad, adj_add;
  std::vector<double> adj_a2, adj_ad2, adj_add2;
};

/// Primal + tangent forward pass; results live in `ws`.
void eval_point(const DenseNet& net, std::span<const double> x,
                const DerivPlan& plan, EvalWorkspace& ws);

/// Plain forward evaluation (no derivative tracks).
void forward(const DenseNet& net, std::span<const double> x, std::span<double> out);
std::vector<double> forward(const DenseNet& net, std::span<const double> x);

/// Full input Jacobian, row-major (output_dim x input_dim).
std::vector<double> input_gradient(const DenseNet& net, std::span<const double> x);

/// Adjoints of a scalar f with respect to the evaluation results:
/// wrt_out[j] = df/d out_j, wrt_jac[j*dirs + i] = df/d (d out_j/d x_i),
/// wrt_second[j*npairs + p] = df/d (second(j, p)).
struct SeedAdjoints {
  std::vector<double> wrt_out, wrt_jac, wrt_second;
  void resize(int m, int dirs, int npairs);
  void zero();
};

/// Accumulates df/d theta into `grad` (size = net.param_count()) by reversing
/// the primal and all tangent tracks recorded in `ws` (whose scratch buffers
/// it reuses).
void backward_params(const DenseNet& net, EvalWorkspace& ws,
                     const SeedAdjoints& seeds, std::span<double> grad);

// --- Optimizer ---

struct AdamState {
  std::vector<double> m, v;
  long long step = 0;
};

struct AdamParams {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// One bias-corrected Adam update, in place.
void adam_step(std::span<double> theta, std::span<const double> grad,
               AdamState& state, const AdamParams& hp);

// --- Serialization (text, bit-exact round trip) ---

void save_net(const DenseNet& net, std::ostream& os);
DenseNet load_net(std::istream& is);

}  // namespace firefront
