#pragma once

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "odekernel/rng.hpp"
#include "odekernel/tape.hpp"
#include "odekernel/tensor.hpp"

namespace odekernel {

/// Node ids of one model's parameters (and fixed constants) on a tape.
struct TapedModel {
  std::vector<NodeId> params;
  std::vector<NodeId> constants;
};

/// A parametrized differentiable map u -> f_theta(u).
///
/// Every model exposes the same three views: plain evaluation (forward),
/// tape-recorded evaluation for training (record_params + record_apply), and
/// a flat parameter vector (params/set_params) whose layout is the
/// documented block order. forward() composes exactly the same kernels as
/// the taped path, so the two agree bit for bit.
class Model {
 public:
  virtual ~Model() = default;

  virtual std::string kind() const = 0;
  virtual int input_dim() const = 0;
  virtual int output_dim() const = 0;

  /// Parameter blocks in documented order.
  virtual std::vector<Tensor> param_blocks() const = 0;
  virtual void set_param_blocks(const std::vector<Tensor>& blocks) = 0;

  virtual Tensor forward(const Tensor& x) const = 0;

  /// Records parameter blocks (and any model constants) once on a tape.
  virtual TapedModel record_params(Tape& tape) const;

  /// Records one application of the model at input node x, reusing the node
  /// ids from record_params.
  virtual NodeId record_apply(Tape& tape, const TapedModel& taped, NodeId x) const = 0;

  /// Draws every weight entry from Normal(0, 1/fan_in) and zeroes biases.
  virtual void init_gaussian(SplitMix64& rng) = 0;

  std::size_t param_count() const;
  /// Flat view: concatenation of param_blocks row-major, in block order.
  Tensor params() const;
  void set_params(const Tensor& flat);
};

/// Parametric polynomial kernel f(x) = W2[(W1 x + B1)^{on}] + B2 where ^{on}
/// is the n-fold elementwise product of the vector with itself. Block order:
/// W1 (M x D), B1 (M), W2 (E x M), B2 (E).
///
/// B1 lives in R^M: it is added to W1 x which is M-dimensional, so the
/// intermediate dimension is forced even though descriptions of this model
/// sometimes declare B1 in R^D.
class ParametricPolyKernel final : public Model {
 public:
  ParametricPolyKernel(int d_in, int d_out, int m, int order);

  std::string kind() const override { return "kernel"; }
  int input_dim() const override { return d_in_; }
  int output_dim() const override { return d_out_; }
  int intermediate_dim() const { return m_; }
  int order() const { return order_; }

  std::vector<Tensor> param_blocks() const override;
  void set_param_blocks(const std::vector<Tensor>& blocks) override;
  Tensor forward(const Tensor& x) const override;
  NodeId record_apply(Tape& tape, const TapedModel& taped, NodeId x) const override;
  void init_gaussian(SplitMix64& rng) override;

  Tensor w1, b1, w2, b2;

 private:
  int d_in_, d_out_, m_, order_;
};

/// Multilayer perceptron with sigmoid hidden activations and an affine
/// output layer. widths = [D, h1, ..., hk, E]; block order alternates
/// W1, B1, W2, B2, ... layer by layer.
class Mlp final : public Model {
 public:
  explicit Mlp(std::vector<int> widths);
  /// The three-hidden-layer architecture used throughout: [D, w, w, w, E].
  static Mlp standard(int d_in, int d_out, int hidden_width = 100);

  std::string kind() const override { return "mlp"; }
  int input_dim() const override { return widths_.front(); }
  int output_dim() const override { return widths_.back(); }
  const std::vector<int>& widths() const { return widths_; }

  std::vector<Tensor> param_blocks() const override;
  void set_param_blocks(const std::vector<Tensor>& blocks) override;
  Tensor forward(const Tensor& x) const override;
  NodeId record_apply(Tape& tape, const TapedModel& taped, NodeId x) const override;
  void init_gaussian(SplitMix64& rng) override;

 private:
  std::vector<int> widths_;
  std::vector<Tensor> weights_;
  std::vector<Tensor> biases_;
};

/// Direct second-order polynomial feature map: output i is
/// sum_{k>=j} alpha^i_{kj} u_k u_j + sum_k beta^i_k u_k + gamma_i.
/// Implemented as a linear map over the feature vector
/// phi(u) = (S1 u) o (S2 u), where S1/S2 select the (k, j <= k) pairs.
/// Block order: Alpha (N x N(N+1)/2), Beta (N x N), Gamma (N).
class PolyFeatureModel final : public Model {
 public:
  explicit PolyFeatureModel(int n_vars);

  std::string kind() const override { return "polyfeature"; }
  int input_dim() const override { return n_; }
  int output_dim() const override { return n_; }
  int pair_count() const { return n_ * (n_ + 1) / 2; }

  std::vector<Tensor> param_blocks() const override;
  void set_param_blocks(const std::vector<Tensor>& blocks) override;
  Tensor forward(const Tensor& x) const override;
  TapedModel record_params(Tape& tape) const override;
  NodeId record_apply(Tape& tape, const TapedModel& taped, NodeId x) const override;
  void init_gaussian(SplitMix64& rng) override;

  Tensor alpha, beta, gamma;

 private:
  int n_;
  Tensor select_k_, select_j_;  // pair_count x N selection matrices
};

// ---- nonparametric kernel ridge regression ----

/// Polynomial kernel (b <x,y> + c)^d.
double poly_kernel(double b, double c, int d, const Tensor& x, const Tensor& y);

/// Fitted kernel ridge regressor: f(x) = sum_i alpha_i K(x, x_i) with
/// alpha = (K + lambda I)^{-1} y solved by solve_regularized.
struct KernelRidge {
  double b = 1.0;
  double c = 0.0;
  int d = 1;
  double lambda = 0.0;
  std::vector<Tensor> support_x;  // each D x 1
  Tensor alpha;                   // N x E
  int d_in = 0;
  int d_out = 0;
};

KernelRidge ridge_fit(std::span<const Tensor> xs, std::span<const Tensor> ys,
                      double b, double c, int d, double lambda);
Tensor ridge_predict(const KernelRidge& model, const Tensor& x);

/// Model wrapper so a fitted ridge regressor can be saved and simulated like
/// the parametric families. It has no trainable parameters and cannot be
/// recorded on a tape.
class RidgeModel final : public Model {
 public:
  explicit RidgeModel(KernelRidge fitted) : fitted_(std::move(fitted)) {}

  std::string kind() const override { return "ridge"; }
  int input_dim() const override { return fitted_.d_in; }
  int output_dim() const override { return fitted_.d_out; }
  const KernelRidge& fitted() const { return fitted_; }

  std::vector<Tensor> param_blocks() const override { return {}; }
  void set_param_blocks(const std::vector<Tensor>&) override {}
  Tensor forward(const Tensor& x) const override { return ridge_predict(fitted_, x); }
  NodeId record_apply(Tape&, const TapedModel&, NodeId) const override;
  void init_gaussian(SplitMix64&) override {}

 private:
  KernelRidge fitted_;
};

}  // namespace odekernel
