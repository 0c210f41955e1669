#include "odekernel/models.hpp"

#include <cmath>
#include <cstddef>
#include <utility>

#include "odekernel/errors.hpp"

namespace odekernel {

namespace {

void fill_gaussian(Tensor& t, double variance, SplitMix64& rng) {
  const double stddev = std::sqrt(variance);
  for (double& v : t.data()) v = rng.next_normal(0.0, stddev);
}

void require_column(const Tensor& x, int dim, const char* who) {
  if (x.cols() != 1 || x.rows() != dim) {
    throw DimensionError(std::string(who) + ": expected a " + std::to_string(dim) +
                         "-vector input");
  }
}

}  // namespace

// ---- Model base ----

TapedModel Model::record_params(Tape& tape) const {
  TapedModel taped;
  for (const Tensor& block : param_blocks()) {
    taped.params.push_back(tape.parameter(block));
  }
  return taped;
}

std::size_t Model::param_count() const {
  std::size_t n = 0;
  for (const Tensor& block : param_blocks()) n += block.size();
  return n;
}

Tensor Model::params() const {
  Tensor flat(static_cast<int>(param_count()), 1);
  std::size_t at = 0;
  for (const Tensor& block : param_blocks()) {
    for (double v : block.data()) flat[at++] = v;
  }
  return flat;
}

void Model::set_params(const Tensor& flat) {
  if (flat.size() != param_count()) {
    throw DimensionError("set_params: expected " + std::to_string(param_count()) +
                         " values, got " + std::to_string(flat.size()));
  }
  std::vector<Tensor> blocks = param_blocks();
  std::size_t at = 0;
  for (Tensor& block : blocks) {
    for (double& v : block.data()) v = flat[at++];
  }
  set_param_blocks(blocks);
}

// ---- ParametricPolyKernel ----

ParametricPolyKernel::ParametricPolyKernel(int d_in, int d_out, int m, int order)
    : w1(m, d_in), b1(m, 1), w2(d_out, m), b2(d_out, 1),
      d_in_(d_in), d_out_(d_out), m_(m), order_(order) {
  if (d_in < 1 || d_out < 1 || m < 1) {
    throw InvalidInputError("kernel model: dimensions must be positive");
  }
  if (order < 2) throw InvalidInputError("kernel model: order must be >= 2");
}

std::vector<Tensor> ParametricPolyKernel::param_blocks() const {
  return {w1, b1, w2, b2};
}

void ParametricPolyKernel::set_param_blocks(const std::vector<Tensor>& blocks) {
  w1 = blocks[0];
  b1 = blocks[1];
  w2 = blocks[2];
  b2 = blocks[3];
}

Tensor ParametricPolyKernel::forward(const Tensor& x) const {
  require_column(x, d_in_, "kernel forward");
  return add(matmul(w2, elementwise_power(add(matmul(w1, x), b1), order_)), b2);
}

NodeId ParametricPolyKernel::record_apply(Tape& tape, const TapedModel& taped,
                                          NodeId x) const {
  const NodeId nw1 = taped.params[0], nb1 = taped.params[1];
  const NodeId nw2 = taped.params[2], nb2 = taped.params[3];
  const NodeId affine = tape.add(tape.matmul(nw1, x), nb1);
  return tape.add(tape.matmul(nw2, tape.power(affine, order_)), nb2);
}

void ParametricPolyKernel::init_gaussian(SplitMix64& rng) {
  fill_gaussian(w1, 1.0 / d_in_, rng);
  b1.fill(0.0);
  fill_gaussian(w2, 1.0 / m_, rng);
  b2.fill(0.0);
}

// ---- Mlp ----

Mlp::Mlp(std::vector<int> widths) : widths_(std::move(widths)) {
  if (widths_.size() < 2) throw InvalidInputError("mlp: need at least input and output widths");
  for (int w : widths_) {
    if (w < 1) throw InvalidInputError("mlp: widths must be positive");
  }
  for (std::size_t l = 0; l + 1 < widths_.size(); ++l) {
    weights_.emplace_back(widths_[l + 1], widths_[l]);
    biases_.emplace_back(widths_[l + 1], 1);
  }
}

Mlp Mlp::standard(int d_in, int d_out, int hidden_width) {
  return Mlp({d_in, hidden_width, hidden_width, hidden_width, d_out});
}

std::vector<Tensor> Mlp::param_blocks() const {
  std::vector<Tensor> blocks;
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    blocks.push_back(weights_[l]);
    blocks.push_back(biases_[l]);
  }
  return blocks;
}

void Mlp::set_param_blocks(const std::vector<Tensor>& blocks) {
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    weights_[l] = blocks[2 * l];
    biases_[l] = blocks[2 * l + 1];
  }
}

Tensor Mlp::forward(const Tensor& x) const {
  require_column(x, widths_.front(), "mlp forward");
  Tensor a = x;
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    Tensor z = add(matmul(weights_[l], a), biases_[l]);
    a = (l + 1 < weights_.size()) ? sigmoid(z) : std::move(z);
  }
  return a;
}

NodeId Mlp::record_apply(Tape& tape, const TapedModel& taped, NodeId x) const {
  NodeId a = x;
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    const NodeId z = tape.add(tape.matmul(taped.params[2 * l], a), taped.params[2 * l + 1]);
    a = (l + 1 < weights_.size()) ? tape.sigmoid(z) : z;
  }
  return a;
}

void Mlp::init_gaussian(SplitMix64& rng) {
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    fill_gaussian(weights_[l], 1.0 / widths_[l], rng);
    biases_[l].fill(0.0);
  }
}

// ---- PolyFeatureModel ----

PolyFeatureModel::PolyFeatureModel(int n_vars)
    : alpha(n_vars, n_vars * (n_vars + 1) / 2),
      beta(n_vars, n_vars),
      gamma(n_vars, 1),
      n_(n_vars),
      select_k_(n_vars * (n_vars + 1) / 2, n_vars),
      select_j_(n_vars * (n_vars + 1) / 2, n_vars) {
  if (n_vars < 1) throw InvalidInputError("polyfeature: n_vars must be positive");
  int pair = 0;
  for (int k = 0; k < n_; ++k) {
    for (int j = 0; j <= k; ++j) {
      select_k_(pair, k) = 1.0;
      select_j_(pair, j) = 1.0;
      ++pair;
    }
  }
}

std::vector<Tensor> PolyFeatureModel::param_blocks() const {
  return {alpha, beta, gamma};
}

void PolyFeatureModel::set_param_blocks(const std::vector<Tensor>& blocks) {
  alpha = blocks[0];
  beta = blocks[1];
  gamma = blocks[2];
}

Tensor PolyFeatureModel::forward(const Tensor& x) const {
  require_column(x, n_, "polyfeature forward");
  const Tensor phi = hadamard(matmul(select_k_, x), matmul(select_j_, x));
  return add(add(matmul(alpha, phi), matmul(beta, x)), gamma);
}

TapedModel PolyFeatureModel::record_params(Tape& tape) const {
  TapedModel taped = Model::record_params(tape);
  taped.constants.push_back(tape.constant(select_k_));
  taped.constants.push_back(tape.constant(select_j_));
  return taped;
}

NodeId PolyFeatureModel::record_apply(Tape& tape, const TapedModel& taped, NodeId x) const {
  const NodeId sk = taped.constants[0], sj = taped.constants[1];
  const NodeId phi = tape.hadamard(tape.matmul(sk, x), tape.matmul(sj, x));
  return tape.add(tape.add(tape.matmul(taped.params[0], phi),
                           tape.matmul(taped.params[1], x)),
                  taped.params[2]);
}

void PolyFeatureModel::init_gaussian(SplitMix64& rng) {
  const double fan_in = static_cast<double>(pair_count() + n_);
  fill_gaussian(alpha, 1.0 / fan_in, rng);
  fill_gaussian(beta, 1.0 / fan_in, rng);
  gamma.fill(0.0);
}

// ---- kernel ridge regression ----

double poly_kernel(double b, double c, int d, const Tensor& x, const Tensor& y) {
  double base = b * dot(x, y) + c;
  double acc = base;
  for (int k = 1; k < d; ++k) acc *= base;
  return acc;
}

KernelRidge ridge_fit(std::span<const Tensor> xs, std::span<const Tensor> ys,
                      double b, double c, int d, double lambda) {
  if (xs.empty() || xs.size() != ys.size()) {
    throw InvalidInputError("ridge_fit: need matching, non-empty inputs and targets");
  }
  if (d < 1) throw InvalidInputError("ridge_fit: degree must be >= 1");
  const int n = static_cast<int>(xs.size());
  const int e = static_cast<int>(ys.front().size());

  Tensor gram(n, n);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) gram(j, i) = poly_kernel(b, c, d, xs[j], xs[i]);
  }
  Tensor targets(n, e);
  for (int i = 0; i < n; ++i) {
    for (int k = 0; k < e; ++k) targets(i, k) = ys[i][k];
  }

  KernelRidge model;
  model.b = b;
  model.c = c;
  model.d = d;
  model.lambda = lambda;
  model.support_x.assign(xs.begin(), xs.end());
  model.alpha = solve_regularized(gram, lambda, targets);
  model.d_in = static_cast<int>(xs.front().size());
  model.d_out = e;
  return model;
}

Tensor ridge_predict(const KernelRidge& model, const Tensor& x) {
  Tensor out(model.d_out, 1);
  for (std::size_t i = 0; i < model.support_x.size(); ++i) {
    const double k = poly_kernel(model.b, model.c, model.d, x, model.support_x[i]);
    for (int e = 0; e < model.d_out; ++e) {
      out[e] += model.alpha(static_cast<int>(i), e) * k;
    }
  }
  return out;
}

NodeId RidgeModel::record_apply(Tape&, const TapedModel&, NodeId) const {
  throw UnsupportedOpError("ridge model: tape-recorded evaluation is not supported");
}

}  // namespace odekernel
