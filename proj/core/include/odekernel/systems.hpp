#pragma once

#include <cstdint>
#include <functional>

#include "odekernel/integrators.hpp"
#include "odekernel/models.hpp"
#include "odekernel/tensor.hpp"

namespace odekernel {

/// Lorenz-Emanuel (Lorenz-96) system du_i/dt = (u_{i+1} - u_{i-2}) u_{i-1} - u_i + F
/// with periodic indexing u_{N+1} = u_1, u_0 = u_N, u_{-1} = u_{N-1}.
struct Lorenz96Params {
  int n = 8;
  double f = 5.0;
};

/// Componentwise RHS with periodic indexing. Requires n >= 4 so the three
/// coupled neighbour indices stay distinct.
Tensor lorenz96_rhs(const Lorenz96Params& params, const Tensor& u);

/// Independent draws u_i(0) ~ Normal(0, sigma=3), seeded.
Tensor sample_initial_conditions(const Lorenz96Params& params, std::uint64_t seed);

/// The cubic regression target (x-1)(x+1)(x+0.5).
double cubic_target(double x);

/// m-th derivative closure for reduce_order: given t and the stacked state
/// [u, v1, ..., v_{m-1}], returns d^m u / dt^m (dimension = stacked dim / m).
using HighOrderRhs = std::function<Tensor(double, const Tensor&)>;

/// Converts an m-th order equation d^m u/dt^m = g(t, u, du/dt, ...) into a
/// first-order system over the stacked state (u, v1, ..., v_{m-1}):
/// the returned RHS is (v1, ..., v_{m-1}, g(t, stacked)).
RhsFn reduce_order(int m, HighOrderRhs g);

/// The true Lorenz-96 vector field wrapped as a (non-trainable) Model, so it
/// can be simulated, saved, and tape-recorded like inferred models. The
/// taped composition uses constant rotation matrices for the periodic index
/// shifts and reproduces the plain RHS bit for bit.
class Lorenz96Model final : public Model {
 public:
  explicit Lorenz96Model(Lorenz96Params params);

  std::string kind() const override { return "lorenz96"; }
  int input_dim() const override { return params_.n; }
  int output_dim() const override { return params_.n; }
  const Lorenz96Params& system() const { return params_; }

  std::vector<Tensor> param_blocks() const override { return {}; }
  void set_param_blocks(const std::vector<Tensor>&) override {}
  Tensor forward(const Tensor& x) const override { return lorenz96_rhs(params_, x); }
  TapedModel record_params(Tape& tape) const override;
  NodeId record_apply(Tape& tape, const TapedModel& taped, NodeId x) const override;
  void init_gaussian(SplitMix64&) override {}

 private:
  Lorenz96Params params_;
  Tensor shift_p1_, shift_m2_, shift_m1_;  // rotation matrices R u = (u_{i+s})_i
  Tensor forcing_;
};

}  // namespace odekernel
