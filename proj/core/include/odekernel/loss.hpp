#pragma once

#include <optional>
#include <span>
#include <vector>

#include "odekernel/integrators.hpp"
#include "odekernel/models.hpp"
#include "odekernel/tape.hpp"
#include "odekernel/trajectory.hpp"

namespace odekernel {

/// Choice of loss discretization plus mini-batch bookkeeping.
struct LossSpec {
  QuadratureScheme scheme;
  /// Windows drawn per SGD step; nullopt trains full-batch (deterministic).
  std::optional<int> batch;
};

/// One loss window: predicts trajectory `trajectory`'s sample start + p from
/// the observations inside [start, start + p].
struct WindowRef {
  int trajectory = 0;
  int start = 0;
};

/// A loss functional recorded once as a tape program and re-evaluated by
/// replay. Evaluation is a pure function of the flat parameter vector and
/// reproduces bit-identical results for identical inputs.
class LossProgram {
 public:
  double eval(const Tensor& flat_params);
  /// Evaluates and runs the reverse pass; writes the flat gradient (resizing
  /// if needed) in the model's documented block order.
  double eval_grad(const Tensor& flat_params, Tensor& grad);

  std::size_t param_count() const { return param_size_; }

  /// Sample indices at which the model RHS was recorded, per window, in the
  /// order windows were built (single data set). Exposes which observations
  /// each scheme actually reads.
  const std::vector<std::vector<int>>& window_rhs_samples() const {
    return window_rhs_samples_;
  }

  Tape& tape() { return tape_; }
  NodeId loss_node() const { return loss_; }

 private:
  friend LossProgram build_regression_loss(const Model&, std::span<const Tensor>,
                                           std::span<const Tensor>);
  friend LossProgram build_ode_loss(const Model&, std::span<const Trajectory>,
                                    const QuadratureScheme&, std::span<const WindowRef>);

  void write_params(const Tensor& flat);

  Tape tape_;
  NodeId loss_ = 0;
  std::vector<NodeId> param_nodes_;
  std::size_t param_size_ = 0;
  std::vector<std::vector<int>> window_rhs_samples_;
};

/// Mean squared error (1/N) sum_i |f_theta(x_i) - y_i|^2, taped.
LossProgram build_regression_loss(const Model& model, std::span<const Tensor> xs,
                                  std::span<const Tensor> ys);

/// Discretized trajectory-matching loss
///   (1/|W|) sum_{i in W} | u(t_{i+p}) - (u(t_{i+p-1}) + G_i) |^2
/// where G_i is the scheme's increment over window i evaluated at observed
/// states only. Both explicit and implicit schemes therefore record acyclic
/// programs: no solve is needed during training. Empty `windows` means every
/// admissible window of every trajectory; multiple trajectories average
/// window losses uniformly.
///
/// Models whose input dimension is dim+1 receive the sample time appended as
/// an extra input coordinate; the default (input dimension == dim) is the
/// autonomous wiring.
LossProgram build_ode_loss(const Model& model, std::span<const Trajectory> trajectories,
                           const QuadratureScheme& scheme,
                           std::span<const WindowRef> windows = {});

/// Accumulated error curve: eps(t_0) = 0 and
/// eps(t_k) = eps(t_{k-1}) + |u(t_k) - u_hat(t_k)|_2.
/// Trajectories must share times and dimension.
std::vector<double> accumulated_error(const Trajectory& truth, const Trajectory& predicted);

/// Mean squared RHS residual (1/N) sum_i |du_i - f_theta(u_i)|^2 against
/// observed derivatives. An evaluation metric only; never trained.
double derivative_residual(const Model& model, const Trajectory& trajectory,
                           std::span<const Tensor> derivatives);

/// All admissible windows for the given trajectories under `scheme`.
std::vector<WindowRef> all_windows(std::span<const Trajectory> trajectories,
                                   const QuadratureScheme& scheme);

}  // namespace odekernel
