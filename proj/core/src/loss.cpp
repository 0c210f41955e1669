#include "odekernel/loss.hpp"

#include <cmath>
#include <map>
#include <string>

#include "odekernel/errors.hpp"

namespace odekernel {

namespace {

// Appends the time coordinate when the model expects dim+1 inputs.
Tensor model_input(const Model& model, const Tensor& state, double t) {
  if (model.input_dim() == state.rows()) return state;
  if (model.input_dim() == state.rows() + 1) {
    Tensor x(state.rows() + 1, 1);
    for (int i = 0; i < state.rows(); ++i) x[i] = state[i];
    x[state.rows()] = t;
    return x;
  }
  throw DimensionError("ode loss: model input dimension does not match data");
}

NodeId chain_sum(Tape& tape, std::span<const NodeId> terms) {
  NodeId acc = terms[0];
  for (std::size_t i = 1; i < terms.size(); ++i) acc = tape.add(acc, terms[i]);
  return acc;
}

}  // namespace

void LossProgram::write_params(const Tensor& flat) {
  if (flat.size() != param_size_) {
    throw DimensionError("loss eval: flat parameter length mismatch");
  }
  std::size_t at = 0;
  for (NodeId id : param_nodes_) {
    Tensor block = tape_.value(id);
    for (double& v : block.data()) v = flat[at++];
    tape_.set_value(id, block);
  }
}

double LossProgram::eval(const Tensor& flat_params) {
  write_params(flat_params);
  tape_.replay();
  return tape_.value(loss_)[0];
}

double LossProgram::eval_grad(const Tensor& flat_params, Tensor& grad) {
  const double value = eval(flat_params);
  tape_.backward(loss_);
  if (grad.size() != param_size_) grad = Tensor(static_cast<int>(param_size_), 1);
  std::size_t at = 0;
  for (NodeId id : param_nodes_) {
    const Tensor& adj = tape_.adjoint(id);
    for (double v : adj.data()) grad[at++] = v;
  }
  return value;
}

LossProgram build_regression_loss(const Model& model, std::span<const Tensor> xs,
                                  std::span<const Tensor> ys) {
  if (xs.empty() || xs.size() != ys.size()) {
    throw InvalidInputError("regression loss: need matching, non-empty inputs and targets");
  }
  LossProgram program;
  Tape& tape = program.tape_;
  const TapedModel taped = model.record_params(tape);
  program.param_nodes_ = taped.params;
  program.param_size_ = model.param_count();

  std::vector<NodeId> terms;
  terms.reserve(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const NodeId x = tape.constant(xs[i]);
    const NodeId y = tape.constant(ys[i]);
    const NodeId pred = model.record_apply(tape, taped, x);
    const NodeId resid = tape.add(y, tape.scale(pred, -1.0));
    terms.push_back(tape.sum_squares(resid));
  }
  program.loss_ = tape.scale(chain_sum(tape, terms), 1.0 / static_cast<double>(xs.size()));
  return program;
}

std::vector<WindowRef> all_windows(std::span<const Trajectory> trajectories,
                                   const QuadratureScheme& scheme) {
  const int p = scheme.window();
  std::vector<WindowRef> windows;
  for (std::size_t k = 0; k < trajectories.size(); ++k) {
    const int n = static_cast<int>(trajectories[k].sample_count());
    for (int i = 0; i + p < n; ++i) windows.push_back({static_cast<int>(k), i});
  }
  return windows;
}

LossProgram build_ode_loss(const Model& model, std::span<const Trajectory> trajectories,
                           const QuadratureScheme& scheme,
                           std::span<const WindowRef> windows) {
  if (trajectories.empty()) throw InvalidInputError("ode loss: no trajectories");
  for (const Trajectory& traj : trajectories) {
    traj.validate();
    if (scheme.requires_uniform_spacing() && !traj.uniformly_spaced()) {
      throw SchemeError("ode loss: " + scheme.name() + " requires uniformly spaced samples");
    }
  }

  std::vector<WindowRef> all;
  if (windows.empty()) {
    all = all_windows(trajectories, scheme);
    windows = all;
  }
  if (windows.empty()) throw InvalidInputError("ode loss: no admissible windows");

  const int p = scheme.window();
  const int m = scheme.eval_points();
  for (const WindowRef& w : windows) {
    if (w.trajectory < 0 || w.trajectory >= static_cast<int>(trajectories.size())) {
      throw InvalidInputError("ode loss: window references unknown trajectory");
    }
    const int n = static_cast<int>(trajectories[w.trajectory].sample_count());
    if (w.start < 0 || w.start + p >= n) {
      throw InvalidInputError("ode loss: window out of range");
    }
  }

  LossProgram program;
  Tape& tape = program.tape_;
  const TapedModel taped = model.record_params(tape);
  program.param_nodes_ = taped.params;
  program.param_size_ = model.param_count();

  // Model applications are shared between overlapping windows: one
  // evaluation per referenced sample.
  std::map<std::pair<int, int>, NodeId> rhs_nodes;
  std::map<std::pair<int, int>, NodeId> state_consts;
  auto state_node = [&](int traj, int sample) {
    const auto key = std::make_pair(traj, sample);
    auto it = state_consts.find(key);
    if (it != state_consts.end()) return it->second;
    const NodeId id = tape.constant(trajectories[traj].states[sample]);
    state_consts.emplace(key, id);
    return id;
  };
  auto rhs_node = [&](int traj, int sample) {
    const auto key = std::make_pair(traj, sample);
    auto it = rhs_nodes.find(key);
    if (it != rhs_nodes.end()) return it->second;
    const Trajectory& tr = trajectories[traj];
    NodeId x = state_node(traj, sample);
    if (model.input_dim() == tr.dim() + 1) {
      x = tape.constant(model_input(model, tr.states[sample], tr.times[sample]));
    } else if (model.input_dim() != tr.dim()) {
      throw DimensionError("ode loss: model input dimension does not match data");
    }
    const NodeId f = model.record_apply(tape, taped, x);
    rhs_nodes.emplace(key, f);
    return f;
  };

  std::vector<NodeId> terms;
  terms.reserve(windows.size());
  for (const WindowRef& w : windows) {
    const Trajectory& tr = trajectories[w.trajectory];
    const int i = w.start;
    NodeId increment = 0;
    std::vector<int> touched;
    switch (scheme.kind) {
      case SchemeKind::ForwardEuler: {
        const double h = std::abs(tr.times[i + 1] - tr.times[i]);
        increment = tape.scale(rhs_node(w.trajectory, i), h);
        touched = {i};
        break;
      }
      case SchemeKind::BackwardEuler: {
        const double h = std::abs(tr.times[i + 1] - tr.times[i]);
        increment = tape.scale(rhs_node(w.trajectory, i + 1), h);
        touched = {i + 1};
        break;
      }
      case SchemeKind::AdamsMoulton2: {
        const double h = (tr.times[i + 2] - tr.times[i]) / 2.0;
        const NodeId g2 = tape.scale(rhs_node(w.trajectory, i + 2), h * (5.0 / 12.0));
        const NodeId g1 = tape.scale(rhs_node(w.trajectory, i + 1), h * (2.0 / 3.0));
        const NodeId g0 = tape.scale(rhs_node(w.trajectory, i), h * (-1.0 / 12.0));
        increment = tape.add(tape.add(g2, g1), g0);
        touched = {i, i + 1, i + 2};
        break;
      }
    }
    (void)m;
    const NodeId anchor = state_node(w.trajectory, i + scheme.anchor());
    const NodeId target = state_node(w.trajectory, i + p);
    const NodeId predicted = tape.add(anchor, increment);
    const NodeId resid = tape.add(target, tape.scale(predicted, -1.0));
    terms.push_back(tape.sum_squares(resid));
    program.window_rhs_samples_.push_back(std::move(touched));
  }
  program.loss_ =
      tape.scale(chain_sum(tape, terms), 1.0 / static_cast<double>(windows.size()));
  return program;
}

std::vector<double> accumulated_error(const Trajectory& truth, const Trajectory& predicted) {
  truth.validate();
  predicted.validate();
  if (truth.times != predicted.times || truth.dim() != predicted.dim()) {
    throw InvalidInputError("accumulated_error: trajectories must share times and dimension");
  }
  std::vector<double> eps(truth.sample_count(), 0.0);
  for (std::size_t k = 1; k < truth.sample_count(); ++k) {
    eps[k] = eps[k - 1] + norm2(truth.states[k] - predicted.states[k]);
  }
  return eps;
}

double derivative_residual(const Model& model, const Trajectory& trajectory,
                           std::span<const Tensor> derivatives) {
  trajectory.validate();
  if (derivatives.size() != trajectory.sample_count() || derivatives.empty()) {
    throw InvalidInputError("derivative_residual: need one derivative per sample");
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < derivatives.size(); ++i) {
    const Tensor x = model_input(model, trajectory.states[i], trajectory.times[i]);
    const Tensor resid = derivatives[i] - model.forward(x);
    acc += dot(resid, resid);
  }
  return acc / static_cast<double>(derivatives.size());
}

}  // namespace odekernel
