#include "odekernel/optimize.hpp"

#include <chrono>
#include <cmath>

namespace odekernel {

int Schedule::total_iterations() const {
  int total = 0;
  for (const Phase& p : phases) total += p.iterations;
  return total;
}

void Schedule::validate() const {
  if (phases.empty()) throw InvalidInputError("schedule: need at least one phase");
  for (const Phase& p : phases) {
    if (p.iterations < 1) throw InvalidInputError("schedule: iteration counts must be >= 1");
    if (!(p.learning_rate > 0)) throw InvalidInputError("schedule: learning rates must be positive");
  }
}

OptimizerKind parse_optimizer(const std::string& name) {
  if (name == "sgd") return OptimizerKind::Sgd;
  if (name == "adam") return OptimizerKind::Adam;
  throw InvalidInputError("unknown optimizer '" + name + "'");
}

std::string optimizer_name(OptimizerKind kind) {
  return kind == OptimizerKind::Sgd ? "sgd" : "adam";
}

Tensor sgd_step(const Tensor& params, const Tensor& grads, double eta) {
  if (params.shape() != grads.shape()) throw DimensionError("sgd_step: shape mismatch");
  if (!(eta > 0)) throw InvalidInputError("sgd_step: eta must be positive");
  Tensor next(params.rows(), params.cols());
  for (std::size_t i = 0; i < params.size(); ++i) next[i] = params[i] - eta * grads[i];
  return next;
}

AdamState::AdamState(std::size_t n, AdamOptions options)
    : m(static_cast<int>(n), 1), v(static_cast<int>(n), 1), options(options) {}

void adam_step(AdamState& state, Tensor& params, const Tensor& grads, double eta) {
  if (params.shape() != grads.shape() || params.size() != state.m.size()) {
    throw DimensionError("adam_step: shape mismatch");
  }
  if (!(eta > 0)) throw InvalidInputError("adam_step: eta must be positive");
  state.step += 1;
  const double b1 = state.options.beta1;
  const double b2 = state.options.beta2;
  const double m_corr = 1.0 - std::pow(b1, static_cast<double>(state.step));
  const double v_corr = 1.0 - std::pow(b2, static_cast<double>(state.step));
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double g = grads[i];
    state.m[i] = b1 * state.m[i] + (1.0 - b1) * g;
    state.v[i] = b2 * state.v[i] + (1.0 - b2) * g * g;
    const double m_hat = state.m[i] / m_corr;
    const double v_hat = state.v[i] / v_corr;
    params[i] -= eta * m_hat / (std::sqrt(v_hat) + state.options.epsilon);
  }
}

TrainingReport run_schedule(const LossGradFn& loss, Model& model, const Schedule& schedule,
                            OptimizerKind optimizer, std::uint64_t seed,
                            std::optional<double> early_stop_eps) {
  schedule.validate();
  const auto t_start = std::chrono::steady_clock::now();

  TrainingReport report;
  report.schedule = schedule;
  report.seed = seed;
  report.loss_history.reserve(static_cast<std::size_t>(schedule.total_iterations()));

  Tensor params = model.params();
  Tensor grad(params.rows(), 1);
  AdamState adam(params.size());

  auto elapsed_ms = [&]() {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() -
                                                     t_start)
        .count();
  };

  std::size_t iteration = 0;
  bool stopped = false;
  for (const Phase& phase : schedule.phases) {
    for (int it = 0; it < phase.iterations && !stopped; ++it, ++iteration) {
      const double value = loss(params, grad);
      if (!std::isfinite(value)) {
        model.set_params(params);
        report.final_loss = value;
        report.wall_ms = elapsed_ms();
        throw TrainingDiverged(iteration, report);
      }
      report.loss_history.push_back(value);
      if (early_stop_eps && value <= *early_stop_eps) {
        stopped = true;
        break;
      }
      if (optimizer == OptimizerKind::Sgd) {
        params = sgd_step(params, grad, phase.learning_rate);
      } else {
        adam_step(adam, params, grad, phase.learning_rate);
      }
    }
    if (stopped) break;
  }

  model.set_params(params);
  report.final_loss = loss(params, grad);
  report.wall_ms = elapsed_ms();
  return report;
}

}  // namespace odekernel
