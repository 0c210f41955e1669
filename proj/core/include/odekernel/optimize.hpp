#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "odekernel/errors.hpp"
#include "odekernel/models.hpp"
#include "odekernel/tensor.hpp"

namespace odekernel {

struct Phase {
  int iterations = 0;
  double learning_rate = 0.0;
};

/// Ordered training phases executed back to back.
struct Schedule {
  std::vector<Phase> phases;

  int total_iterations() const;
  /// Throws InvalidInputError unless there is at least one phase, every
  /// phase has iterations >= 1 and every learning rate is positive.
  void validate() const;
};

enum class OptimizerKind { Sgd, Adam };
OptimizerKind parse_optimizer(const std::string& name);
std::string optimizer_name(OptimizerKind kind);

/// Plain gradient step theta - eta * g.
Tensor sgd_step(const Tensor& params, const Tensor& grads, double eta);

struct AdamOptions {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// Adam first/second moment state over a flat parameter vector.
struct AdamState {
  Tensor m;
  Tensor v;
  std::int64_t step = 0;
  AdamOptions options;

  explicit AdamState(std::size_t n, AdamOptions options = {});
};

/// Standard bias-corrected Adam update, in place.
void adam_step(AdamState& state, Tensor& params, const Tensor& grads, double eta);

struct TrainingReport {
  double final_loss = 0.0;
  std::vector<double> loss_history;  // J(theta_i) before each step
  Schedule schedule;
  std::uint64_t seed = 0;
  double wall_ms = 0.0;
};

/// Divergence error that retains the partial training state for reporting.
class TrainingDiverged : public DivergenceError {
 public:
  TrainingDiverged(std::size_t iteration, TrainingReport partial)
      : DivergenceError("training diverged: non-finite loss at iteration " +
                            std::to_string(iteration),
                        iteration),
        partial(std::move(partial)) {}
  TrainingReport partial;
};

using LossGradFn = std::function<double(const Tensor& params, Tensor& grad)>;

/// Runs the schedule's phases in order starting from the model's current
/// parameters, recording the loss at every iteration. Stops early once the
/// loss falls to early_stop_eps or below (checked before stepping, so a
/// model already at tolerance returns after zero steps). Writes the final
/// parameters back into the model; final_loss is the loss re-evaluated at
/// those parameters.
TrainingReport run_schedule(const LossGradFn& loss, Model& model, const Schedule& schedule,
                            OptimizerKind optimizer, std::uint64_t seed,
                            std::optional<double> early_stop_eps = std::nullopt);

}  // namespace odekernel
