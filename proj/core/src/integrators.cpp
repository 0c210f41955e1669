#include "odekernel/integrators.hpp"

#include <algorithm>
#include <cmath>

#include "odekernel/errors.hpp"

namespace odekernel {

void Trajectory::validate() const {
  if (times.size() != states.size()) {
    throw InvalidInputError("trajectory: times and states lengths differ");
  }
  const int d = dim();
  for (std::size_t i = 0; i < states.size(); ++i) {
    if (states[i].cols() != 1 || states[i].rows() != d) {
      throw InvalidInputError("trajectory: inconsistent state dimension");
    }
    if (i > 0 && !(times[i] > times[i - 1])) {
      throw InvalidInputError("trajectory: times must be strictly increasing");
    }
  }
}

bool Trajectory::uniformly_spaced(double rel_tol) const {
  if (times.size() < 3) return true;
  const double h0 = times[1] - times[0];
  for (std::size_t i = 2; i < times.size(); ++i) {
    if (std::abs((times[i] - times[i - 1]) - h0) > rel_tol * std::abs(h0)) return false;
  }
  return true;
}

int QuadratureScheme::eval_points() const {
  return kind == SchemeKind::AdamsMoulton2 ? 3 : 1;
}

int QuadratureScheme::window() const {
  return kind == SchemeKind::AdamsMoulton2 ? 2 : 1;
}

std::string QuadratureScheme::name() const {
  switch (kind) {
    case SchemeKind::ForwardEuler: return "forward-euler";
    case SchemeKind::BackwardEuler: return "backward-euler";
    case SchemeKind::AdamsMoulton2: return "adams-moulton";
  }
  return "?";
}

QuadratureScheme QuadratureScheme::parse(const std::string& name) {
  if (name == "forward-euler") return forward_euler();
  if (name == "backward-euler") return backward_euler();
  if (name == "adams-moulton" || name == "adams-moulton-2") return adams_moulton2();
  throw InvalidInputError("unknown scheme '" + name + "'");
}

Tensor quadrature(const QuadratureScheme& scheme, double a, double b,
                  std::span<const double> t_points, std::span<const Tensor> u_points,
                  const RhsFn& f) {
  if (static_cast<int>(t_points.size()) != scheme.eval_points() ||
      u_points.size() != t_points.size()) {
    throw SchemeError("quadrature: " + scheme.name() + " expects " +
                      std::to_string(scheme.eval_points()) + " evaluation points");
  }
  switch (scheme.kind) {
    case SchemeKind::ForwardEuler:
      return std::abs(b - a) * f(t_points[0], u_points[0]);
    case SchemeKind::BackwardEuler:
      return std::abs(b - a) * f(t_points[0], u_points[0]);
    case SchemeKind::AdamsMoulton2: {
      const double h = (b - a) / 2.0;
      const double h01 = t_points[1] - t_points[0];
      const double h12 = t_points[2] - t_points[1];
      if (std::abs(h01 - h12) > 1e-9 * std::abs(h)) {
        throw SchemeError("quadrature: adams-moulton requires uniformly spaced points");
      }
      return h * ((5.0 / 12.0) * f(t_points[2], u_points[2]) +
                  (2.0 / 3.0) * f(t_points[1], u_points[1]) +
                  (-1.0 / 12.0) * f(t_points[0], u_points[0]));
    }
  }
  throw SchemeError("quadrature: unknown scheme");
}

Tensor step_forward_euler(const RhsFn& f, double t, const Tensor& u, double h) {
  if (h <= 0) throw InvalidInputError("step_forward_euler: h must be positive");
  return u + h * f(t, u);
}

Tensor step_backward_euler(const RhsFn& f, const RhsJacobianFn& jacobian, double t,
                           const Tensor& u, double h) {
  if (h <= 0) throw InvalidInputError("step_backward_euler: h must be positive");
  const double t_next = t + h;
  Tensor v = u + h * f(t, u);
  double residual_norm = 0.0;
  for (int iter = 0; iter < 50; ++iter) {
    const Tensor residual = v - u - h * f(t_next, v);
    residual_norm = norm_inf(residual);
    if (residual_norm <= 1e-10) return v;
    Tensor newton_matrix = scale(jacobian(t_next, v), -h);
    for (int i = 0; i < newton_matrix.rows(); ++i) newton_matrix(i, i) += 1.0;
    v = v - solve(newton_matrix, residual);
  }
  const Tensor residual = v - u - h * f(t_next, v);
  residual_norm = norm_inf(residual);
  if (residual_norm <= 1e-10) return v;
  throw ConvergenceError("step_backward_euler: Newton did not converge", residual_norm);
}

namespace {

// Dormand-Prince 5(4) tableau.
constexpr double kC[7] = {0.0, 1.0 / 5, 3.0 / 10, 4.0 / 5, 8.0 / 9, 1.0, 1.0};
constexpr double kA[7][6] = {
    {},
    {1.0 / 5},
    {3.0 / 40, 9.0 / 40},
    {44.0 / 45, -56.0 / 15, 32.0 / 9},
    {19372.0 / 6561, -25360.0 / 2187, 64448.0 / 6561, -212.0 / 729},
    {9017.0 / 3168, -355.0 / 33, 46732.0 / 5247, 49.0 / 176, -5103.0 / 18656},
    {35.0 / 384, 0.0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84},
};
// Difference between the 5th- and 4th-order weights (k7 term last).
constexpr double kE[7] = {
    35.0 / 384 - 5179.0 / 57600,
    0.0,
    500.0 / 1113 - 7571.0 / 16695,
    125.0 / 192 - 393.0 / 640,
    -2187.0 / 6784 + 92097.0 / 339200,
    11.0 / 84 - 187.0 / 2100,
    -1.0 / 40,
};

}  // namespace

Trajectory integrate_rk45(const RhsFn& f, const Tensor& u0, double t0, double t_end,
                          const Rk45Options& options, std::span<const double> sample_times) {
  if (u0.cols() != 1) throw InvalidInputError("integrate_rk45: u0 must be a column vector");
  if (t_end < t0) throw InvalidInputError("integrate_rk45: t_end before t0");
  for (std::size_t i = 0; i < sample_times.size(); ++i) {
    if (sample_times[i] < t0 || sample_times[i] > t_end ||
        (i > 0 && sample_times[i] < sample_times[i - 1])) {
      throw InvalidInputError("integrate_rk45: sample times must be sorted within [t0, t_end]");
    }
  }

  Trajectory out;
  const int n = u0.rows();
  double t = t0;
  Tensor u = u0;
  std::size_t next_sample = 0;

  auto emit_samples_at = [&](double when) {
    while (next_sample < sample_times.size() && sample_times[next_sample] <= when) {
      out.times.push_back(sample_times[next_sample]);
      out.states.push_back(u);
      ++next_sample;
    }
  };

  emit_samples_at(t);
  if (next_sample >= sample_times.size()) return out;

  const double span = t_end - t0;
  const double min_step = 1e-14 * span;
  double h = span / 100.0;
  Tensor k[7];
  k[0] = f(t, u);
  if (!k[0].all_finite()) throw NumericError("integrate_rk45: non-finite derivative");

  while (next_sample < sample_times.size()) {
    if (h < min_step) {
      throw ConvergenceError("integrate_rk45: step size underflow (stiffness)", h);
    }
    const double target = sample_times[next_sample];
    const double remaining = target - t;
    const bool lands_on_target = h >= remaining;
    const double h_step = lands_on_target ? remaining : h;

    Tensor stage = u;
    for (int s = 1; s < 7; ++s) {
      stage = u;
      for (int j = 0; j < s; ++j) {
        if (kA[s][j] != 0.0) stage = stage + (h_step * kA[s][j]) * k[j];
      }
      k[s] = f(t + kC[s] * h_step, stage);
    }
    const Tensor& u_new = stage;  // stage 7 input is the 5th-order solution

    double err = 0.0;
    for (int i = 0; i < n; ++i) {
      double e = 0.0;
      for (int s = 0; s < 7; ++s) e += kE[s] * k[s][i];
      e *= h_step;
      const double tol =
          options.atol + options.rtol * std::max(std::abs(u[i]), std::abs(u_new[i]));
      err = std::max(err, std::abs(e) / tol);
    }

    const double factor =
        err == 0.0 ? 5.0 : std::min(5.0, std::max(0.2, 0.9 * std::pow(err, -0.2)));
    if (err <= 1.0) {
      t = lands_on_target ? target : t + h_step;
      u = u_new;
      if (!u.all_finite()) throw NumericError("integrate_rk45: non-finite state");
      k[0] = k[6];  // first-same-as-last
      if (lands_on_target) emit_samples_at(t);
    }
    h = h_step * factor;
  }
  return out;
}

}  // namespace odekernel
