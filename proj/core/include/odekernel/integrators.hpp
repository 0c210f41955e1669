#pragma once

#include <functional>
#include <span>
#include <string>

#include "odekernel/tensor.hpp"
#include "odekernel/trajectory.hpp"

namespace odekernel {

/// Right-hand side of du/dt = f(t, u); u and the result are column vectors.
using RhsFn = std::function<Tensor(double, const Tensor&)>;
/// Jacobian of an RhsFn with respect to u, returned as an n-by-n matrix.
using RhsJacobianFn = std::function<Tensor(double, const Tensor&)>;

enum class SchemeKind { ForwardEuler, BackwardEuler, AdamsMoulton2 };

/// A numerical integration rule G(a, b, f, {(tau_j, u_j)}) approximating the
/// integral of f over the final observation step of a window, from point m
/// evaluations inside the window.
struct QuadratureScheme {
  SchemeKind kind = SchemeKind::ForwardEuler;

  /// Number of evaluation points m.
  int eval_points() const;
  /// Window size p in observations spanned: the rule predicts u(t_{i+p}).
  int window() const;
  /// Index (into the window's m points) of the state the prediction is
  /// anchored at, u(t_{i+p-1}): the last observation before the predicted
  /// one. For the one-step Euler rules this is the window start; for
  /// Adams-Moulton it is the middle point.
  int anchor() const { return window() - 1; }
  /// True when evaluation points must be uniformly spaced.
  bool requires_uniform_spacing() const { return kind == SchemeKind::AdamsMoulton2; }

  std::string name() const;
  static QuadratureScheme forward_euler() { return {SchemeKind::ForwardEuler}; }
  static QuadratureScheme backward_euler() { return {SchemeKind::BackwardEuler}; }
  static QuadratureScheme adams_moulton2() { return {SchemeKind::AdamsMoulton2}; }
  /// Parses "forward-euler" | "backward-euler" | "adams-moulton".
  static QuadratureScheme parse(const std::string& name);
};

/// Evaluates the increment G over [a, b] so that
///   u_hat(t_{i+p}) = u(t_{i+p-1}) + G.
/// Forward Euler:  G = |b-a| f(a, u(a))          (m=1, point {a})
/// Backward Euler: G = |b-a| f(b, u(b))          (m=1, point {b})
/// Adams-Moulton s=2 over b = a+2h (m=3, uniform points {a, a+h, b}):
///   G = h (5/12 f(b, u(b)) + 2/3 f(a+h, u(a+h)) - 1/12 f(a, u(a))).
/// All states are supplied by the caller (training-data regime), so no
/// implicit solve happens here.
Tensor quadrature(const QuadratureScheme& scheme, double a, double b,
                  std::span<const double> t_points, std::span<const Tensor> u_points,
                  const RhsFn& f);

/// One explicit Euler step u + h f(t, u).
Tensor step_forward_euler(const RhsFn& f, double t, const Tensor& u, double h);

/// One implicit Euler step: solves v = u + h f(t+h, v) by Newton iteration
/// (initial guess u + h f(t, u), residual inf-norm <= 1e-10, at most 50
/// iterations). Throws ConvergenceError with the final residual on failure.
Tensor step_backward_euler(const RhsFn& f, const RhsJacobianFn& jacobian, double t,
                           const Tensor& u, double h);

struct Rk45Options {
  double rtol = 1e-3;
  double atol = 1e-6;
};

/// Adaptive Dormand-Prince 5(4) integration from t0 to t_end, returning the
/// state at each requested sample time. Steps land exactly on sample times
/// (no dense-output interpolation). Per-step error is controlled to
/// atol + rtol * |u| elementwise; the step factor is
/// clamp(0.9 err^{-1/5}, 0.2, 5) with initial step (t_end - t0)/100.
/// Throws ConvergenceError if the controller's step collapses below
/// 1e-14 times the span.
Trajectory integrate_rk45(const RhsFn& f, const Tensor& u0, double t0, double t_end,
                          const Rk45Options& options, std::span<const double> sample_times);

}  // namespace odekernel
