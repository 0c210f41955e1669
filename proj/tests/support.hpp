#pragma once

#include <cmath>
#include <functional>
#include <vector>

#include "odekernel/rng.hpp"
#include "odekernel/tensor.hpp"

namespace odekernel::testing {

inline Tensor random_tensor(int rows, int cols, SplitMix64& rng, double scale = 1.0) {
  Tensor t(rows, cols);
  for (double& v : t.data()) v = scale * (2.0 * rng.next_uniform() - 1.0);
  return t;
}

inline Tensor random_spd(int n, SplitMix64& rng) {
  const Tensor a = random_tensor(n, n, rng);
  Tensor spd = matmul(transpose(a), a);
  for (int i = 0; i < n; ++i) spd(i, i) += static_cast<double>(n);
  return spd;
}

/// Relative-error check with an absolute floor: passes when
/// |a - b| <= max(rel * max(|a|, |b|), floor).
inline bool close_rel(double a, double b, double rel, double floor = 1e-8) {
  const double diff = std::abs(a - b);
  return diff <= std::max(rel * std::max(std::abs(a), std::abs(b)), floor);
}

inline double max_abs_diff(const Tensor& a, const Tensor& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

/// Central finite-difference gradient of a scalar function of a flat
/// parameter vector.
inline Tensor fd_gradient(const std::function<double(const Tensor&)>& f, const Tensor& params,
                          double step = 1e-6) {
  Tensor grad(params.rows(), params.cols());
  Tensor perturbed = params;
  for (std::size_t i = 0; i < params.size(); ++i) {
    perturbed[i] = params[i] + step;
    const double hi = f(perturbed);
    perturbed[i] = params[i] - step;
    const double lo = f(perturbed);
    perturbed[i] = params[i];
    grad[i] = (hi - lo) / (2.0 * step);
  }
  return grad;
}

/// True when every component of the reverse-mode gradient matches the finite
/// difference one to `rel` relative error with an absolute floor.
inline bool gradients_match(const Tensor& reverse, const Tensor& fd, double rel = 1e-5,
                            double floor = 1e-8) {
  if (reverse.size() != fd.size()) return false;
  for (std::size_t i = 0; i < reverse.size(); ++i) {
    if (!close_rel(reverse[i], fd[i], rel, floor)) return false;
  }
  return true;
}

}  // namespace odekernel::testing
