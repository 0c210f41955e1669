#pragma once

#include <vector>

#include "odekernel/tensor.hpp"

namespace odekernel {

/// Time-stamped state samples {(t_i, u(t_i))}. States are column vectors of
/// a shared dimension and times are strictly increasing.
struct Trajectory {
  std::vector<double> times;
  std::vector<Tensor> states;

  int dim() const { return states.empty() ? 0 : states.front().rows(); }
  std::size_t sample_count() const { return times.size(); }

  /// Throws InvalidInputError if sizes disagree, states mix dimensions, or
  /// times are not strictly increasing.
  void validate() const;

  /// True when consecutive spacings agree to a relative tolerance.
  bool uniformly_spaced(double rel_tol = 1e-9) const;
};

}  // namespace odekernel
