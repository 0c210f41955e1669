#include "odekernel/systems.hpp"

#include <utility>

#include "odekernel/errors.hpp"
#include "odekernel/rng.hpp"

namespace odekernel {

Tensor lorenz96_rhs(const Lorenz96Params& params, const Tensor& u) {
  const int n = params.n;
  if (n < 4) throw InvalidInputError("lorenz96: need at least 4 variables");
  if (u.cols() != 1 || u.rows() != n) {
    throw DimensionError("lorenz96: state dimension mismatch");
  }
  Tensor out(n, 1);
  for (int i = 0; i < n; ++i) {
    const int ip1 = (i + 1) % n;
    const int im1 = (i - 1 + n) % n;
    const int im2 = (i - 2 + n) % n;
    // Association mirrors the taped composition so the two agree bitwise.
    out[i] = (u[ip1] - u[im2]) * u[im1] + (params.f - u[i]);
  }
  return out;
}

Tensor sample_initial_conditions(const Lorenz96Params& params, std::uint64_t seed) {
  SplitMix64 rng(seed);
  Tensor u0(params.n, 1);
  for (int i = 0; i < params.n; ++i) u0[i] = rng.next_normal(0.0, 3.0);
  return u0;
}

double cubic_target(double x) { return (x - 1.0) * (x + 1.0) * (x + 0.5); }

RhsFn reduce_order(int m, HighOrderRhs g) {
  if (m < 2) throw InvalidInputError("reduce_order: order must be >= 2");
  return [m, g = std::move(g)](double t, const Tensor& stacked) {
    if (stacked.rows() % m != 0) {
      throw DimensionError("reduce_order: state dimension not divisible by order");
    }
    const int d = stacked.rows() / m;
    Tensor out(stacked.rows(), 1);
    // d/dt (u, v1, ..., v_{m-1}) = (v1, ..., v_{m-1}, g).
    for (int i = 0; i < (m - 1) * d; ++i) out[i] = stacked[d + i];
    const Tensor top = g(t, stacked);
    if (top.rows() != d || top.cols() != 1) {
      throw DimensionError("reduce_order: top derivative has wrong dimension");
    }
    for (int i = 0; i < d; ++i) out[(m - 1) * d + i] = top[i];
    return out;
  };
}

namespace {

Tensor rotation(int n, int offset) {
  // R u has entries (R u)_i = u_{(i + offset) mod n}.
  Tensor r(n, n);
  for (int i = 0; i < n; ++i) r(i, ((i + offset) % n + n) % n) = 1.0;
  return r;
}

}  // namespace

Lorenz96Model::Lorenz96Model(Lorenz96Params params)
    : params_(params),
      shift_p1_(rotation(params.n, 1)),
      shift_m2_(rotation(params.n, -2)),
      shift_m1_(rotation(params.n, -1)),
      forcing_(Tensor::filled(params.n, 1, params.f)) {
  if (params.n < 4) throw InvalidInputError("lorenz96: need at least 4 variables");
}

TapedModel Lorenz96Model::record_params(Tape& tape) const {
  TapedModel taped;
  taped.constants.push_back(tape.constant(shift_p1_));
  taped.constants.push_back(tape.constant(shift_m2_));
  taped.constants.push_back(tape.constant(shift_m1_));
  taped.constants.push_back(tape.constant(forcing_));
  return taped;
}

NodeId Lorenz96Model::record_apply(Tape& tape, const TapedModel& taped, NodeId x) const {
  const NodeId up1 = tape.matmul(taped.constants[0], x);
  const NodeId um2 = tape.matmul(taped.constants[1], x);
  const NodeId um1 = tape.matmul(taped.constants[2], x);
  const NodeId advect = tape.hadamard(tape.add(up1, tape.scale(um2, -1.0)), um1);
  return tape.add(advect, tape.add(tape.scale(x, -1.0), taped.constants[3]));
}

}  // namespace odekernel
