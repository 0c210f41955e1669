#include "odekernel/tape.hpp"

#include <cmath>
#include <string>
#include <utility>

#include "odekernel/errors.hpp"

namespace odekernel {

namespace {

void require_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (a.shape() != b.shape()) {
    throw DimensionError(std::string(op) + ": shape mismatch");
  }
}

// dst += adj * b^T, the left-operand adjoint of a matmul.
void acc_matmul_left(const Tensor& adj, const Tensor& b, Tensor& dst) {
  const int m = dst.rows(), k = dst.cols(), n = adj.cols();
  for (int i = 0; i < m; ++i) {
    for (int l = 0; l < k; ++l) {
      double acc = 0.0;
      for (int j = 0; j < n; ++j) acc += adj(i, j) * b(l, j);
      dst(i, l) += acc;
    }
  }
}

// dst += a^T * adj, the right-operand adjoint of a matmul.
void acc_matmul_right(const Tensor& a, const Tensor& adj, Tensor& dst) {
  const int k = dst.rows(), n = dst.cols(), m = a.rows();
  for (int l = 0; l < k; ++l) {
    for (int j = 0; j < n; ++j) {
      double acc = 0.0;
      for (int i = 0; i < m; ++i) acc += a(i, l) * adj(i, j);
      dst(l, j) += acc;
    }
  }
}

void acc_elementwise(const Tensor& src, Tensor& dst) {
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
}

}  // namespace

void Tape::check_input(NodeId id) const {
  if (id >= nodes_.size()) {
    throw InvalidInputError("tape: input node not on tape yet");
  }
}

NodeId Tape::push(Node node) {
  nodes_.push_back(std::move(node));
  adjoints_ready_ = false;
  return static_cast<NodeId>(nodes_.size() - 1);
}

NodeId Tape::constant(Tensor value) {
  Node n;
  n.kind = OpKind::Constant;
  n.value = std::move(value);
  return push(std::move(n));
}

NodeId Tape::parameter(Tensor value) {
  Node n;
  n.kind = OpKind::Parameter;
  n.dynamic = true;
  n.value = std::move(value);
  return push(std::move(n));
}

NodeId Tape::add(NodeId a, NodeId b) {
  check_input(a);
  check_input(b);
  require_shape(nodes_[a].value, nodes_[b].value, "tape add");
  Node n;
  n.kind = OpKind::Add;
  n.a = a;
  n.b = b;
  n.dynamic = nodes_[a].dynamic || nodes_[b].dynamic;
  n.value = Tensor(nodes_[a].value.rows(), nodes_[a].value.cols());
  compute(n);
  return push(std::move(n));
}

NodeId Tape::matmul(NodeId a, NodeId b) {
  check_input(a);
  check_input(b);
  if (nodes_[a].value.cols() != nodes_[b].value.rows()) {
    throw DimensionError("tape matmul: inner dimensions differ");
  }
  Node n;
  n.kind = OpKind::MatMul;
  n.a = a;
  n.b = b;
  n.dynamic = nodes_[a].dynamic || nodes_[b].dynamic;
  n.value = Tensor(nodes_[a].value.rows(), nodes_[b].value.cols());
  compute(n);
  return push(std::move(n));
}

NodeId Tape::hadamard(NodeId a, NodeId b) {
  check_input(a);
  check_input(b);
  require_shape(nodes_[a].value, nodes_[b].value, "tape hadamard");
  Node n;
  n.kind = OpKind::Hadamard;
  n.a = a;
  n.b = b;
  n.dynamic = nodes_[a].dynamic || nodes_[b].dynamic;
  n.value = Tensor(nodes_[a].value.rows(), nodes_[a].value.cols());
  compute(n);
  return push(std::move(n));
}

NodeId Tape::scale(NodeId a, double factor) {
  check_input(a);
  Node n;
  n.kind = OpKind::Scale;
  n.a = a;
  n.b = a;
  n.attr = factor;
  n.dynamic = nodes_[a].dynamic;
  n.value = Tensor(nodes_[a].value.rows(), nodes_[a].value.cols());
  compute(n);
  return push(std::move(n));
}

NodeId Tape::sigmoid(NodeId a) {
  check_input(a);
  Node n;
  n.kind = OpKind::Sigmoid;
  n.a = a;
  n.b = a;
  n.dynamic = nodes_[a].dynamic;
  n.value = Tensor(nodes_[a].value.rows(), nodes_[a].value.cols());
  compute(n);
  return push(std::move(n));
}

NodeId Tape::power(NodeId a, int exponent) {
  check_input(a);
  if (exponent < 1) throw InvalidInputError("tape power: exponent must be >= 1");
  Node n;
  n.kind = OpKind::Power;
  n.a = a;
  n.b = a;
  n.attr = static_cast<double>(exponent);
  n.dynamic = nodes_[a].dynamic;
  n.value = Tensor(nodes_[a].value.rows(), nodes_[a].value.cols());
  compute(n);
  return push(std::move(n));
}

NodeId Tape::sum_squares(NodeId a) {
  check_input(a);
  Node n;
  n.kind = OpKind::SumSquares;
  n.a = a;
  n.b = a;
  n.dynamic = nodes_[a].dynamic;
  n.value = Tensor(1, 1);
  compute(n);
  return push(std::move(n));
}

NodeId Tape::mean(NodeId a) {
  check_input(a);
  if (nodes_[a].value.size() == 0) throw InvalidInputError("tape mean: empty input");
  Node n;
  n.kind = OpKind::Mean;
  n.a = a;
  n.b = a;
  n.dynamic = nodes_[a].dynamic;
  n.value = Tensor(1, 1);
  compute(n);
  return push(std::move(n));
}

NodeId Tape::record(OpKind kind, std::span<const NodeId> inputs, double attr) {
  auto unary = [&]() {
    if (inputs.size() != 1) throw InvalidInputError("tape record: expected one input");
    return inputs[0];
  };
  auto binary = [&]() {
    if (inputs.size() != 2) throw InvalidInputError("tape record: expected two inputs");
    return std::pair{inputs[0], inputs[1]};
  };
  switch (kind) {
    case OpKind::Add: {
      auto [a, b] = binary();
      return add(a, b);
    }
    case OpKind::MatMul: {
      auto [a, b] = binary();
      return matmul(a, b);
    }
    case OpKind::Hadamard: {
      auto [a, b] = binary();
      return hadamard(a, b);
    }
    case OpKind::Scale:
      return scale(unary(), attr);
    case OpKind::Sigmoid:
      return sigmoid(unary());
    case OpKind::Power:
      return power(unary(), static_cast<int>(attr));
    case OpKind::SumSquares:
      return sum_squares(unary());
    case OpKind::Mean:
      return mean(unary());
    case OpKind::Constant:
    case OpKind::Parameter:
      throw UnsupportedOpError("tape record: leaf kinds need a value; use constant()/parameter()");
  }
  throw UnsupportedOpError("tape record: unknown op kind");
}

void Tape::compute(Node& n) {
  switch (n.kind) {
    case OpKind::Constant:
    case OpKind::Parameter:
      break;
    case OpKind::Add:
      add_into(nodes_[n.a].value, nodes_[n.b].value, n.value);
      break;
    case OpKind::MatMul:
      matmul_into(nodes_[n.a].value, nodes_[n.b].value, n.value);
      break;
    case OpKind::Hadamard:
      hadamard_into(nodes_[n.a].value, nodes_[n.b].value, n.value);
      break;
    case OpKind::Scale:
      scale_into(nodes_[n.a].value, n.attr, n.value);
      break;
    case OpKind::Sigmoid:
      sigmoid_into(nodes_[n.a].value, n.value);
      break;
    case OpKind::Power:
      power_into(nodes_[n.a].value, static_cast<int>(n.attr), n.value);
      break;
    case OpKind::SumSquares: {
      const Tensor& a = nodes_[n.a].value;
      double acc = 0.0;
      for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * a[i];
      n.value[0] = acc;
      break;
    }
    case OpKind::Mean: {
      const Tensor& a = nodes_[n.a].value;
      double acc = 0.0;
      for (std::size_t i = 0; i < a.size(); ++i) acc += a[i];
      n.value[0] = acc / static_cast<double>(a.size());
      break;
    }
  }
}

void Tape::set_value(NodeId id, const Tensor& value) {
  check_input(id);
  Node& n = nodes_[id];
  if (n.kind != OpKind::Parameter) {
    throw InvalidInputError("tape set_value: only parameter nodes are assignable");
  }
  if (n.value.shape() != value.shape()) {
    throw DimensionError("tape set_value: shape mismatch");
  }
  n.value = value;
}

void Tape::replay() {
  for (Node& n : nodes_) {
    if (n.dynamic && n.kind != OpKind::Parameter) compute(n);
  }
}

void Tape::ensure_adjoints() {
  if (adjoints_ready_) return;
  for (Node& n : nodes_) {
    if (n.adjoint.shape() != n.value.shape()) {
      n.adjoint = Tensor(n.value.rows(), n.value.cols());
    }
  }
  adjoints_ready_ = true;
}

void Tape::backward(NodeId loss) {
  check_input(loss);
  if (nodes_[loss].value.size() != 1) {
    throw InvalidInputError("tape backward: loss node must be scalar");
  }
  backward_seeded(loss, Tensor::ones(1, 1));
}

void Tape::backward_seeded(NodeId output, const Tensor& seed) {
  check_input(output);
  if (seed.shape() != nodes_[output].value.shape()) {
    throw DimensionError("tape backward: seed shape mismatch");
  }
  ensure_adjoints();
  for (Node& n : nodes_) n.adjoint.fill(0.0);
  nodes_[output].adjoint = seed;

  for (std::size_t idx = nodes_.size(); idx-- > 0;) {
    Node& n = nodes_[idx];
    if (!n.dynamic && idx != output) continue;
    const Tensor& adj = n.adjoint;
    switch (n.kind) {
      case OpKind::Constant:
      case OpKind::Parameter:
        break;
      case OpKind::Add:
        if (nodes_[n.a].dynamic) acc_elementwise(adj, nodes_[n.a].adjoint);
        if (nodes_[n.b].dynamic) acc_elementwise(adj, nodes_[n.b].adjoint);
        break;
      case OpKind::MatMul:
        if (nodes_[n.a].dynamic) acc_matmul_left(adj, nodes_[n.b].value, nodes_[n.a].adjoint);
        if (nodes_[n.b].dynamic) acc_matmul_right(nodes_[n.a].value, adj, nodes_[n.b].adjoint);
        break;
      case OpKind::Hadamard:
        if (nodes_[n.a].dynamic) {
          Tensor& dst = nodes_[n.a].adjoint;
          const Tensor& other = nodes_[n.b].value;
          for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += adj[i] * other[i];
        }
        if (nodes_[n.b].dynamic) {
          Tensor& dst = nodes_[n.b].adjoint;
          const Tensor& other = nodes_[n.a].value;
          for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += adj[i] * other[i];
        }
        break;
      case OpKind::Scale:
        if (nodes_[n.a].dynamic) {
          Tensor& dst = nodes_[n.a].adjoint;
          for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += n.attr * adj[i];
        }
        break;
      case OpKind::Sigmoid:
        if (nodes_[n.a].dynamic) {
          Tensor& dst = nodes_[n.a].adjoint;
          const Tensor& v = n.value;
          for (std::size_t i = 0; i < dst.size(); ++i) {
            dst[i] += adj[i] * v[i] * (1.0 - v[i]);
          }
        }
        break;
      case OpKind::Power:
        if (nodes_[n.a].dynamic) {
          Tensor& dst = nodes_[n.a].adjoint;
          const Tensor& x = nodes_[n.a].value;
          const int p = static_cast<int>(n.attr);
          for (std::size_t i = 0; i < dst.size(); ++i) {
            double xp = 1.0;  // x^(p-1)
            for (int k = 1; k < p; ++k) xp *= x[i];
            dst[i] += adj[i] * static_cast<double>(p) * xp;
          }
        }
        break;
      case OpKind::SumSquares:
        if (nodes_[n.a].dynamic) {
          Tensor& dst = nodes_[n.a].adjoint;
          const Tensor& x = nodes_[n.a].value;
          const double g = adj[0];
          for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += 2.0 * g * x[i];
        }
        break;
      case OpKind::Mean:
        if (nodes_[n.a].dynamic) {
          Tensor& dst = nodes_[n.a].adjoint;
          const double g = adj[0] / static_cast<double>(dst.size());
          for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += g;
        }
        break;
    }
  }
}

Tensor jacobian(const std::function<NodeId(Tape&, NodeId)>& fn, const Tensor& x) {
  if (x.cols() != 1) throw DimensionError("jacobian: x must be a column vector");
  Tape tape;
  const NodeId input = tape.parameter(x);
  const NodeId output = fn(tape, input);
  const Tensor& y = tape.value(output);
  if (!y.all_finite()) throw NumericError("jacobian: non-finite output");
  if (y.cols() != 1) throw DimensionError("jacobian: output must be a column vector");

  const int e = y.rows(), d = x.rows();
  Tensor result(e, d);
  Tensor seed(e, 1);
  for (int row = 0; row < e; ++row) {
    seed.fill(0.0);
    seed[row] = 1.0;
    tape.backward_seeded(output, seed);
    const Tensor& grad = tape.adjoint(input);
    for (int col = 0; col < d; ++col) result(row, col) = grad[col];
  }
  return result;
}

}  // namespace odekernel
