#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "odekernel/tensor.hpp"

namespace odekernel {

/// Index of a node on a tape. Nodes can only reference earlier nodes, so
/// every recorded graph is acyclic by construction.
using NodeId = std::uint32_t;

enum class OpKind : std::uint8_t {
  Constant,
  Parameter,
  Add,
  MatMul,
  Hadamard,
  Scale,
  Sigmoid,
  Power,
  SumSquares,
  Mean,
};

/// Reverse-mode differentiation tape. Recording an operation runs it forward
/// and caches the result; backward() pushes adjoints from a scalar loss node
/// to every node it depends on, accumulating over multiple uses.
///
/// A tape built once can be re-evaluated cheaply: overwrite parameter values
/// with set_value() and call replay(), which recomputes only the nodes that
/// depend on a parameter. Values and forward results are reproduced bit for
/// bit on every replay.
class Tape {
 public:
  NodeId constant(Tensor value);
  NodeId parameter(Tensor value);

  NodeId add(NodeId a, NodeId b);
  NodeId matmul(NodeId a, NodeId b);
  NodeId hadamard(NodeId a, NodeId b);
  NodeId scale(NodeId a, double factor);
  NodeId sigmoid(NodeId a);
  /// Elementwise integer power, exponent >= 1, as repeated multiplication.
  NodeId power(NodeId a, int exponent);
  /// Scalar sum of squared entries.
  NodeId sum_squares(NodeId a);
  /// Scalar mean of entries.
  NodeId mean(NodeId a);

  /// Generic entry point mirroring the builders above; `attr` carries the
  /// scale factor or power exponent. Leaf kinds must go through constant()
  /// or parameter() since they need a value.
  NodeId record(OpKind kind, std::span<const NodeId> inputs, double attr = 0.0);

  std::size_t size() const { return nodes_.size(); }
  const Tensor& value(NodeId id) const { return nodes_[id].value; }
  OpKind kind(NodeId id) const { return nodes_[id].kind; }
  bool depends_on_parameter(NodeId id) const { return nodes_[id].dynamic; }

  /// Overwrites a Parameter node's value (shape must match).
  void set_value(NodeId id, const Tensor& value);

  /// Recomputes every parameter-dependent node in recording order.
  void replay();

  /// Reverse pass from a scalar loss node. Seeds the loss adjoint with 1 and
  /// accumulates chain-rule contributions child-to-parent; afterwards
  /// adjoint(id) is d(loss)/d(node) for every node the loss depends on. The
  /// parameter-node adjoints are the gradient map.
  void backward(NodeId loss);

  /// Reverse pass from an arbitrary node with a caller-supplied seed adjoint
  /// (used for Jacobian rows).
  void backward_seeded(NodeId output, const Tensor& seed);

  /// Adjoint from the most recent backward pass; zero for nodes the seeded
  /// output does not depend on.
  const Tensor& adjoint(NodeId id) const { return nodes_[id].adjoint; }

 private:
  struct Node {
    OpKind kind;
    bool dynamic = false;  // depends on some Parameter node
    NodeId a = 0, b = 0;
    double attr = 0.0;
    Tensor value;
    Tensor adjoint;
  };

  NodeId push(Node node);
  void compute(Node& node);
  void ensure_adjoints();
  void check_input(NodeId id) const;

  std::vector<Node> nodes_;
  bool adjoints_ready_ = false;
};

/// Jacobian of a tape-recorded map at x (a d-by-1 column): row e holds the
/// gradient of output component e, computed by one reverse pass per output.
Tensor jacobian(const std::function<NodeId(Tape&, NodeId)>& fn, const Tensor& x);

}  // namespace odekernel
