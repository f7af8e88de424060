// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "gmvae/tensor.hpp"

namespace gmvae {

using NodeId = std::int32_t;

/// Gradients from one backward pass, keyed by node id. Entries exist for
/// every node that required a gradient; each matches its node's shape.
class Gradients {
 public:
  explicit Gradients(std::vector<Tensor> adjoints) : adjoints_(std::move(adjoints)) {}

  bool contains(NodeId id) const {
    return id >= 0 && static_cast<std::size_t>(id) < adjoints_.size() && !adjoints_[id].empty();
  }
  const Tensor& at(NodeId id) const;

 private:
  std::vector<Tensor> adjoints_;
};

/// Append-only record of primitive operations with cached intermediate
/// values. Appending returns node ids; backward() replays the record in
/// reverse for exact gradients, replay() re-runs it forward. Node order is
/// construction order, which is already topological.
class Tape {
 public:
  enum class Op : std::uint8_t {
    leaf,
    affine,      // in: x, W, b
    relu,
    sigmoid,
    add,
    sub,
    scale,       // c * x
    squared_l2,  // sum_i (a_i - b_i)^2 -> scalar
    sum,         // sum of elements -> scalar
    pow_scalar,  // x^c for scalar x >= 0
    soft_min,    // -log sum_j exp(-v_j) -> scalar
    stack,       // pack scalars into a vector
  };

  NodeId leaf(Tensor value, bool requires_grad = true);
  NodeId constant(Tensor value) { return leaf(std::move(value), false); }

  /// y[i] = sum_j W[i,j] x[j] + b[i]
  NodeId affine(NodeId x, NodeId W, NodeId b);
  NodeId relu(NodeId x);
  NodeId sigmoid(NodeId x);
  NodeId add(NodeId a, NodeId b);
  NodeId sub(NodeId a, NodeId b);
  NodeId scale(NodeId x, double c);
  NodeId squared_l2(NodeId a, NodeId b);
  NodeId sum(NodeId x);
  /// x^c for a nonnegative scalar node; exponent is a constant.
  NodeId pow_scalar(NodeId x, double c);
  /// Smooth minimum of a vector of nonnegative entries:
  ///   y = -log sum_j exp(-v_j), computed via shifted log-sum-exp.
  NodeId soft_min(NodeId v);
  NodeId stack(std::span<const NodeId> scalars);

  const Tensor& value(NodeId id) const { return nodes_[id].value; }
  std::size_t node_count() const { return nodes_.size(); }

  /// Reverse-mode gradients of a scalar output with respect to every
  /// grad-requiring node. Throws ContractError if `output` is not scalar.
  Gradients backward(NodeId output) const;

  /// Recomputes every non-leaf value from the leaves; bit-identical to the
  /// values cached during construction.
  Tensor replay(NodeId id) const;

 private:
  struct Node {
    Op op;
    bool requires_grad;
    double c;               // scale factor / exponent
    std::vector<NodeId> in; // most ops have <= 3 inputs; stack may have more
    Tensor value;
  };

  NodeId push(Node n);
  Tensor eval(const Node& n, const std::vector<Tensor>& values) const;

  std::vector<Node> nodes_;
};

}  // namespace gmvae
