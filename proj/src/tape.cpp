// SPDX-License-Identifier: Apache-2.0
#include "gmvae/tape.hpp"

#include <algorithm>
#include <cmath>

#include "gmvae/errors.hpp"
#include "gmvae/kernels.hpp"

namespace gmvae {

const Tensor& Gradients::at(NodeId id) const {
  if (!contains(id)) {
    throw ContractError("no gradient recorded for node " + std::to_string(id));
  }
  return adjoints_[id];
}

NodeId Tape::push(Node n) {
  nodes_.push_back(std::move(n));
  return static_cast<NodeId>(nodes_.size() - 1);
}

NodeId Tape::leaf(Tensor value, bool requires_grad) {
  return push({Op::leaf, requires_grad, 0.0, {}, std::move(value)});
}

NodeId Tape::affine(NodeId x, NodeId W, NodeId b) {
  const Tensor& xv = value(x);
  const Tensor& Wv = value(W);
  const Tensor& bv = value(b);
  if (Wv.rank() != 2 || xv.rank() != 1 || bv.rank() != 1 || Wv.cols() != xv.size() ||
      Wv.rows() != bv.size()) {
    throw ShapeError("affine: W " + Wv.shape_str() + " x " + xv.shape_str() + " b " +
                     bv.shape_str());
  }
  Node n{Op::affine,
         nodes_[x].requires_grad || nodes_[W].requires_grad || nodes_[b].requires_grad,
         0.0,
         {x, W, b},
         Tensor{}};
  n.value = eval(n, {});
  return push(std::move(n));
}

NodeId Tape::relu(NodeId x) {
  Node n{Op::relu, nodes_[x].requires_grad, 0.0, {x}, Tensor{}};
  n.value = eval(n, {});
  return push(std::move(n));
}

NodeId Tape::sigmoid(NodeId x) {
  Node n{Op::sigmoid, nodes_[x].requires_grad, 0.0, {x}, Tensor{}};
  n.value = eval(n, {});
  return push(std::move(n));
}

NodeId Tape::add(NodeId a, NodeId b) {
  require_same_shape(value(a), value(b), "add");
  Node n{Op::add, nodes_[a].requires_grad || nodes_[b].requires_grad, 0.0, {a, b}, Tensor{}};
  n.value = eval(n, {});
  return push(std::move(n));
}

NodeId Tape::sub(NodeId a, NodeId b) {
  require_same_shape(value(a), value(b), "sub");
  Node n{Op::sub, nodes_[a].requires_grad || nodes_[b].requires_grad, 0.0, {a, b}, Tensor{}};
  n.value = eval(n, {});
  return push(std::move(n));
}

NodeId Tape::scale(NodeId x, double c) {
  Node n{Op::scale, nodes_[x].requires_grad, c, {x}, Tensor{}};
  n.value = eval(n, {});
  return push(std::move(n));
}

NodeId Tape::squared_l2(NodeId a, NodeId b) {
  require_same_shape(value(a), value(b), "squared_l2");
  Node n{Op::squared_l2, nodes_[a].requires_grad || nodes_[b].requires_grad, 0.0, {a, b},
         Tensor{}};
  n.value = eval(n, {});
  return push(std::move(n));
}

NodeId Tape::sum(NodeId x) {
  Node n{Op::sum, nodes_[x].requires_grad, 0.0, {x}, Tensor{}};
  n.value = eval(n, {});
  return push(std::move(n));
}

NodeId Tape::pow_scalar(NodeId x, double c) {
  if (!value(x).is_scalar()) {
    throw ShapeError("pow_scalar: operand must be scalar, got " + value(x).shape_str());
  }
  Node n{Op::pow_scalar, nodes_[x].requires_grad, c, {x}, Tensor{}};
  n.value = eval(n, {});
  return push(std::move(n));
}

NodeId Tape::soft_min(NodeId v) {
  if (value(v).rank() != 1 || value(v).size() == 0) {
    throw ShapeError("soft_min: operand must be a nonempty vector, got " + value(v).shape_str());
  }
  Node n{Op::soft_min, nodes_[v].requires_grad, 0.0, {v}, Tensor{}};
  n.value = eval(n, {});
  return push(std::move(n));
}

NodeId Tape::stack(std::span<const NodeId> scalars) {
  if (scalars.empty()) throw ShapeError("stack: no operands");
  Node n{Op::stack, false, 0.0, {}, Tensor{}};
  n.in.assign(scalars.begin(), scalars.end());
  for (NodeId id : n.in) {
    if (!value(id).is_scalar()) {
      throw ShapeError("stack: operand must be scalar, got " + value(id).shape_str());
    }
    n.requires_grad = n.requires_grad || nodes_[id].requires_grad;
  }
  n.value = eval(n, {});
  return push(std::move(n));
}

// Forward evaluation of one node. When `values` is nonempty it supplies the
// input values (replay); otherwise the cached values are used.
Tensor Tape::eval(const Node& n, const std::vector<Tensor>& values) const {
  auto in = [&](std::size_t k) -> const Tensor& {
    NodeId id = n.in[k];
    return values.empty() ? nodes_[id].value : values[id];
  };
  switch (n.op) {
    case Op::leaf:
      return n.value;
    case Op::affine: {
      const Tensor &xv = in(0), &Wv = in(1), &bv = in(2);
      std::vector<double> y(Wv.rows());
      kernels::affine_fwd(Wv.data(), bv.data(), xv.data(), y, Wv.rows(), Wv.cols());
      return Tensor::from({Wv.rows()}, std::move(y));
    }
    case Op::relu: {
      const Tensor& xv = in(0);
      std::vector<double> y(xv.size());
      kernels::relu_fwd(xv.data(), y);
      return Tensor::from(xv.shape(), std::move(y));
    }
    case Op::sigmoid: {
      const Tensor& xv = in(0);
      std::vector<double> y(xv.size());
      kernels::sigmoid_fwd(xv.data(), y);
      return Tensor::from(xv.shape(), std::move(y));
    }
    case Op::add: {
      const Tensor &a = in(0), &b = in(1);
      std::vector<double> y(a.size());
      for (std::size_t i = 0; i < y.size(); ++i) y[i] = a[i] + b[i];
      return Tensor::from(a.shape(), std::move(y));
    }
    case Op::sub: {
      const Tensor &a = in(0), &b = in(1);
      std::vector<double> y(a.size());
      for (std::size_t i = 0; i < y.size(); ++i) y[i] = a[i] - b[i];
      return Tensor::from(a.shape(), std::move(y));
    }
    case Op::scale: {
      const Tensor& a = in(0);
      std::vector<double> y(a.size());
      for (std::size_t i = 0; i < y.size(); ++i) y[i] = n.c * a[i];
      return Tensor::from(a.shape(), std::move(y));
    }
    case Op::squared_l2:
      return Tensor::scalar(kernels::squared_l2(in(0).data(), in(1).data()));
    case Op::sum: {
      double acc = 0.0;
      for (double v : in(0).data()) acc += v;
      return Tensor::scalar(acc);
    }
    case Op::pow_scalar:
      return Tensor::scalar(std::pow(in(0).item(), n.c));
    case Op::soft_min: {
      const Tensor& v = in(0);
      double m = v[0];
      for (std::size_t i = 1; i < v.size(); ++i) m = std::min(m, v[i]);
      double s = 0.0;
      for (std::size_t i = 0; i < v.size(); ++i) s += std::exp(-(v[i] - m));
      return Tensor::scalar(m - std::log(s));
    }
    case Op::stack: {
      std::vector<double> y(n.in.size());
      for (std::size_t i = 0; i < n.in.size(); ++i) y[i] = in(i).item();
      return Tensor::from({n.in.size()}, std::move(y));
    }
  }
  throw ContractError("unreachable op");
}

Tensor Tape::replay(NodeId target) const {
  std::vector<Tensor> values(nodes_.size());
  for (std::size_t i = 0; i <= static_cast<std::size_t>(target); ++i) {
    values[i] = nodes_[i].op == Op::leaf ? nodes_[i].value : eval(nodes_[i], values);
  }
  return values[target];
}

Gradients Tape::backward(NodeId output) const {
  if (!value(output).is_scalar()) {
    throw ContractError("backward: output node has shape " + value(output).shape_str() +
                        ", expected a scalar");
  }
  // Mutable adjoint buffers, allocated lazily per node.
  std::vector<std::vector<double>> adj(nodes_.size());
  auto touch = [&](NodeId id) -> std::vector<double>& {
    if (adj[id].empty() && nodes_[id].value.size() > 0) {
      adj[id].assign(nodes_[id].value.size(), 0.0);
    }
    return adj[id];
  };
  touch(output);
  adj[output][0] = 1.0;

  for (NodeId id = output; id >= 0; --id) {
    const Node& n = nodes_[id];
    if (!n.requires_grad || adj[id].empty() || n.op == Op::leaf) continue;
    std::span<const double> g(adj[id]);
    switch (n.op) {
      case Op::affine: {
        NodeId x = n.in[0], W = n.in[1], b = n.in[2];
        const Tensor& Wv = nodes_[W].value;
        const Tensor& xv = nodes_[x].value;
        std::size_t rows = Wv.rows(), cols = Wv.cols();
        if (nodes_[x].requires_grad) {
          kernels::affine_bwd_x(Wv.data(), g, touch(x), rows, cols);
        }
        if (nodes_[W].requires_grad || nodes_[b].requires_grad) {
          kernels::affine_bwd_wb(xv.data(), g, touch(W), touch(b), rows, cols);
        }
        break;
      }
      case Op::relu:
        if (nodes_[n.in[0]].requires_grad) {
          kernels::relu_bwd(nodes_[n.in[0]].value.data(), g, touch(n.in[0]));
        }
        break;
      case Op::sigmoid:
        if (nodes_[n.in[0]].requires_grad) {
          kernels::sigmoid_bwd(n.value.data(), g, touch(n.in[0]));
        }
        break;
      case Op::add:
        for (int k = 0; k < 2; ++k) {
          if (nodes_[n.in[k]].requires_grad) {
            auto& a = touch(n.in[k]);
            for (std::size_t i = 0; i < a.size(); ++i) a[i] += g[i];
          }
        }
        break;
      case Op::sub:
        if (nodes_[n.in[0]].requires_grad) {
          auto& a = touch(n.in[0]);
          for (std::size_t i = 0; i < a.size(); ++i) a[i] += g[i];
        }
        if (nodes_[n.in[1]].requires_grad) {
          auto& a = touch(n.in[1]);
          for (std::size_t i = 0; i < a.size(); ++i) a[i] -= g[i];
        }
        break;
      case Op::scale:
        if (nodes_[n.in[0]].requires_grad) {
          auto& a = touch(n.in[0]);
          for (std::size_t i = 0; i < a.size(); ++i) a[i] += n.c * g[i];
        }
        break;
      case Op::squared_l2: {
        const Tensor& av = nodes_[n.in[0]].value;
        const Tensor& bv = nodes_[n.in[1]].value;
        double go = g[0];
        if (nodes_[n.in[0]].requires_grad) {
          auto& a = touch(n.in[0]);
          for (std::size_t i = 0; i < a.size(); ++i) a[i] += 2.0 * go * (av[i] - bv[i]);
        }
        if (nodes_[n.in[1]].requires_grad) {
          auto& a = touch(n.in[1]);
          for (std::size_t i = 0; i < a.size(); ++i) a[i] -= 2.0 * go * (av[i] - bv[i]);
        }
        break;
      }
      case Op::sum:
        if (nodes_[n.in[0]].requires_grad) {
          auto& a = touch(n.in[0]);
          for (std::size_t i = 0; i < a.size(); ++i) a[i] += g[0];
        }
        break;
      case Op::pow_scalar:
        if (nodes_[n.in[0]].requires_grad) {
          double xv = nodes_[n.in[0]].value.item();
          touch(n.in[0])[0] += g[0] * n.c * std::pow(xv, n.c - 1.0);
        }
        break;
      case Op::soft_min: {
        if (nodes_[n.in[0]].requires_grad) {
          const Tensor& v = nodes_[n.in[0]].value;
          double m = v[0];
          for (std::size_t i = 1; i < v.size(); ++i) m = std::min(m, v[i]);
          double s = 0.0;
          for (std::size_t i = 0; i < v.size(); ++i) s += std::exp(-(v[i] - m));
          auto& a = touch(n.in[0]);
          for (std::size_t i = 0; i < a.size(); ++i) {
            a[i] += g[0] * std::exp(-(v[i] - m)) / s;
          }
        }
        break;
      }
      case Op::stack:
        for (std::size_t k = 0; k < n.in.size(); ++k) {
          if (nodes_[n.in[k]].requires_grad) touch(n.in[k])[0] += g[k];
        }
        break;
      case Op::leaf:
        break;
    }
  }

  std::vector<Tensor> out(nodes_.size());
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (nodes_[i].requires_grad && !adj[i].empty()) {
      out[i] = Tensor::from(nodes_[i].value.shape(), std::move(adj[i]));
    }
  }
  return Gradients(std::move(out));
}

}  // namespace gmvae
