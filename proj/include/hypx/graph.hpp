#pragma once

#include <vector>

#include "hypx/tensor.hpp"

namespace hypx {

enum class Op { Input, Add, Scale, MatMul, ReLU, Square, Sum, Exp, Divide, Dot, Reshape };

using NodeId = int;

// Reverse-mode gradient engine over a fixed op set. Nodes are appended in
// topological order (parents before children), so the graph is acyclic by
// construction and backward() is a single reverse sweep.
//
// Graphs are reusable: build once, then per iteration overwrite input values
// (set_value / value_data) and scale factors, call forward(), backward().
// No allocation happens after the first forward/backward pair.
class ComputationGraph {
 public:
  NodeId input(Tensor value, bool requires_grad = true);
  NodeId constant(Tensor value) { return input(std::move(value), false); }

  NodeId add(NodeId a, NodeId b);  // same shape, or b a row vector broadcast over a's rows
  NodeId scale(NodeId a, double factor);
  NodeId scale(NodeId a, Tensor weights);  // elementwise constant weights
  NodeId matmul(NodeId a, NodeId b);
  NodeId relu(NodeId a);
  NodeId square(NodeId a);
  NodeId sum(NodeId a);  // reduce all entries to a scalar
  NodeId exp(NodeId a);
  NodeId divide(NodeId a, NodeId b);  // same shape, or b a scalar
  NodeId dot(NodeId a, NodeId b);
  NodeId reshape(NodeId a, int rows, int cols);

  void set_value(NodeId id, const Tensor& v);
  double* value_data(NodeId id);
  void set_scale_factor(NodeId id, double k);
  double* scale_weights_data(NodeId id);

  const Tensor& value(NodeId id) const { return nodes_[id].val; }
  // Valid after backward(); gradient of the backward output w.r.t. this node.
  const Tensor& adjoint(NodeId id) const { return nodes_[id].adj; }

  Op op(NodeId id) const { return nodes_[id].op; }
  int node_count() const { return static_cast<int>(nodes_.size()); }

  void forward();
  void backward(NodeId output);

 private:
  struct Node {
    Op op;
    NodeId a = -1, b = -1;
    double factor = 1.0;
    Tensor weights;  // for weighted scale
    Tensor val;
    Tensor adj;
    bool needs_grad = false;
  };

  NodeId push(Node n);
  void check(NodeId id) const;

  std::vector<Node> nodes_;
};

}  // namespace hypx
