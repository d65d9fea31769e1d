#include "hypx/graph.hpp"

#include <cmath>
#include <cstring>

namespace hypx {

NodeId ComputationGraph::push(Node n) {
  nodes_.push_back(std::move(n));
  return static_cast<NodeId>(nodes_.size() - 1);
}

void ComputationGraph::check(NodeId id) const {
  if (id < 0 || id >= static_cast<NodeId>(nodes_.size()))
    throw ContractError("graph: bad node id");
}

NodeId ComputationGraph::input(Tensor value, bool requires_grad) {
  Node n;
  n.op = Op::Input;
  n.val = std::move(value);
  n.needs_grad = requires_grad;
  return push(std::move(n));
}

NodeId ComputationGraph::add(NodeId a, NodeId b) {
  check(a);
  check(b);
  const Tensor& va = nodes_[a].val;
  const Tensor& vb = nodes_[b].val;
  const bool bcast = vb.rows() == 1 && vb.cols() == va.cols() && va.rows() != 1;
  if (!va.same_shape(vb) && !bcast) throw DimensionError("add: shape mismatch");
  Node n;
  n.op = Op::Add;
  n.a = a;
  n.b = b;
  n.val = Tensor(va.rows(), va.cols());
  n.needs_grad = nodes_[a].needs_grad || nodes_[b].needs_grad;
  return push(std::move(n));
}

NodeId ComputationGraph::scale(NodeId a, double factor) {
  check(a);
  Node n;
  n.op = Op::Scale;
  n.a = a;
  n.factor = factor;
  n.val = Tensor(nodes_[a].val.rows(), nodes_[a].val.cols());
  n.needs_grad = nodes_[a].needs_grad;
  return push(std::move(n));
}

NodeId ComputationGraph::scale(NodeId a, Tensor weights) {
  check(a);
  if (!nodes_[a].val.same_shape(weights)) throw DimensionError("scale: weights shape mismatch");
  Node n;
  n.op = Op::Scale;
  n.a = a;
  n.weights = std::move(weights);
  n.val = Tensor(nodes_[a].val.rows(), nodes_[a].val.cols());
  n.needs_grad = nodes_[a].needs_grad;
  return push(std::move(n));
}

NodeId ComputationGraph::matmul(NodeId a, NodeId b) {
  check(a);
  check(b);
  const Tensor& va = nodes_[a].val;
  const Tensor& vb = nodes_[b].val;
  if (va.cols() != vb.rows()) throw DimensionError("matmul: inner dimensions differ");
  Node n;
  n.op = Op::MatMul;
  n.a = a;
  n.b = b;
  n.val = Tensor(va.rows(), vb.cols());
  n.needs_grad = nodes_[a].needs_grad || nodes_[b].needs_grad;
  return push(std::move(n));
}

NodeId ComputationGraph::relu(NodeId a) {
  check(a);
  Node n;
  n.op = Op::ReLU;
  n.a = a;
  n.val = Tensor(nodes_[a].val.rows(), nodes_[a].val.cols());
  n.needs_grad = nodes_[a].needs_grad;
  return push(std::move(n));
}

NodeId ComputationGraph::square(NodeId a) {
  check(a);
  Node n;
  n.op = Op::Square;
  n.a = a;
  n.val = Tensor(nodes_[a].val.rows(), nodes_[a].val.cols());
  n.needs_grad = nodes_[a].needs_grad;
  return push(std::move(n));
}

NodeId ComputationGraph::sum(NodeId a) {
  check(a);
  Node n;
  n.op = Op::Sum;
  n.a = a;
  n.val = Tensor(1, 1);
  n.needs_grad = nodes_[a].needs_grad;
  return push(std::move(n));
}

NodeId ComputationGraph::exp(NodeId a) {
  check(a);
  Node n;
  n.op = Op::Exp;
  n.a = a;
  n.val = Tensor(nodes_[a].val.rows(), nodes_[a].val.cols());
  n.needs_grad = nodes_[a].needs_grad;
  return push(std::move(n));
}

NodeId ComputationGraph::divide(NodeId a, NodeId b) {
  check(a);
  check(b);
  const Tensor& va = nodes_[a].val;
  const Tensor& vb = nodes_[b].val;
  const bool scalar_b = vb.size() == 1;
  if (!va.same_shape(vb) && !scalar_b) throw DimensionError("divide: shape mismatch");
  Node n;
  n.op = Op::Divide;
  n.a = a;
  n.b = b;
  n.val = Tensor(va.rows(), va.cols());
  n.needs_grad = nodes_[a].needs_grad || nodes_[b].needs_grad;
  return push(std::move(n));
}

NodeId ComputationGraph::dot(NodeId a, NodeId b) {
  check(a);
  check(b);
  if (nodes_[a].val.size() != nodes_[b].val.size()) throw DimensionError("dot: size mismatch");
  Node n;
  n.op = Op::Dot;
  n.a = a;
  n.b = b;
  n.val = Tensor(1, 1);
  n.needs_grad = nodes_[a].needs_grad || nodes_[b].needs_grad;
  return push(std::move(n));
}

NodeId ComputationGraph::reshape(NodeId a, int rows, int cols) {
  check(a);
  if (static_cast<std::size_t>(rows) * cols != nodes_[a].val.size())
    throw DimensionError("reshape: size mismatch");
  Node n;
  n.op = Op::Reshape;
  n.a = a;
  n.val = Tensor(rows, cols);
  n.needs_grad = nodes_[a].needs_grad;
  return push(std::move(n));
}

void ComputationGraph::set_value(NodeId id, const Tensor& v) {
  check(id);
  if (!nodes_[id].val.same_shape(v)) throw DimensionError("set_value: shape mismatch");
  nodes_[id].val = v;
}

double* ComputationGraph::value_data(NodeId id) {
  check(id);
  return nodes_[id].val.data();
}

void ComputationGraph::set_scale_factor(NodeId id, double k) {
  check(id);
  if (nodes_[id].op != Op::Scale) throw ContractError("set_scale_factor: not a scale node");
  nodes_[id].factor = k;
}

double* ComputationGraph::scale_weights_data(NodeId id) {
  check(id);
  if (nodes_[id].op != Op::Scale || nodes_[id].weights.size() == 0)
    throw ContractError("scale_weights_data: not a weighted scale node");
  return nodes_[id].weights.data();
}

void ComputationGraph::forward() {
  for (Node& n : nodes_) {
    switch (n.op) {
      case Op::Input:
        break;
      case Op::Add: {
        const Tensor& a = nodes_[n.a].val;
        const Tensor& b = nodes_[n.b].val;
        double* o = n.val.data();
        const double* ap = a.data();
        const double* bp = b.data();
        if (a.same_shape(b)) {
          for (std::size_t i = 0; i < a.size(); ++i) o[i] = ap[i] + bp[i];
        } else {  // b is a row vector broadcast across rows
          const int r = a.rows(), c = a.cols();
          for (int i = 0; i < r; ++i)
            for (int j = 0; j < c; ++j) o[i * static_cast<std::size_t>(c) + j] = ap[i * static_cast<std::size_t>(c) + j] + bp[j];
        }
        break;
      }
      case Op::Scale: {
        const Tensor& a = nodes_[n.a].val;
        double* o = n.val.data();
        const double* ap = a.data();
        if (n.weights.size() != 0) {
          const double* w = n.weights.data();
          for (std::size_t i = 0; i < a.size(); ++i) o[i] = w[i] * ap[i];
        } else {
          const double k = n.factor;
          for (std::size_t i = 0; i < a.size(); ++i) o[i] = k * ap[i];
        }
        break;
      }
      case Op::MatMul:
        matmul_into(nodes_[n.a].val, nodes_[n.b].val, n.val);
        break;
      case Op::ReLU: {
        const Tensor& a = nodes_[n.a].val;
        double* o = n.val.data();
        const double* ap = a.data();
        for (std::size_t i = 0; i < a.size(); ++i) o[i] = ap[i] > 0.0 ? ap[i] : 0.0;
        break;
      }
      case Op::Square: {
        const Tensor& a = nodes_[n.a].val;
        double* o = n.val.data();
        const double* ap = a.data();
        for (std::size_t i = 0; i < a.size(); ++i) o[i] = ap[i] * ap[i];
        break;
      }
      case Op::Sum: {
        const Tensor& a = nodes_[n.a].val;
        double acc = 0.0;
        const double* ap = a.data();
        for (std::size_t i = 0; i < a.size(); ++i) acc += ap[i];
        n.val[0] = acc;
        break;
      }
      case Op::Exp: {
        const Tensor& a = nodes_[n.a].val;
        double* o = n.val.data();
        const double* ap = a.data();
        for (std::size_t i = 0; i < a.size(); ++i) o[i] = std::exp(ap[i]);
        break;
      }
      case Op::Divide: {
        const Tensor& a = nodes_[n.a].val;
        const Tensor& b = nodes_[n.b].val;
        double* o = n.val.data();
        const double* ap = a.data();
        if (b.size() == 1) {
          const double inv = 1.0 / b[0];
          for (std::size_t i = 0; i < a.size(); ++i) o[i] = ap[i] * inv;
        } else {
          const double* bp = b.data();
          for (std::size_t i = 0; i < a.size(); ++i) o[i] = ap[i] / bp[i];
        }
        break;
      }
      case Op::Dot:
        n.val[0] = ::hypx::dot(nodes_[n.a].val, nodes_[n.b].val);
        break;
      case Op::Reshape: {
        const Tensor& a = nodes_[n.a].val;
        std::memcpy(n.val.data(), a.data(), a.size() * sizeof(double));
        break;
      }
    }
  }
}

void ComputationGraph::backward(NodeId output) {
  check(output);
  if (nodes_[output].val.size() != 1)
    throw ContractError("backward: output must be scalar-valued");
  for (Node& n : nodes_) {
    if (!n.needs_grad) continue;
    if (n.adj.size() != n.val.size()) n.adj = Tensor(n.val.rows(), n.val.cols());
    else n.adj.fill(0.0);
  }
  if (!nodes_[output].needs_grad) return;  // constant graph: all gradients zero
  nodes_[output].adj[0] = 1.0;

  for (NodeId id = output; id >= 0; --id) {
    Node& n = nodes_[id];
    if (!n.needs_grad || n.op == Op::Input) continue;
    const Tensor& adj = n.adj;
    Node* pa = n.a >= 0 ? &nodes_[n.a] : nullptr;
    Node* pb = n.b >= 0 ? &nodes_[n.b] : nullptr;
    const bool ga = pa && pa->needs_grad;
    const bool gb = pb && pb->needs_grad;
    switch (n.op) {
      case Op::Input:
        break;
      case Op::Add: {
        if (ga) {
          double* d = pa->adj.data();
          const double* s = adj.data();
          for (std::size_t i = 0; i < adj.size(); ++i) d[i] += s[i];
        }
        if (gb) {
          if (pb->val.same_shape(n.val)) {
            double* d = pb->adj.data();
            const double* s = adj.data();
            for (std::size_t i = 0; i < adj.size(); ++i) d[i] += s[i];
          } else {  // broadcast row vector: sum over rows
            const int r = n.val.rows(), c = n.val.cols();
            double* d = pb->adj.data();
            const double* s = adj.data();
            for (int i = 0; i < r; ++i)
              for (int j = 0; j < c; ++j) d[j] += s[i * static_cast<std::size_t>(c) + j];
          }
        }
        break;
      }
      case Op::Scale: {
        if (ga) {
          double* d = pa->adj.data();
          const double* s = adj.data();
          if (n.weights.size() != 0) {
            const double* w = n.weights.data();
            for (std::size_t i = 0; i < adj.size(); ++i) d[i] += w[i] * s[i];
          } else {
            const double k = n.factor;
            for (std::size_t i = 0; i < adj.size(); ++i) d[i] += k * s[i];
          }
        }
        break;
      }
      case Op::MatMul: {
        const Tensor& A = pa->val;
        const Tensor& B = pb->val;
        const int r = A.rows(), k = A.cols(), c = B.cols();
        const double* adjp = adj.data();
        if (c == 1) {
          if (ga) {  // dA[i,l] += adj[i] * b[l], skipping zero b entries
            double* dA = pa->adj.data();
            const double* bp = B.data();
            for (int i = 0; i < r; ++i) {
              const double ai = adjp[i];
              if (ai == 0.0) continue;
              double* drow = dA + static_cast<std::size_t>(i) * k;
              for (int l = 0; l < k; ++l)
                if (bp[l] != 0.0) drow[l] += ai * bp[l];
            }
          }
          if (gb) {  // db[l] += sum_i A[i,l] * adj[i]
            double* dB = pb->adj.data();
            const double* ap = A.data();
            for (int i = 0; i < r; ++i) {
              const double ai = adjp[i];
              if (ai == 0.0) continue;
              const double* arow = ap + static_cast<std::size_t>(i) * k;
              for (int l = 0; l < k; ++l) dB[l] += arow[l] * ai;
            }
          }
        } else {
          if (ga) {  // dA[i,l] += dot(adj row i, B row l)
            double* dA = pa->adj.data();
            const double* bp = B.data();
            for (int i = 0; i < r; ++i) {
              const double* arow = adjp + static_cast<std::size_t>(i) * c;
              double* drow = dA + static_cast<std::size_t>(i) * k;
              for (int l = 0; l < k; ++l) {
                const double* brow = bp + static_cast<std::size_t>(l) * c;
                double acc = 0.0;
                for (int j = 0; j < c; ++j) acc += arow[j] * brow[j];
                drow[l] += acc;
              }
            }
          }
          if (gb) {  // dB[l,j] += sum_i A[i,l] * adj[i,j]
            double* dB = pb->adj.data();
            const double* ap = A.data();
            for (int i = 0; i < r; ++i) {
              const double* arow = ap + static_cast<std::size_t>(i) * k;
              const double* srow = adjp + static_cast<std::size_t>(i) * c;
              for (int l = 0; l < k; ++l) {
                const double av = arow[l];
                if (av == 0.0) continue;
                double* drow = dB + static_cast<std::size_t>(l) * c;
                for (int j = 0; j < c; ++j) drow[j] += av * srow[j];
              }
            }
          }
        }
        break;
      }
      case Op::ReLU: {
        if (ga) {
          double* d = pa->adj.data();
          const double* s = adj.data();
          const double* x = pa->val.data();
          for (std::size_t i = 0; i < adj.size(); ++i)
            if (x[i] > 0.0) d[i] += s[i];
        }
        break;
      }
      case Op::Square: {
        if (ga) {
          double* d = pa->adj.data();
          const double* s = adj.data();
          const double* x = pa->val.data();
          for (std::size_t i = 0; i < adj.size(); ++i) d[i] += 2.0 * x[i] * s[i];
        }
        break;
      }
      case Op::Sum: {
        if (ga) {
          double* d = pa->adj.data();
          const double s = adj[0];
          for (std::size_t i = 0; i < pa->val.size(); ++i) d[i] += s;
        }
        break;
      }
      case Op::Exp: {
        if (ga) {
          double* d = pa->adj.data();
          const double* s = adj.data();
          const double* e = n.val.data();
          for (std::size_t i = 0; i < adj.size(); ++i) d[i] += e[i] * s[i];
        }
        break;
      }
      case Op::Divide: {
        const Tensor& a = pa->val;
        const Tensor& b = pb->val;
        const double* s = adj.data();
        if (b.size() == 1) {
          const double inv = 1.0 / b[0];
          if (ga) {
            double* d = pa->adj.data();
            for (std::size_t i = 0; i < adj.size(); ++i) d[i] += s[i] * inv;
          }
          if (gb) {
            double acc = 0.0;
            const double* ap = a.data();
            for (std::size_t i = 0; i < adj.size(); ++i) acc += s[i] * ap[i];
            pb->adj[0] -= acc * inv * inv;
          }
        } else {
          const double* ap = a.data();
          const double* bp = b.data();
          if (ga) {
            double* d = pa->adj.data();
            for (std::size_t i = 0; i < adj.size(); ++i) d[i] += s[i] / bp[i];
          }
          if (gb) {
            double* d = pb->adj.data();
            for (std::size_t i = 0; i < adj.size(); ++i) d[i] -= s[i] * ap[i] / (bp[i] * bp[i]);
          }
        }
        break;
      }
      case Op::Dot: {
        const double s = adj[0];
        if (ga) {
          double* d = pa->adj.data();
          const double* bp = pb->val.data();
          for (std::size_t i = 0; i < pa->val.size(); ++i) d[i] += s * bp[i];
        }
        if (gb) {
          double* d = pb->adj.data();
          const double* ap = pa->val.data();
          for (std::size_t i = 0; i < pb->val.size(); ++i) d[i] += s * ap[i];
        }
        break;
      }
      case Op::Reshape: {
        if (ga) {
          double* d = pa->adj.data();
          const double* s = adj.data();
          for (std::size_t i = 0; i < adj.size(); ++i) d[i] += s[i];
        }
        break;
      }
    }
  }
}

}  // namespace hypx
