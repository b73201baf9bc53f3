#include "primeie/graph.hpp"

#include <algorithm>

#include "primeie/error.hpp"

namespace primeie {
inline namespace PRIMEIE_ABI {

Var Graph::constant(int rows, int cols, std::vector<Real> values) {
  if (values.size() != static_cast<std::size_t>(rows) * cols)
    throw ShapeError("constant: " + std::to_string(values.size()) + " values for shape " +
                     shape_string({rows, cols}));
  Node n;
  n.rows = rows;
  n.cols = cols;
  n.owned = std::move(values);
  nodes_.push_back(std::move(n));
  return Var{static_cast<int>(nodes_.size()) - 1};
}

Var Graph::constant(const Tensor& t) { return constant(t.rows(), t.cols(), t.values); }

Var Graph::leaf(Tensor& t) {
  if (t.grad.size() != t.values.size()) t.grad.assign(t.values.size(), Real(0));
  return parameter(t, track_ ? t.grad.data() : nullptr);
}

Var Graph::parameter(const Tensor& t, Real* grad_sink) {
  Node n;
  n.rows = t.rows();
  n.cols = t.cols();
  n.external = t.values.data();
  n.sink = track_ ? grad_sink : nullptr;
  n.requires_grad = n.sink != nullptr;
  nodes_.push_back(std::move(n));
  return Var{static_cast<int>(nodes_.size()) - 1};
}

const Real* Graph::value(Var v) const {
  const Node& n = nodes_[v.id];
  return n.external ? n.external : n.owned.data();
}

Real Graph::scalar(Var v) const {
  if (size(v) != 1) throw ShapeError("scalar: node has shape " + shape_string({rows(v), cols(v)}));
  return value(v)[0];
}

std::vector<Real> Graph::values(Var v) const {
  const Real* p = value(v);
  return std::vector<Real>(p, p + size(v));
}

Real* Graph::grad(Var v) {
  Node& n = nodes_[v.id];
  if (n.grad.empty()) n.grad.assign(static_cast<std::size_t>(n.rows) * n.cols, Real(0));
  return n.grad.data();
}

std::vector<Real> Graph::grad_values(Var v) const { return nodes_[v.id].grad; }

Var Graph::emplace(int rows, int cols, std::vector<Real> values, std::initializer_list<Var> inputs,
                   Backward bw) {
  bool needs = false;
  if (track_)
    for (Var in : inputs) needs = needs || nodes_[in.id].requires_grad;
  Node n;
  n.rows = rows;
  n.cols = cols;
  n.owned = std::move(values);
  n.requires_grad = needs;
  if (needs) n.backward = std::move(bw);
  nodes_.push_back(std::move(n));
  return Var{static_cast<int>(nodes_.size()) - 1};
}

Var Graph::emplace(int rows, int cols, std::vector<Real> values, const std::vector<Var>& inputs, Backward bw) {
  bool needs = false;
  if (track_)
    for (Var in : inputs) needs = needs || nodes_[in.id].requires_grad;
  Node n;
  n.rows = rows;
  n.cols = cols;
  n.owned = std::move(values);
  n.requires_grad = needs;
  if (needs) n.backward = std::move(bw);
  nodes_.push_back(std::move(n));
  return Var{static_cast<int>(nodes_.size()) - 1};
}

void Graph::backward(Var loss) {
  if (!track_) throw Error("graph_error", "backward: graph was built without gradient tracking");
  if (size(loss) != 1)
    throw ShapeError("backward: loss must be scalar, got " + shape_string({rows(loss), cols(loss)}));
  if (!nodes_[loss.id].requires_grad) return;
  grad(loss)[0] += Real(1);
  for (int i = loss.id; i >= 0; --i) {
    Node& n = nodes_[i];
    if (n.grad.empty() || !n.requires_grad) continue;
    if (n.backward) n.backward(*this, Var{i});
  }
  for (Node& n : nodes_) {
    if (!n.sink || n.grad.empty()) continue;
    const std::size_t len = n.grad.size();
    for (std::size_t j = 0; j < len; ++j) n.sink[j] += n.grad[j];
  }
}

}  // namespace PRIMEIE_ABI
}  // namespace primeie
