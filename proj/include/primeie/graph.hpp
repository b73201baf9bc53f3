#pragma once

#include <functional>
#include <initializer_list>
#include <vector>

#include "primeie/tensor.hpp"

namespace primeie {
inline namespace PRIMEIE_ABI {

/// Handle to a node in a Graph.
struct Var {
  int id = -1;
  bool valid() const { return id >= 0; }
};

/// Reverse-mode tape. Nodes are appended in evaluation order, which is a
/// topological order by construction; backward() walks it in reverse.
///
/// A graph built with `track = false` records values only: no backward
/// closures are stored and backward() is rejected. Decoding uses this mode.
class Graph {
 public:
  using Backward = std::function<void(Graph&, Var self)>;

  explicit Graph(bool track = true) : track_(track) {}
  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;

  bool tracking() const { return track_; }

  Var constant(int rows, int cols, std::vector<Real> values);
  Var constant(const Tensor& t);
  /// Differentiable leaf backed by `t`; backward() accumulates into t.grad.
  Var leaf(Tensor& t);
  /// Leaf reading `t` in place whose gradient is added into `grad_sink`
  /// (same length as t.values) after backward. A null sink makes the leaf
  /// constant.
  Var parameter(const Tensor& t, Real* grad_sink);

  int rows(Var v) const { return nodes_[v.id].rows; }
  int cols(Var v) const { return nodes_[v.id].cols; }
  std::size_t size(Var v) const { return static_cast<std::size_t>(rows(v)) * cols(v); }
  const Real* value(Var v) const;
  Real scalar(Var v) const;
  std::vector<Real> values(Var v) const;
  bool requires_grad(Var v) const { return nodes_[v.id].requires_grad; }

  /// Gradient buffer of `v`, zero-filled on first access.
  Real* grad(Var v);
  /// Gradient of `v` after backward(), or empty when none reached it.
  std::vector<Real> grad_values(Var v) const;

  /// Appends an operator node. `bw` is dropped when the graph is not
  /// tracking or when no input requires a gradient.
  Var emplace(int rows, int cols, std::vector<Real> values, std::initializer_list<Var> inputs, Backward bw);
  Var emplace(int rows, int cols, std::vector<Real> values, const std::vector<Var>& inputs, Backward bw);

  void backward(Var loss);
  std::size_t node_count() const { return nodes_.size(); }

 private:
  struct Node {
    int rows = 0;
    int cols = 0;
    std::vector<Real> owned;
    const Real* external = nullptr;
    std::vector<Real> grad;
    Real* sink = nullptr;
    bool requires_grad = false;
    Backward backward;
  };
  std::vector<Node> nodes_;
  bool track_;
};

}  // namespace PRIMEIE_ABI
}  // namespace primeie
