#pragma once

#include <memory>
#include <string>
#include <unordered_map>
#include <vector>

#include "primeie/graph.hpp"
#include "primeie/random.hpp"
#include "primeie/tensor.hpp"

namespace primeie {
inline namespace PRIMEIE_ABI {

/// Named parameter tensors in registration order. Handles are indices and
/// stay valid for the lifetime of the set.
class ParamSet {
 public:
  int add(const std::string& name, int rows, int cols);
  int index_of(const std::string& name) const;  // -1 when absent
  int size() const { return static_cast<int>(tensors_.size()); }
  Tensor& at(int i) { return tensors_[i]; }
  const Tensor& at(int i) const { return tensors_[i]; }
  const std::string& name(int i) const { return names_[i]; }
  std::size_t scalar_count() const;
  std::vector<Tensor*> pointers();

 private:
  std::vector<Tensor> tensors_;
  std::vector<std::string> names_;
  std::unordered_map<std::string, int> index_;
};

/// Gradient accumulators laid out like a ParamSet.
struct GradBuffer {
  std::vector<std::vector<Real>> grads;

  explicit GradBuffer(const ParamSet& params);
  void zero();
  void add(const GradBuffer& other);
};

/// Binds parameters into one graph, each at most once. With a GradBuffer
/// the gradients flow into it; without one, parameters enter as leaves
/// accumulating into Tensor::grad (finite-difference audits), or as
/// constants when the set is const or the graph is untracked.
class Binder {
 public:
  Binder(Graph& g, const ParamSet& params, GradBuffer* grads = nullptr);
  Binder(Graph& g, ParamSet& params, bool as_leaves);

  Graph& graph() { return g_; }
  Var operator()(int index);

 private:
  Graph& g_;
  const ParamSet& params_;
  ParamSet* mutable_ = nullptr;
  GradBuffer* grads_ = nullptr;
  std::vector<Var> bound_;
};

/// uniform(-r, r) with r = sqrt(6 / (fan_in + fan_out)).
void xavier_uniform(Tensor& t, Rng& rng);
void fill(Tensor& t, Real value);

}  // namespace PRIMEIE_ABI
}  // namespace primeie
