#include "primeie/params.hpp"

#include <cmath>

#include "primeie/error.hpp"

namespace primeie {
inline namespace PRIMEIE_ABI {

int ParamSet::add(const std::string& name, int rows, int cols) {
  if (index_.count(name)) throw ConfigError("parameter '" + name + "' registered twice");
  const int id = size();
  tensors_.emplace_back(rows, cols);
  names_.push_back(name);
  index_[name] = id;
  return id;
}

int ParamSet::index_of(const std::string& name) const {
  auto it = index_.find(name);
  return it == index_.end() ? -1 : it->second;
}

std::size_t ParamSet::scalar_count() const {
  std::size_t n = 0;
  for (const auto& t : tensors_) n += t.size();
  return n;
}

std::vector<Tensor*> ParamSet::pointers() {
  std::vector<Tensor*> out;
  for (auto& t : tensors_) out.push_back(&t);
  return out;
}

GradBuffer::GradBuffer(const ParamSet& params) {
  grads.resize(params.size());
  for (int i = 0; i < params.size(); ++i) grads[i].assign(params.at(i).size(), Real(0));
}

void GradBuffer::zero() {
  for (auto& g : grads) std::fill(g.begin(), g.end(), Real(0));
}

void GradBuffer::add(const GradBuffer& other) {
  for (std::size_t i = 0; i < grads.size(); ++i) {
    Real* dst = grads[i].data();
    const Real* src = other.grads[i].data();
    const std::size_t n = grads[i].size();
    for (std::size_t j = 0; j < n; ++j) dst[j] += src[j];
  }
}

Binder::Binder(Graph& g, const ParamSet& params, GradBuffer* grads)
    : g_(g), params_(params), grads_(grads), bound_(params.size()) {}

Binder::Binder(Graph& g, ParamSet& params, bool as_leaves)
    : g_(g), params_(params), mutable_(as_leaves ? &params : nullptr), bound_(params.size()) {}

Var Binder::operator()(int index) {
  Var& v = bound_.at(index);
  if (v.valid()) return v;
  if (mutable_)
    v = g_.leaf(mutable_->at(index));
  else
    v = g_.parameter(params_.at(index), grads_ ? grads_->grads[index].data() : nullptr);
  return v;
}

void xavier_uniform(Tensor& t, Rng& rng) {
  const double r = std::sqrt(6.0 / (t.rows() + t.cols()));
  for (Real& v : t.values) v = static_cast<Real>(uniform(rng, -r, r));
}

void fill(Tensor& t, Real value) { std::fill(t.values.begin(), t.values.end(), value); }

}  // namespace PRIMEIE_ABI
}  // namespace primeie
