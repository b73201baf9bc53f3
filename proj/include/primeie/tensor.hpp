#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "primeie/real.hpp"

namespace primeie {
inline namespace PRIMEIE_ABI {

/// Dense row-major tensor. All operators in the library work on rank-2
/// views (a vector is 1 x n, a scalar 1 x 1), but the shape list is kept
/// general for serialization.
struct Tensor {
  std::vector<int> shape;
  std::vector<Real> values;
  bool requires_grad = false;
  std::vector<Real> grad;

  Tensor() = default;
  Tensor(int rows, int cols, Real fill = Real(0))
      : shape{rows, cols}, values(static_cast<std::size_t>(rows) * cols, fill) {}
  Tensor(std::vector<int> dims, std::vector<Real> data) : shape(std::move(dims)), values(std::move(data)) {}

  std::size_t size() const { return values.size(); }
  int rows() const { return shape.empty() ? 0 : (shape.size() == 1 ? 1 : shape[0]); }
  int cols() const {
    if (shape.empty()) return 0;
    if (shape.size() == 1) return shape[0];
    int c = 1;
    for (std::size_t i = 1; i < shape.size(); ++i) c *= shape[i];
    return c;
  }
  Real& at(int r, int c) { return values[static_cast<std::size_t>(r) * cols() + c]; }
  Real at(int r, int c) const { return values[static_cast<std::size_t>(r) * cols() + c]; }
  void zero_grad() { grad.assign(values.size(), Real(0)); }
};

std::size_t shape_product(const std::vector<int>& shape);
std::string shape_string(const std::vector<int>& shape);

}  // namespace PRIMEIE_ABI
}  // namespace primeie
