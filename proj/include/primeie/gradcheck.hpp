#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "primeie/graph.hpp"

namespace primeie {
inline namespace PRIMEIE_ABI {

struct FdCheckResult {
  double max_rel_error = 0.0;
  std::size_t coordinates = 0;
  // Location and values of the worst coordinate.
  std::size_t worst_tensor = 0;
  std::size_t worst_index = 0;
  double analytic = 0.0;
  double numeric = 0.0;
};

/// Builds a scalar loss. Tensors under test must enter the graph through
/// Graph::leaf so that tracked builds accumulate into their grad.
using LossBuilder = std::function<Var(Graph&)>;

/// Compares backward() against central differences
/// (f(p + e) - f(p - e)) / 2e with e = epsilon * max(1, |p|), using
/// |a - b| / max(|a|, |b|, 1e-8) per coordinate.
///
/// When `max_coordinates` is nonzero and smaller than the total parameter
/// count, that many coordinates are sampled uniformly (seeded); otherwise
/// every coordinate is checked.
FdCheckResult fd_check(const LossBuilder& loss, const std::vector<Tensor*>& params, double epsilon,
                       std::size_t max_coordinates = 0, std::uint64_t seed = 0);

double relative_error(double a, double b);

}  // namespace PRIMEIE_ABI
}  // namespace primeie
