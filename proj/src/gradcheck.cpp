#include "primeie/gradcheck.hpp"

#include <algorithm>
#include <cmath>

#include "primeie/error.hpp"
#include "primeie/random.hpp"

namespace primeie {
inline namespace PRIMEIE_ABI {

double relative_error(double a, double b) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-8});
}

namespace {

double evaluate(const LossBuilder& loss) {
  Graph g(false);
  return static_cast<double>(g.scalar(loss(g)));
}

}  // namespace

FdCheckResult fd_check(const LossBuilder& loss, const std::vector<Tensor*>& params, double epsilon,
                       std::size_t max_coordinates, std::uint64_t seed) {
  if (!(epsilon > 0)) throw ConfigError("fd_check: epsilon must be positive");
  for (Tensor* p : params) p->zero_grad();
  {
    Graph g(true);
    g.backward(loss(g));
  }

  std::vector<std::pair<std::size_t, std::size_t>> coords;
  for (std::size_t t = 0; t < params.size(); ++t)
    for (std::size_t i = 0; i < params[t]->values.size(); ++i) coords.emplace_back(t, i);
  if (max_coordinates > 0 && max_coordinates < coords.size()) {
    Rng rng(seed);
    shuffle(coords, rng);
    coords.resize(max_coordinates);
    std::sort(coords.begin(), coords.end());
  }

  FdCheckResult result;
  result.coordinates = coords.size();
  for (const auto& [t, i] : coords) {
    Real& p = params[t]->values[i];
    const Real saved = p;
    const double step = epsilon * std::max(1.0, std::abs(static_cast<double>(saved)));
    p = static_cast<Real>(saved + step);
    const double up_arg = static_cast<double>(p) - saved;
    const double up = evaluate(loss);
    p = static_cast<Real>(saved - step);
    const double down_arg = saved - static_cast<double>(p);
    const double down = evaluate(loss);
    p = saved;
    // Divide by the step actually representable in Real.
    const double numeric = (up - down) / (up_arg + down_arg);
    const double analytic = static_cast<double>(params[t]->grad[i]);
    const double err = relative_error(analytic, numeric);
    if (err > result.max_rel_error || result.coordinates == 1) {
      result.max_rel_error = std::max(result.max_rel_error, err);
      result.worst_tensor = t;
      result.worst_index = i;
      result.analytic = analytic;
      result.numeric = numeric;
    }
  }
  return result;
}

}  // namespace PRIMEIE_ABI
}  // namespace primeie
