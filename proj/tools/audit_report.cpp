#include "audit_report.hpp"

#include <algorithm>

#include "primeie/audit.hpp"

namespace primeie_audit {

#ifdef PRIMEIE_DOUBLE
Summary grad_audit_f64(std::size_t coordinates, std::uint64_t seed) {
#else
Summary grad_audit_f32(std::size_t coordinates, std::uint64_t seed) {
#endif
  Summary s;
  s.tolerance = primeie::audit_tolerance();
  s.json["precision"] = primeie::kRealDtype;
  s.json["epsilon"] = primeie::audit_epsilon();
  s.json["tolerance"] = s.tolerance;
  auto models = nlohmann::ordered_json::array();
  for (const auto& e : primeie::audit_model_gradients(coordinates, seed)) {
    s.max_rel_error = std::max(s.max_rel_error, e.result.max_rel_error);
    models.push_back({{"model", primeie::model_kind_name(e.kind)},
                      {"coordinates", e.result.coordinates},
                      {"max_rel_error", e.result.max_rel_error},
                      {"worst_tensor", e.worst_tensor},
                      {"worst_index", e.result.worst_index},
                      {"analytic", e.result.analytic},
                      {"numeric", e.result.numeric}});
  }
  s.passed = s.max_rel_error <= s.tolerance;
  s.json["models"] = models;
  s.json["max_rel_error"] = s.max_rel_error;
  s.json["passed"] = s.passed;
  return s;
}

}  // namespace primeie_audit
