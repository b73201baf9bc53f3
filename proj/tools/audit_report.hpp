#pragma once

#include <cstdint>
#include <string>

#include "json.hpp"

// Gradient audit summaries for both real precisions. Each variant is
// compiled against its own library build, so one binary can run both.
namespace primeie_audit {

struct Summary {
  nlohmann::ordered_json json;
  double max_rel_error = 0.0;
  double tolerance = 0.0;
  bool passed = false;
};

Summary grad_audit_f32(std::size_t coordinates, std::uint64_t seed);
Summary grad_audit_f64(std::size_t coordinates, std::uint64_t seed);

}  // namespace primeie_audit
