#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "primeie/gradcheck.hpp"
#include "primeie/models.hpp"

namespace primeie {
inline namespace PRIMEIE_ABI {

struct CrfCheckReport {
  long instances = 0;
  double max_rel_error = 0.0;  // log partition against enumeration
  long viterbi_mismatches = 0;
  bool passed(double tolerance = 1e-6) const { return max_rel_error <= tolerance && viterbi_mismatches == 0; }
};

/// Compares log_partition and viterbi with exhaustive enumeration for
/// `per_shape` random instances of every (L, T) up to the given sizes.
/// Half the instances use small integer scores so that ties are common.
CrfCheckReport crf_check(int per_shape = 200, int max_length = 6, int max_labels = 5, std::uint64_t seed = 0);

struct GradAuditEntry {
  ModelKind kind;
  FdCheckResult result;
  std::string worst_tensor;  // parameter name of the worst coordinate
};

/// fd_check on the summed loss of a few instances per model kind, at toy
/// sizes on generated data.
std::vector<GradAuditEntry> audit_model_gradients(std::size_t coordinates = 120, std::uint64_t seed = 0);

/// Finite-difference step and pass threshold for the build's precision.
double audit_epsilon();
double audit_tolerance();

}  // namespace PRIMEIE_ABI
}  // namespace primeie
