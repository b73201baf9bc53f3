#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"
#include "primeie/params.hpp"

namespace primeie {
inline namespace PRIMEIE_ABI {

inline constexpr const char* kCheckpointVersion = "prime-ie/1";

std::string base64_encode(const std::vector<std::uint8_t>& bytes);
std::vector<std::uint8_t> base64_decode(const std::string& text);

/// {name: {shape, dtype, data}} with little-endian base64 payloads.
nlohmann::ordered_json tensors_to_json(const ParamSet& params);
/// Fills registered tensors by name. Missing names, unknown names and
/// shape mismatches are errors; f32 and f64 payloads are both accepted.
void tensors_from_json(const nlohmann::json& j, ParamSet& params);

/// Whole checkpoint document: version, metadata block and tensors.
std::string checkpoint_to_string(const nlohmann::ordered_json& metadata, const ParamSet& params);
/// Parses a checkpoint and returns its metadata; tensors are validated
/// and loaded by the caller via tensors_from_json on the "tensors" key.
nlohmann::json parse_checkpoint(const std::string& text);

}  // namespace PRIMEIE_ABI
}  // namespace primeie
