#include "primeie/checkpoint.hpp"

#include <bit>
#include <cstring>

#include "primeie/error.hpp"

namespace primeie {
inline namespace PRIMEIE_ABI {

static_assert(std::endian::native == std::endian::little, "checkpoint payloads assume a little-endian host");

namespace {

constexpr char kAlphabet[] = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";

int sextet(char c) {
  if (c >= 'A' && c <= 'Z') return c - 'A';
  if (c >= 'a' && c <= 'z') return c - 'a' + 26;
  if (c >= '0' && c <= '9') return c - '0' + 52;
  if (c == '+') return 62;
  if (c == '/') return 63;
  return -1;
}

template <typename T>
std::vector<Real> unpack(const std::vector<std::uint8_t>& bytes) {
  std::vector<Real> out(bytes.size() / sizeof(T));
  for (std::size_t i = 0; i < out.size(); ++i) {
    T v;
    std::memcpy(&v, bytes.data() + i * sizeof(T), sizeof(T));
    out[i] = static_cast<Real>(v);
  }
  return out;
}

}  // namespace

std::string base64_encode(const std::vector<std::uint8_t>& bytes) {
  std::string out;
  out.reserve((bytes.size() + 2) / 3 * 4);
  std::size_t i = 0;
  for (; i + 2 < bytes.size(); i += 3) {
    const std::uint32_t v = (bytes[i] << 16) | (bytes[i + 1] << 8) | bytes[i + 2];
    for (int s = 18; s >= 0; s -= 6) out += kAlphabet[(v >> s) & 63];
  }
  const std::size_t rest = bytes.size() - i;
  if (rest > 0) {
    std::uint32_t v = bytes[i] << 16;
    if (rest == 2) v |= bytes[i + 1] << 8;
    out += kAlphabet[(v >> 18) & 63];
    out += kAlphabet[(v >> 12) & 63];
    out += rest == 2 ? kAlphabet[(v >> 6) & 63] : '=';
    out += '=';
  }
  return out;
}

std::vector<std::uint8_t> base64_decode(const std::string& text) {
  if (text.size() % 4 != 0) throw ParseError("base64: length is not a multiple of 4");
  std::vector<std::uint8_t> out;
  out.reserve(text.size() / 4 * 3);
  for (std::size_t i = 0; i < text.size(); i += 4) {
    std::uint32_t v = 0;
    int pad = 0;
    for (int k = 0; k < 4; ++k) {
      const char c = text[i + k];
      int s = 0;
      if (c == '=' && i + 4 == text.size() && k >= 2) {
        ++pad;
      } else if (pad > 0 || (s = sextet(c)) < 0) {
        throw ParseError("base64: invalid character at offset " + std::to_string(i + k));
      }
      v = (v << 6) | static_cast<std::uint32_t>(s);
    }
    out.push_back(static_cast<std::uint8_t>(v >> 16));
    if (pad < 2) out.push_back(static_cast<std::uint8_t>(v >> 8));
    if (pad < 1) out.push_back(static_cast<std::uint8_t>(v));
  }
  return out;
}

nlohmann::ordered_json tensors_to_json(const ParamSet& params) {
  nlohmann::ordered_json j = nlohmann::ordered_json::object();
  for (int i = 0; i < params.size(); ++i) {
    const Tensor& t = params.at(i);
    std::vector<std::uint8_t> bytes(t.size() * sizeof(Real));
    std::memcpy(bytes.data(), t.values.data(), bytes.size());
    j[params.name(i)] = {{"shape", t.shape}, {"dtype", kRealDtype}, {"data", base64_encode(bytes)}};
  }
  return j;
}

void tensors_from_json(const nlohmann::json& j, ParamSet& params) {
  if (!j.is_object()) throw ValidationError("checkpoint: tensors must be an object");
  for (const auto& [name, entry] : j.items())
    if (params.index_of(name) < 0) throw ValidationError("checkpoint: unexpected tensor '" + name + "'");
  for (int i = 0; i < params.size(); ++i) {
    const std::string& name = params.name(i);
    if (!j.contains(name)) throw ValidationError("checkpoint: missing tensor '" + name + "'");
    const auto& entry = j.at(name);
    Tensor& t = params.at(i);
    const auto shape = entry.at("shape").get<std::vector<int>>();
    if (shape != t.shape)
      throw ShapeError("checkpoint: tensor '" + name + "' has shape " + shape_string(shape) + ", expected " +
                       shape_string(t.shape));
    const std::string dtype = entry.at("dtype").get<std::string>();
    const auto bytes = base64_decode(entry.at("data").get<std::string>());
    std::vector<Real> values;
    if (dtype == "f32")
      values = unpack<float>(bytes);
    else if (dtype == "f64")
      values = unpack<double>(bytes);
    else
      throw ValidationError("checkpoint: tensor '" + name + "' has unknown dtype '" + dtype + "'");
    if (values.size() != t.size())
      throw ShapeError("checkpoint: tensor '" + name + "' payload holds " + std::to_string(values.size()) +
                       " values, expected " + std::to_string(t.size()));
    t.values = std::move(values);
  }
}

std::string checkpoint_to_string(const nlohmann::ordered_json& metadata, const ParamSet& params) {
  nlohmann::ordered_json j;
  j["version"] = kCheckpointVersion;
  j["metadata"] = metadata;
  j["tensors"] = tensors_to_json(params);
  return j.dump() + "\n";
}

nlohmann::json parse_checkpoint(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("checkpoint: ") + e.what());
  }
  if (j.value("version", std::string()) != kCheckpointVersion)
    throw ValidationError("checkpoint: unsupported version '" + j.value("version", std::string()) + "'");
  if (!j.contains("tensors")) throw ValidationError("checkpoint: no tensors");
  return j;
}

}  // namespace PRIMEIE_ABI
}  // namespace primeie
