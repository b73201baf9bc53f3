#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"
#include "primeie/params.hpp"
#include "primeie/random.hpp"

namespace primeie {
inline namespace PRIMEIE_ABI {

struct EncoderConfig {
  int vocab_size = 0;
  int hidden = 64;
  int heads = 4;
  int layers = 2;
  int ff = 128;
  int max_positions = 160;
  double dropout = 0.0;
  std::uint64_t seed = 0;

  int head_dim() const { return hidden / heads; }
  /// Throws ConfigError on a non-positive size or hidden % heads != 0.
  void validate() const;
  nlohmann::ordered_json to_json() const;
  static EncoderConfig from_json(const nlohmann::json& j);
};

/// Softmax weights of every head, in layer-major order; each n x n.
struct AttentionTrace {
  std::vector<Tensor> weights;
};

/// Post-layer-norm transformer encoder with learned token, position and
/// segment embeddings. The key projection has no bias: softmax cancels it. Registers its tensors in a ParamSet and reads
/// them back through a Binder.
class Encoder {
 public:
  Encoder() = default;
  Encoder(const EncoderConfig& config, ParamSet& params, const std::string& prefix = "encoder.");

  const EncoderConfig& config() const { return config_; }
  /// Xavier-uniform matrices, zero biases, unit layer-norm gains.
  void init(ParamSet& params, Rng& rng) const;
  /// n x hidden contextual vectors. `dropout_rng` enables dropout when the
  /// config asks for it; decoding passes null.
  Var forward(Binder& bind, const std::vector<int>& ids, const std::vector<int>& segments,
              AttentionTrace* trace = nullptr, Rng* dropout_rng = nullptr) const;

 private:
  struct Layer {
    int wq, bq, wk, wv, bv, wo, bo;
    int ln1_g, ln1_b;
    int w1, b1, w2, b2;
    int ln2_g, ln2_b;
  };
  EncoderConfig config_;
  int token_ = -1, position_ = -1, segment_ = -1, ln_g_ = -1, ln_b_ = -1;
  std::vector<Layer> layers_;
};

/// Standalone encoder: configuration, tensors and layout.
struct EncoderParams {
  EncoderConfig config;
  ParamSet params;
  Encoder encoder;
};

EncoderParams init_encoder(const EncoderConfig& config, std::uint64_t seed);
Tensor encode(const EncoderParams& params, const std::vector<int>& ids, const std::vector<int>& segments,
              AttentionTrace* trace = nullptr);

std::string encoder_checkpoint(const EncoderParams& params);
EncoderParams load_encoder_checkpoint(const std::string& text);

/// x * W + b for a 1 x out bias row.
Var affine(Graph& g, Var x, Var w, Var b);

}  // namespace PRIMEIE_ABI
}  // namespace primeie
