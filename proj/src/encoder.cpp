#include "primeie/encoder.hpp"

#include <cmath>

#include "primeie/checkpoint.hpp"
#include "primeie/error.hpp"
#include "primeie/ops.hpp"

namespace primeie {
inline namespace PRIMEIE_ABI {

void EncoderConfig::validate() const {
  if (vocab_size < 1) throw ConfigError("encoder: vocab_size must be positive");
  if (hidden < 1 || heads < 1 || layers < 0 || ff < 1 || max_positions < 1)
    throw ConfigError("encoder: sizes must be positive");
  if (hidden % heads != 0)
    throw ConfigError("encoder: hidden " + std::to_string(hidden) + " is not divisible by heads " +
                      std::to_string(heads));
  if (dropout < 0.0 || dropout >= 1.0) throw ConfigError("encoder: dropout must lie in [0, 1)");
}

nlohmann::ordered_json EncoderConfig::to_json() const {
  return {{"vocab_size", vocab_size}, {"hidden", hidden}, {"heads", heads},     {"layers", layers},
          {"ff", ff},                 {"max_positions", max_positions},         {"dropout", dropout},
          {"seed", seed}};
}

EncoderConfig EncoderConfig::from_json(const nlohmann::json& j) {
  EncoderConfig c;
  c.vocab_size = j.value("vocab_size", c.vocab_size);
  c.hidden = j.value("hidden", c.hidden);
  c.heads = j.value("heads", c.heads);
  c.layers = j.value("layers", c.layers);
  c.ff = j.value("ff", c.ff);
  c.max_positions = j.value("max_positions", c.max_positions);
  c.dropout = j.value("dropout", c.dropout);
  c.seed = j.value("seed", c.seed);
  return c;
}

Var affine(Graph& g, Var x, Var w, Var b) { return add(g, matmul(g, x, w), b); }

Encoder::Encoder(const EncoderConfig& config, ParamSet& params, const std::string& prefix) : config_(config) {
  config_.validate();
  const int d = config.hidden;
  token_ = params.add(prefix + "token", config.vocab_size, d);
  position_ = params.add(prefix + "position", config.max_positions, d);
  segment_ = params.add(prefix + "segment", 2, d);
  ln_g_ = params.add(prefix + "embed_ln.gain", 1, d);
  ln_b_ = params.add(prefix + "embed_ln.bias", 1, d);
  for (int l = 0; l < config.layers; ++l) {
    const std::string p = prefix + "layer" + std::to_string(l) + ".";
    Layer L;
    L.wq = params.add(p + "attn.q.weight", d, d);
    L.bq = params.add(p + "attn.q.bias", 1, d);
    L.wk = params.add(p + "attn.k.weight", d, d);
    L.wv = params.add(p + "attn.v.weight", d, d);
    L.bv = params.add(p + "attn.v.bias", 1, d);
    L.wo = params.add(p + "attn.o.weight", d, d);
    L.bo = params.add(p + "attn.o.bias", 1, d);
    L.ln1_g = params.add(p + "ln1.gain", 1, d);
    L.ln1_b = params.add(p + "ln1.bias", 1, d);
    L.w1 = params.add(p + "ff.w1", d, config.ff);
    L.b1 = params.add(p + "ff.b1", 1, config.ff);
    L.w2 = params.add(p + "ff.w2", config.ff, d);
    L.b2 = params.add(p + "ff.b2", 1, d);
    L.ln2_g = params.add(p + "ln2.gain", 1, d);
    L.ln2_b = params.add(p + "ln2.bias", 1, d);
    layers_.push_back(L);
  }
}

void Encoder::init(ParamSet& params, Rng& rng) const {
  for (int id : {token_, position_, segment_}) xavier_uniform(params.at(id), rng);
  fill(params.at(ln_g_), 1);
  fill(params.at(ln_b_), 0);
  for (const Layer& L : layers_) {
    for (int w : {L.wq, L.wk, L.wv, L.wo, L.w1, L.w2}) xavier_uniform(params.at(w), rng);
    for (int b : {L.bq, L.bv, L.bo, L.b1, L.b2, L.ln1_b, L.ln2_b}) fill(params.at(b), 0);
    fill(params.at(L.ln1_g), 1);
    fill(params.at(L.ln2_g), 1);
  }
}

namespace {

Var dropout(Graph& g, Var x, double p, Rng* rng) {
  if (!rng || p <= 0.0) return x;
  std::vector<Real> mask(g.size(x));
  const Real keep = static_cast<Real>(1.0 / (1.0 - p));
  for (Real& m : mask) m = uniform01(*rng) < p ? Real(0) : keep;
  return mul(g, x, g.constant(g.rows(x), g.cols(x), std::move(mask)));
}

}  // namespace

Var Encoder::forward(Binder& bind, const std::vector<int>& ids, const std::vector<int>& segments,
                     AttentionTrace* trace, Rng* dropout_rng) const {
  Graph& g = bind.graph();
  const int n = static_cast<int>(ids.size());
  if (n == 0) throw ValidationError("encode: empty input");
  if (n > config_.max_positions)
    throw ValidationError("encode: input of " + std::to_string(n) + " pieces exceeds max_positions " +
                          std::to_string(config_.max_positions));
  if (segments.size() != ids.size()) throw ShapeError("encode: segment ids do not match piece ids");
  for (int id : ids)
    if (id < 0 || id >= config_.vocab_size) throw ValidationError("encode: piece id " + std::to_string(id) + " out of range");
  for (int s : segments)
    if (s != 0 && s != 1) throw ValidationError("encode: segment id " + std::to_string(s) + " is not 0 or 1");

  std::vector<int> positions(n);
  for (int i = 0; i < n; ++i) positions[i] = i;
  Var x = add(g, embedding(g, bind(token_), ids), embedding(g, bind(position_), positions));
  x = add(g, x, embedding(g, bind(segment_), segments));
  x = layer_norm_rows(g, x, bind(ln_g_), bind(ln_b_));
  x = dropout(g, x, config_.dropout, dropout_rng);

  const int dh = config_.head_dim();
  const Real inv_sqrt = static_cast<Real>(1.0 / std::sqrt(static_cast<double>(dh)));
  for (const Layer& L : layers_) {
    Var q = affine(g, x, bind(L.wq), bind(L.bq));
    Var k = matmul(g, x, bind(L.wk));
    Var v = affine(g, x, bind(L.wv), bind(L.bv));
    std::vector<Var> heads;
    for (int h = 0; h < config_.heads; ++h) {
      Var qh = slice_cols(g, q, h * dh, (h + 1) * dh);
      Var kh = slice_cols(g, k, h * dh, (h + 1) * dh);
      Var vh = slice_cols(g, v, h * dh, (h + 1) * dh);
      Var att = softmax_rows(g, scale(g, matmul(g, qh, transpose(g, kh)), inv_sqrt));
      if (trace) trace->weights.emplace_back(std::vector<int>{n, n}, g.values(att));
      heads.push_back(matmul(g, att, vh));
    }
    Var a = affine(g, concat_cols(g, heads), bind(L.wo), bind(L.bo));
    a = dropout(g, a, config_.dropout, dropout_rng);
    x = layer_norm_rows(g, add(g, x, a), bind(L.ln1_g), bind(L.ln1_b));
    Var f = affine(g, gelu(g, affine(g, x, bind(L.w1), bind(L.b1))), bind(L.w2), bind(L.b2));
    f = dropout(g, f, config_.dropout, dropout_rng);
    x = layer_norm_rows(g, add(g, x, f), bind(L.ln2_g), bind(L.ln2_b));
  }
  return x;
}

EncoderParams init_encoder(const EncoderConfig& config, std::uint64_t seed) {
  EncoderParams p;
  p.config = config;
  p.config.seed = seed;
  p.encoder = Encoder(p.config, p.params);
  Rng rng(seed);
  p.encoder.init(p.params, rng);
  return p;
}

Tensor encode(const EncoderParams& params, const std::vector<int>& ids, const std::vector<int>& segments,
              AttentionTrace* trace) {
  Graph g(false);
  Binder bind(g, params.params);
  Var out = params.encoder.forward(bind, ids, segments, trace);
  return Tensor({g.rows(out), g.cols(out)}, g.values(out));
}

std::string encoder_checkpoint(const EncoderParams& params) {
  nlohmann::ordered_json meta;
  meta["kind"] = "encoder";
  meta["encoder"] = params.config.to_json();
  return checkpoint_to_string(meta, params.params);
}

EncoderParams load_encoder_checkpoint(const std::string& text) {
  const nlohmann::json j = parse_checkpoint(text);
  EncoderParams p;
  p.config = EncoderConfig::from_json(j.at("metadata").at("encoder"));
  p.encoder = Encoder(p.config, p.params);
  tensors_from_json(j.at("tensors"), p.params);
  return p;
}

}  // namespace PRIMEIE_ABI
}  // namespace primeie
