#include <cmath>
#include <cstring>

#include "doctest.h"
#include "primeie/checkpoint.hpp"
#include "primeie/encoder.hpp"
#include "primeie/error.hpp"
#include "primeie/gradcheck.hpp"
#include "primeie/ops.hpp"
#include "test_helpers.hpp"

using namespace primeie;

namespace {

EncoderConfig small_config() {
  EncoderConfig c;
  c.vocab_size = 12;
  c.hidden = 8;
  c.heads = 2;
  c.layers = 2;
  c.ff = 16;
  c.max_positions = 16;
  return c;
}

double max_abs_diff(const Tensor& a, const Tensor& b, int a_row, int b_row, int rows) {
  double m = 0;
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < a.cols(); ++c) m = std::max(m, std::abs(double(a.at(a_row + r, c)) - b.at(b_row + r, c)));
  return m;
}

}  // namespace

TEST_CASE("configuration checks") {
  EncoderConfig c = small_config();
  CHECK(c.head_dim() == 4);
  c.heads = 3;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  CHECK_THROWS_AS(init_encoder(c, 1), ConfigError);
  c = small_config();
  c.vocab_size = 0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
}

TEST_CASE("initialization is deterministic and follows the stated ranges") {
  EncoderParams a = init_encoder(small_config(), 7);
  EncoderParams b = init_encoder(small_config(), 7);
  EncoderParams c = init_encoder(small_config(), 8);
  REQUIRE(a.params.size() == b.params.size());
  bool differs = false;
  for (int i = 0; i < a.params.size(); ++i) {
    const auto& x = a.params.at(i).values;
    CHECK(std::memcmp(x.data(), b.params.at(i).values.data(), x.size() * sizeof(Real)) == 0);
    differs |= x != c.params.at(i).values;
    const Tensor& t = a.params.at(i);
    const std::string& name = a.params.name(i);
    if (name.find("gain") != std::string::npos) {
      for (Real v : t.values) CHECK(v == 1);
    } else if (name.find("bias") != std::string::npos || name.find(".b") != std::string::npos) {
      for (Real v : t.values) CHECK(v == 0);
    } else {
      const double r = std::sqrt(6.0 / (t.rows() + t.cols()));
      for (Real v : t.values) CHECK(std::abs(v) <= r);
    }
  }
  CHECK(differs);
  // 2 layers x (4 d*d + 3 d + 2 d*ff + ff + d + 4 d) + embeddings + embedding norm
  const std::size_t d = 8, ff = 16;
  CHECK(a.params.scalar_count() ==
        (12 + 16 + 2) * d + 2 * d + 2 * (4 * d * d + 3 * d + 2 * d * ff + ff + d + 4 * d));
}

TEST_CASE("shapes and input errors") {
  EncoderParams p = init_encoder(small_config(), 1);
  CHECK(encode(p, {3}, {0}).shape == std::vector<int>{1, 8});
  CHECK_THROWS_AS(encode(p, std::vector<int>(17, 1), std::vector<int>(17, 0)), ValidationError);
  CHECK_THROWS_AS(encode(p, {1, 2}, {0, 2}), ValidationError);
  CHECK_THROWS_AS(encode(p, {1, 12}, {0, 0}), ValidationError);
  CHECK_THROWS_AS(encode(p, {1, 2}, {0}), ShapeError);
}

TEST_CASE("attention rows sum to one") {
  EncoderParams p = init_encoder(small_config(), 2);
  AttentionTrace trace;
  encode(p, {0, 5, 6, 1, 7, 8, 9, 1}, {0, 0, 0, 0, 1, 1, 1, 1}, &trace);
  CHECK(trace.weights.size() == 4);
  for (const auto& w : trace.weights)
    for (int r = 0; r < w.rows(); ++r) {
      double s = 0;
      for (int c = 0; c < w.cols(); ++c) s += w.at(r, c);
      CHECK(std::abs(s - 1.0) <= 1e-5);
    }
}

TEST_CASE("position embeddings break permutation invariance") {
  EncoderParams p = init_encoder(small_config(), 3);
  Tensor a = encode(p, {0, 5, 6, 1}, {0, 0, 0, 0});
  Tensor b = encode(p, {0, 6, 5, 1}, {0, 0, 0, 0});
  // Content 5 sits at position 1 in a and at position 2 in b.
  CHECK(max_abs_diff(a, b, 1, 2, 1) > 1e-4);
}

TEST_CASE("the prime changes sentence vectors") {
  EncoderParams p = init_encoder(small_config(), 4);
  Tensor a = encode(p, {0, 4, 1, 7, 8, 9, 1}, {0, 0, 0, 1, 1, 1, 1});
  Tensor b = encode(p, {0, 5, 1, 7, 8, 9, 1}, {0, 0, 0, 1, 1, 1, 1});
  CHECK(max_abs_diff(a, b, 3, 3, 3) > 0);
  CHECK(max_abs_diff(a, encode(p, {0, 4, 1, 7, 8, 9, 1}, {0, 0, 0, 1, 1, 1, 1}), 0, 0, 7) == 0);
}

TEST_CASE("checkpoint round trip") {
  CHECK(base64_encode({}) == "");
  const std::string foobar = "foobar";
  for (std::size_t n = 0; n <= foobar.size(); ++n) {
    std::vector<std::uint8_t> bytes(foobar.begin(), foobar.begin() + n);
    CHECK(base64_decode(base64_encode(bytes)) == bytes);
  }
  CHECK(base64_encode({'f', 'o', 'o', 'b'}) == "Zm9vYg==");
  CHECK(base64_encode({'f', 'o', 'o', 'b', 'a', 'r'}) == "Zm9vYmFy");
  CHECK_THROWS_AS(base64_decode("Zm9"), ParseError);
  CHECK_THROWS_AS(base64_decode("Zm!v"), ParseError);

  EncoderParams p = init_encoder(small_config(), 5);
  const std::string text = encoder_checkpoint(p);
  CHECK(text.find("\"version\":\"prime-ie/1\"") != std::string::npos);
  EncoderParams q = load_encoder_checkpoint(text);
  for (int i = 0; i < p.params.size(); ++i) CHECK(p.params.at(i).values == q.params.at(i).values);
  CHECK(encoder_checkpoint(q) == text);

  auto j = nlohmann::json::parse(text);
  j["tensors"]["encoder.segment"]["shape"] = {3, 8};
  CHECK_THROWS_AS(tensors_from_json(j["tensors"], q.params), ShapeError);
  j = nlohmann::json::parse(text);
  j["tensors"].erase("encoder.segment");
  CHECK_THROWS_AS(tensors_from_json(j["tensors"], q.params), ValidationError);
  j = nlohmann::json::parse(text);
  j["version"] = "other";
  CHECK_THROWS_AS(parse_checkpoint(j.dump()), ValidationError);
}

#ifdef PRIMEIE_DOUBLE
TEST_CASE("gradient of a scalar head on the encoder") {
  EncoderParams p = init_encoder(small_config(), 6);
  Rng rng(6);
  Tensor head = testutil::random_tensor(rng, 8, 1);
  const std::vector<int> ids = {0, 4, 1, 7, 8, 4, 1};
  const std::vector<int> segs = {0, 0, 0, 1, 1, 1, 1};
  auto loss = [&](Graph& g) {
    Binder bind(g, p.params, true);
    Var h = p.encoder.forward(bind, ids, segs);
    return sum_all(g, tanh_act(g, matmul(g, h, g.leaf(head))));
  };
  auto params = p.params.pointers();
  params.push_back(&head);
  FdCheckResult r = fd_check(loss, params, testutil::kFdEps, 300, 1);
  CHECK(r.coordinates == 300);
  INFO("worst ", p.params.name(int(std::min<std::size_t>(r.worst_tensor, p.params.size() - 1))), "[", r.worst_index, "] ", r.analytic, " vs ", r.numeric);
  CHECK(r.max_rel_error <= testutil::kGradTol);
}
#endif
