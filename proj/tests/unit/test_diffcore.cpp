#include <cmath>
#include <limits>

#include "doctest.h"
#include "primeie/error.hpp"
#include "primeie/gradcheck.hpp"
#include "primeie/kernels.hpp"
#include "primeie/ops.hpp"
#include "test_helpers.hpp"

using namespace primeie;
using testutil::random_tensor;

TEST_CASE("softmax of equal logits is uniform") {
  Graph g(false);
  Var x = g.constant(1, 2, {0, 0});
  auto y = g.values(softmax_rows(g, x));
  CHECK(y[0] == doctest::Approx(0.5));
  CHECK(y[1] == doctest::Approx(0.5));
}

TEST_CASE("logsumexp does not overflow") {
  Graph g(false);
  Var x = g.constant(1, 2, {1000, 1000});
  const double v = g.scalar(logsumexp_rows(g, x));
  CHECK(std::isfinite(v));
  CHECK(v == doctest::Approx(1000.0 + std::log(2.0)).epsilon(1e-6));
}

TEST_CASE("logsumexp is shift invariant") {
  Rng rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    Tensor t = random_tensor(rng, 1, 6, 3.0);
    const Real c = static_cast<Real>(uniform(rng, -5, 5));
    Graph g(false);
    const double a = g.scalar(logsumexp_rows(g, g.constant(t)));
    Tensor shifted = t;
    for (Real& v : shifted.values) v -= c;
    const double b = g.scalar(logsumexp_rows(g, g.constant(shifted))) + c;
    CHECK(std::abs(a - b) <= 1e-6 * std::max(1.0, std::abs(a)));
  }
}

TEST_CASE("matmul matches a naive triple loop") {
  Rng rng(3);
  Tensor a = random_tensor(rng, 3, 4), b = random_tensor(rng, 4, 2);
  Graph g(false);
  auto c = g.values(matmul(g, g.constant(a), g.constant(b)));
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 2; ++j) {
      double ref = 0;
      for (int k = 0; k < 4; ++k) ref += static_cast<double>(a.at(i, k)) * b.at(k, j);
      CHECK(std::abs(c[i * 2 + j] - ref) <= 1e-6 * std::max(1.0, std::abs(ref)));
    }
}

TEST_CASE("shape mismatch names both shapes") {
  Graph g(false);
  Var a = g.constant(3, 4, std::vector<Real>(12));
  Var b = g.constant(5, 2, std::vector<Real>(10));
  try {
    matmul(g, a, b);
    FAIL("expected ShapeError");
  } catch (const ShapeError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("[3x4]") != std::string::npos);
    CHECK(msg.find("[5x2]") != std::string::npos);
  }
}

TEST_CASE("backward of x squared") {
  Tensor x(1, 1, 3);
  Graph g;
  Var v = g.leaf(x);
  g.backward(mul(g, v, v));
  CHECK(x.grad[0] == doctest::Approx(6.0));
}

TEST_CASE("backward rejects non-scalar loss") {
  Tensor x(2, 2, 1);
  Graph g;
  Var v = g.leaf(x);
  CHECK_THROWS_AS(g.backward(v), ShapeError);
}

TEST_CASE("sum of softmax has zero gradient") {
  Rng rng(11);
  Tensor x = random_tensor(rng, 3, 5);
  Graph g;
  g.backward(sum_all(g, softmax_rows(g, g.leaf(x))));
  for (Real v : x.grad) CHECK(std::abs(v) < 1e-6);
}

TEST_CASE("masked positions receive no gradient") {
  Tensor x(1, 4, 0.5);
  Graph g;
  Var m = masked_fill(g, g.leaf(x), {false, true, false, true});
  CHECK(std::isinf(g.value(m)[1]));
  g.backward(logsumexp_rows(g, m));
  CHECK(x.grad[1] == 0);
  CHECK(x.grad[3] == 0);
  CHECK(x.grad[0] == doctest::Approx(0.5));
}

TEST_CASE("fd_check on a linear function") {
  // Dyadic values keep the arithmetic exact in either precision.
  Tensor w(1, 4);
  w.values = {0.5, -0.25, 0.75, 0.125};
  Tensor x(4, 1);
  x.values = {1, 2, -1, 0.5};
  auto loss = [&](Graph& g) { return matmul(g, g.leaf(w), g.constant(x)); };
  for (double eps : {1.0 / 128, 1.0 / 16}) {
    auto r = fd_check(loss, {&w}, eps);
    CHECK(r.max_rel_error <= 1e-6);
    CHECK(r.coordinates == 4);
  }
}

TEST_CASE("fd_check on a constant function") {
  Tensor w(2, 2, 1);
  auto loss = [&](Graph& g) {
    g.leaf(w);
    return g.constant(1, 1, {Real(3)});
  };
  auto r = fd_check(loss, {&w}, 1e-3);
  CHECK(r.max_rel_error == 0.0);
  for (Real v : w.grad) CHECK(v == 0);
}

TEST_CASE("two-layer network matches finite differences") {
  Rng rng(5);
  Tensor x = random_tensor(rng, 2, 3);
  Tensor w1 = random_tensor(rng, 3, 4);
  Tensor b1 = random_tensor(rng, 1, 4);
  Tensor w2 = random_tensor(rng, 4, 1);
  Tensor b2 = random_tensor(rng, 1, 1);
  // 12 + 4 + 4 = 20 trainable coordinates besides b2.
  auto loss = [&](Graph& g) {
    Var h = tanh_act(g, add(g, matmul(g, g.constant(x), g.leaf(w1)), g.leaf(b1)));
    Var y = add(g, matmul(g, h, g.leaf(w2)), g.leaf(b2));
    return sum_all(g, mul(g, y, y));
  };
  auto r = fd_check(loss, {&w1, &b1, &w2}, testutil::kFdEps);
  CHECK(r.coordinates == 20);
  CHECK(r.max_rel_error <= testutil::kGradTol);
}

// Central differences in 32-bit arithmetic bottom out around 3e-3 relative
// error on deep composites (rounding and truncation errors cross there), so
// composite audits run in the 64-bit build.
#ifdef PRIMEIE_DOUBLE
TEST_CASE("composite of the full operator set matches finite differences") {
  Rng rng(21);
  Tensor emb = random_tensor(rng, 10, 4);
  Tensor w = random_tensor(rng, 4, 4);
  Tensor gain = random_tensor(rng, 1, 4);
  Tensor bias = random_tensor(rng, 1, 4);
  Tensor v = random_tensor(rng, 8, 5);
  const std::vector<int> ids = {1, 4, 2, 2, 9};
  const std::vector<std::pair<int, int>> segments = {{0, 2}, {2, 3}, {3, 5}};
  auto loss = [&](Graph& g) {
    Var e = embedding(g, g.leaf(emb), ids);                        // 5x4
    Var h = layer_norm_rows(g, matmul(g, e, g.leaf(w)), g.leaf(gain), g.leaf(bias));
    Var a = softmax_rows(g, matmul(g, h, transpose(g, h)));        // 5x5
    Var ctx = matmul(g, a, gelu(g, h));                            // 5x4
    Var pooled = segment_mean(g, ctx, segments);                   // 3x4
    Var both = concat_cols(g, {pooled, sigmoid(g, pooled)});       // 3x8
    Var logits = matmul(g, both, g.leaf(v));                       // 3x3
    std::vector<bool> mask(15, false);
    mask[2] = true;
    Var lsm = log_softmax_rows(g, masked_fill(g, logits, mask));
    const std::vector<int> targets = {0, 4, 1};
    Var nll = pick_nll(g, lsm, targets);
    Var extra = mean_rows(g, concat_rows(g, {slice_rows(g, ctx, 0, 2), slice_cols(g, e, 0, 4)}));
    Var lse = sum_all(g, logsumexp_rows(g, tanh_act(g, gather_cols(g, h, std::vector<int>{0, 3}))));
    return add(g, add(g, nll, sum_all(g, mul(g, extra, extra))), scale(g, lse, Real(0.5)));
  };
  auto r = fd_check(loss, {&emb, &w, &gain, &bias, &v}, testutil::kFdEps, 100, 99);
  CHECK(r.coordinates == 100);
  INFO("worst analytic " << r.analytic << " numeric " << r.numeric << " tensor " << r.worst_tensor);
  CHECK(r.max_rel_error <= testutil::kGradTol);
}
#endif

TEST_CASE("identical graphs give bit-identical values") {
  Rng rng(2);
  Tensor a = random_tensor(rng, 4, 4);
  auto run = [&] {
    Graph g(false);
    Var x = g.constant(a);
    return g.values(softmax_rows(g, matmul(g, gelu(g, x), x)));
  };
  CHECK(run() == run());
}

TEST_CASE("parallel kernels are bit-identical to serial references") {
  Rng rng(4);
  const int m = 37, k = 29, n = 41;
  Tensor a = random_tensor(rng, m, k), b = random_tensor(rng, k, n), bt = random_tensor(rng, n, k);
  Tensor c = random_tensor(rng, m, n);
  std::vector<Real> s(m * n), p(m * n);
  kernels::gemm_serial(a.values.data(), b.values.data(), s.data(), m, k, n, false);
  kernels::gemm_parallel(a.values.data(), b.values.data(), p.data(), m, k, n, false);
  CHECK(s == p);
  std::vector<Real> s2(m * n, 0), p2(m * n, 0);
  kernels::gemm_nt_serial(a.values.data(), bt.values.data(), s2.data(), m, k, n);
  kernels::gemm_nt_parallel(a.values.data(), bt.values.data(), p2.data(), m, k, n);
  CHECK(s2 == p2);
  std::vector<Real> s3(k * n, 0), p3(k * n, 0);
  kernels::gemm_tn_serial(a.values.data(), c.values.data(), s3.data(), m, k, n);
  kernels::gemm_tn_parallel(a.values.data(), c.values.data(), p3.data(), m, k, n);
  CHECK(s3 == p3);
}
