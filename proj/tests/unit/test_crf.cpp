#include <cmath>

#include "crf_oracle.hpp"
#include "doctest.h"
#include "primeie/error.hpp"
#include "primeie/gradcheck.hpp"
#include "primeie/ops.hpp"
#include "test_helpers.hpp"

using namespace primeie;
using testutil::brute_force;
using testutil::random_table;
using testutil::random_tensor;

TEST_CASE("single step with zero scores") {
  TransitionTable t(3);
  Tensor e(1, 3);
  CHECK(log_partition(e, t) == doctest::Approx(std::log(3.0)).epsilon(1e-12));
}

TEST_CASE("log partition matches enumeration for L=3 T=3") {
  Rng rng(1);
  TransitionTable t = random_table(rng, 3);
  Tensor e = random_tensor(rng, 3, 3);
  const double z = log_partition(e, t);
  CHECK(std::abs(z - brute_force(e, t).log_z) <= 1e-6 * std::max(1.0, std::abs(z)));
}

TEST_CASE("row shifts of the emissions shift the partition additively") {
  Rng rng(2);
  TransitionTable t = random_table(rng, 4);
  Tensor e = random_tensor(rng, 5, 4);
  const double c = 0.75;
  Tensor shifted = e;
  for (auto& v : shifted.values) v += static_cast<Real>(c);
  CHECK(log_partition(shifted, t) == doctest::Approx(log_partition(e, t) + 5 * c).epsilon(1e-6));
}

TEST_CASE("one-label space has zero nll") {
  Rng rng(3);
  TransitionTable t = random_table(rng, 1);
  Tensor e = random_tensor(rng, 4, 1);
  std::vector<int> gold(4, 0);
  CHECK(std::abs(nll(e, t, gold)) < 1e-12);
}

TEST_CASE("nll is zero exactly when a single unmasked path remains") {
  TransitionTable t(2);
  Rng rng(9);
  Tensor e = random_tensor(rng, 3, 2);
  // Only 0 -> 1 -> 0 survives: start must be 0, 0 must go to 1, 1 must go to 0.
  t.mask.start[1] = true;
  t.mask.transition[0 * 2 + 0] = true;
  t.mask.transition[1 * 2 + 1] = true;
  std::vector<int> only = {0, 1, 0};
  CHECK(nll(e, t, only) == 0.0);
  TransitionTable open(2);
  CHECK(nll(e, open, only) > 0.0);
  std::vector<int> masked = {0, 0, 1};
  CHECK_THROWS_AS(nll(e, t, masked), DecodeError);
}

TEST_CASE("viterbi path has the smallest nll") {
  Rng rng(4);
  TransitionTable t = random_table(rng, 3);
  Tensor e = random_tensor(rng, 4, 3);
  auto best = viterbi(e, t);
  const double best_nll = nll(e, t, best.labels);
  std::vector<int> y(4, 0);
  while (true) {
    CHECK(best_nll <= nll(e, t, y) + 1e-9);
    int pos = 3;
    while (pos >= 0 && ++y[pos] == 3) y[pos--] = 0;
    if (pos < 0) break;
  }
}

TEST_CASE("crf gradient matches finite differences on 4x3 emissions") {
  Rng rng(5);
  Tensor e = random_tensor(rng, 4, 3);
  TransitionTable t = random_table(rng, 3);
  const std::vector<int> gold = {0, 2, 1, 1};
  auto loss = [&](Graph& g) {
    return crf_nll(g, g.leaf(e), g.leaf(t.transition), g.leaf(t.start), g.leaf(t.end), t.mask, gold);
  };
  auto r = fd_check(loss, {&e, &t.transition, &t.start, &t.end}, testutil::kFdEps);
  CHECK(r.max_rel_error <= testutil::kGradTol);
  Graph g(false);
  CHECK(g.scalar(loss(g)) == doctest::Approx(nll(e, t, gold)).epsilon(1e-5));
}

TEST_CASE("crf gradient with a BIO mask") {
  Rng rng(6);
  LabelSpace space = LabelSpace::typed_bio({"X", "Y"});
  TransitionTable t = random_table(rng, space.size());
  t.mask = bio_mask(space);
  Tensor e = random_tensor(rng, 5, space.size());
  const std::vector<int> gold = {1, 2, 0, 3, 4};
  auto loss = [&](Graph& g) {
    return crf_nll(g, g.leaf(e), g.leaf(t.transition), g.leaf(t.start), g.leaf(t.end), t.mask, gold);
  };
  auto r = fd_check(loss, {&e, &t.transition, &t.start, &t.end}, testutil::kFdEps);
  CHECK(r.max_rel_error <= testutil::kGradTol);
}

TEST_CASE("masked transitions never appear in decodes") {
  TransitionTable t(2);  // labels {O, I}
  t.mask.transition[0 * 2 + 1] = true;
  Rng rng(7);
  for (int trial = 0; trial < 100; ++trial) {
    Tensor e = random_tensor(rng, 6, 2, 3.0);
    auto r = viterbi(e, t);
    for (std::size_t i = 1; i < r.labels.size(); ++i) CHECK_FALSE((r.labels[i - 1] == 0 && r.labels[i] == 1));
  }
}

TEST_CASE("viterbi matches enumeration for L=4 T=3") {
  Rng rng(8);
  TransitionTable t = random_table(rng, 3);
  Tensor e = random_tensor(rng, 4, 3);
  auto r = viterbi(e, t);
  auto bf = brute_force(e, t);
  CHECK(r.labels == bf.best);
  CHECK(r.score == doctest::Approx(bf.best_score).epsilon(1e-9));
}

TEST_CASE("all-equal scores decode to label zero") {
  TransitionTable t(4);
  Tensor e(5, 4, 0.5);
  auto r = viterbi(e, t);
  CHECK(r.labels == std::vector<int>(5, 0));
}

TEST_CASE("fully masked start is a decode error") {
  TransitionTable t(2);
  t.mask.start = {true, true};
  Tensor e(2, 2);
  CHECK_THROWS_AS(viterbi(e, t), DecodeError);
}

TEST_CASE("untyped BIO mask forbids exactly O->I and start->I") {
  LabelSpace s = LabelSpace::untyped_bio();
  CrfMask m = bio_mask(s);
  CHECK(m.forbidden_count() == 2);
  CHECK(m.forbidden(s.index_of("O"), s.index_of("I")));
  CHECK(m.start[s.index_of("I")]);
}

TEST_CASE("typed BIO mask with two types has eight forbidden entries") {
  LabelSpace s = LabelSpace::typed_bio({"Attack", "Meet"});
  CrfMask m = bio_mask(s);
  CHECK(m.forbidden_count() == 8);
  CHECK(m.forbidden(s.index_of("B-Meet"), s.index_of("I-Attack")));
  CHECK(m.forbidden(s.index_of("I-Meet"), s.index_of("I-Attack")));
  CHECK_FALSE(m.forbidden(s.index_of("B-Attack"), s.index_of("I-Attack")));
  CHECK_FALSE(m.forbidden(s.index_of("I-Attack"), s.index_of("B-Meet")));
}

TEST_CASE("bio_mask rejects candidate-role spaces") {
  CHECK_THROWS_AS(bio_mask(LabelSpace::candidate_roles({"Agent"})), ConfigError);
}

TEST_CASE("masked decodes are valid BIO strings") {
  Rng rng(10);
  LabelSpace s = LabelSpace::typed_bio({"A", "B", "C"});
  TransitionTable t = random_table(rng, s.size(), 2.0);
  t.mask = bio_mask(s);
  for (int trial = 0; trial < 300; ++trial) {
    Tensor e = random_tensor(rng, 1 + static_cast<int>(uniform_index(rng, 9)), s.size(), 3.0);
    auto r = viterbi(e, t);
    CHECK(is_valid_bio(r.labels, s));
    CHECK_NOTHROW(bio_spans(r.labels, s));
  }
}

TEST_CASE("oracle equivalence over random instances") {
  Rng rng(12);
  int checked = 0;
  for (int T = 1; T <= 5; ++T)
    for (int L = 1; L <= 6; ++L)
      for (int trial = 0; trial < 20; ++trial) {
        TransitionTable t = random_table(rng, T, 2.0);
        if (T == 3 && trial % 2 == 0) t.mask = bio_mask(LabelSpace::untyped_bio());
        Tensor e = random_tensor(rng, L, T, 2.0);
        auto bf = brute_force(e, t);
        const double z = log_partition(e, t);
        REQUIRE(std::abs(z - bf.log_z) <= 1e-6 * std::max(1.0, std::abs(z)));
        REQUIRE(viterbi(e, t).labels == bf.best);
        std::vector<int> gold = bf.best;
        CHECK(nll(e, t, gold) >= -1e-6);
        ++checked;
      }
  CHECK(checked == 600);
}

TEST_CASE("BIO span helpers") {
  LabelSpace s = LabelSpace::typed_bio({"Attack"});
  const int O = 0, B = s.index_of("B-Attack"), I = s.index_of("I-Attack");
  std::vector<int> seq = {B, I, O};
  auto spans = bio_spans(seq, s);
  REQUIRE(spans.size() == 1);
  CHECK(spans[0] == LabeledSpan{0, 2, "Attack"});
  std::vector<int> broken = {O, I, O};
  CHECK_FALSE(is_valid_bio(broken, s));
  auto repaired = repair_bio(broken, s);
  CHECK(repaired == std::vector<int>{O, B, O});
  CHECK(bio_spans(repaired, s)[0] == LabeledSpan{1, 2, "Attack"});
  CHECK(encode_bio({{1, 3, "Attack"}}, 4, s) == std::vector<int>{O, B, I, O});
}
