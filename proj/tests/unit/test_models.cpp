#include "doctest.h"

#include <set>

#include "model_fixtures.hpp"
#include "primeie/error.hpp"
#include "primeie/gradcheck.hpp"
#include "primeie/ops.hpp"
#include "primeie/training.hpp"
#include "test_helpers.hpp"

using namespace primeie;
using namespace testutil;

namespace {

Corpus random_corpus(Rng& rng, const Ontology& o, int n, int max_len = 9) {
  Corpus c;
  for (int i = 0; i < n; ++i) c.sentences.push_back(random_sentence(rng, o, 2 + int(uniform_index(rng, max_len - 1)), std::to_string(i)));
  return c;
}

SubwordVocab vocab_for(const Corpus& c) {
  Corpus all = c;
  all.sentences.push_back(dadin_sentence());
  return toy_vocab(all);
}

// Spreads CRF and head parameters so untrained decodes cover all labels.
void scramble(Model& m, Rng& rng, double scale) {
  for (int i = 0; i < m.params().size(); ++i) {
    const std::string& n = m.params().name(i);
    if (n.rfind("encoder.", 0) == 0) continue;
    for (Real& v : m.params().at(i).values) v = static_cast<Real>(uniform(rng, -scale, scale));
  }
}

void set_param(Model& m, const std::string& name, Real value) {
  const int id = m.params().index_of(name);
  REQUIRE(id >= 0);
  fill(m.params().at(id), value);
}

std::vector<Real>& param(Model& m, const std::string& name) {
  const int id = m.params().index_of(name);
  REQUIRE(id >= 0);
  return m.params().at(id).values;
}

}  // namespace

TEST_CASE("model kind names round-trip") {
  for (auto k : all_model_kinds()) CHECK(parse_model_kind(model_kind_name(k)) == k);
  CHECK(std::string(model_kind_name(ModelKind::args_role_primed)) == "args-role-primed");
  CHECK_THROWS_AS(parse_model_kind("bert"), ConfigError);
  CHECK(is_trigger_model(ModelKind::trigger_primed));
  CHECK_FALSE(is_trigger_model(ModelKind::candidates));
}

TEST_CASE("baseline trigger tagger decodes argmax labels with I repair") {
  const Ontology o = tiny_ontology();
  const Corpus c = dadin_corpus();
  Model m(ModelKind::trigger_baseline, toy_model_config(), o, toy_vocab(c), 1);
  const Sentence& s = c.sentences[0];
  const LabelSpace space = LabelSpace::typed_bio(o.event_types);
  set_param(m, "tagger.weight", 0);

  set_param(m, "tagger.bias", 0);
  param(m, "tagger.bias")[0] = 5;
  CHECK(m.detect_triggers(s).empty());

  // I-Attack everywhere: the leading I becomes B and the run is one span.
  set_param(m, "tagger.bias", 0);
  param(m, "tagger.bias")[space.index_of("I-Attack")] = 5;
  auto t = m.detect_triggers(s);
  REQUIRE(t.size() == 1);
  CHECK(t[0].span == TokenSpan{0, s.length()});
  CHECK(t[0].event_type == "Attack");

  const int O = 0, B = space.index_of("B-Attack"), I = space.index_of("I-Attack");
  const std::vector<int> a = {B, I, O};
  auto spans = bio_spans(repair_bio(a, space), space);
  REQUIRE(spans.size() == 1);
  CHECK(spans[0] == LabeledSpan{0, 2, "Attack"});
  const std::vector<int> b = {O, I, O};
  spans = bio_spans(repair_bio(b, space), space);
  REQUIRE(spans.size() == 1);
  CHECK(spans[0] == LabeledSpan{1, 2, "Attack"});
}

TEST_CASE("decoded BIO outputs are well formed for every tagging head") {
  const Ontology o = tiny_ontology();
  Rng rng(17);
  const Corpus c = random_corpus(rng, o, 40);
  const SubwordVocab v = vocab_for(c);
  const LabelSpace untyped = LabelSpace::untyped_bio();
  for (ModelKind kind : {ModelKind::trigger_baseline, ModelKind::trigger_primed, ModelKind::args_baseline,
                         ModelKind::args_trigger_primed, ModelKind::args_role_primed, ModelKind::args_ablated}) {
    CAPTURE(model_kind_name(kind));
    int decodes = 0;
    for (int rep = 0; decodes < 1000; ++rep) {
      Model m(kind, toy_model_config(), o, v, 100 + rep);
      scramble(m, rng, 3.0);
      for (int k = 0; k < 40 && decodes < 1000; ++k) {
        const Sentence& s = c.sentences[uniform_index(rng, c.sentences.size())];
        if (kind == ModelKind::trigger_primed) {
          for (const auto& h : m.primed_heads(s)) {
            CHECK(is_valid_bio(h.span_labels, untyped));
            ++decodes;
          }
          for (const auto& t : m.detect_triggers(s)) {
            CHECK(t.span.start >= 0);
            CHECK(t.span.start < t.span.end);
            CHECK(t.span.end <= s.length());
            CHECK(o.has_event_type(t.event_type));
          }
        } else if (is_trigger_model(kind)) {
          auto t = m.detect_triggers(s);
          for (std::size_t i = 0; i < t.size(); ++i) {
            CHECK(t[i].span.start < t[i].span.end);
            CHECK(t[i].span.end <= s.length());
            CHECK(o.has_event_type(t[i].event_type));
            if (i > 0) CHECK(t[i - 1].span.end <= t[i].span.start);
          }
          ++decodes;
        } else {
          const std::string type = o.event_types[uniform_index(rng, o.event_types.size())];
          const int a = int(uniform_index(rng, s.length()));
          auto args = m.extract_arguments(s, {a, a + 1}, type);
          for (std::size_t i = 0; i < args.size(); ++i) {
            CHECK(o.allows_role(type, args[i].role));
            CHECK(args[i].span.start < args[i].span.end);
            CHECK(args[i].span.end <= s.length());
            CHECK(args[i].score >= 0);
            CHECK(args[i].score <= 1 + 1e-9);
            if (kind != ModelKind::args_role_primed && i > 0) CHECK(args[i - 1].span.end <= args[i].span.start);
          }
          ++decodes;
        }
      }
    }
  }
}

TEST_CASE("role-primed extraction queries each allowed role once") {
  Ontology o = tiny_ontology();
  o.event_types.push_back("Meet");
  o.roles_for["Meet"] = {};
  const Corpus c = dadin_corpus();
  Model m(ModelKind::args_role_primed, toy_model_config(), o, toy_vocab(c), 3);
  const Sentence& s = c.sentences[0];
  for (const std::string type : {"Attack", "Convict", "Meet"}) {
    m.reset_encoder_calls();
    m.extract_arguments(s, {3, 4}, type);
    CHECK(m.encoder_calls() == long(o.roles_of(type).size()));
  }
  m.reset_encoder_calls();
  CHECK(m.extract_arguments(s, {3, 4}, "Meet").empty());
  CHECK(m.encoder_calls() == 0);
}

TEST_CASE("role-primed spans of different roles are all kept") {
  const Ontology o = tiny_ontology();
  const Corpus c = dadin_corpus();
  Model m(ModelKind::args_role_primed, toy_model_config(), o, toy_vocab(c), 3);
  // Emissions independent of the input: every query marks the first token.
  set_param(m, "args.weight", 0);
  param(m, "args.bias") = {0, 0, 0};
  auto& start = param(m, "crf.start");
  start = {-20, 20, -20};
  auto& trans = param(m, "crf.transition");
  std::fill(trans.begin(), trans.end(), Real(-20));
  trans[1 * 3 + 0] = 20;  // B -> O
  trans[0 * 3 + 0] = 20;  // O -> O
  auto args = m.extract_arguments(c.sentences[0], {3, 4}, "Convict");
  REQUIRE(args.size() == 2);
  CHECK(args[0].span == TokenSpan{0, 1});
  CHECK(args[1].span == TokenSpan{0, 1});
  CHECK(args[0].role != args[1].role);
}

TEST_CASE("primed trigger rule emits a trigger iff the type head is not NONE") {
  const std::vector<std::string> types = {"Attack", "Convict"};
  const int O = 0, B = 1, I = 2;
  CHECK(assemble_primed_triggers({{{0.8, 0.1, 0.1}, {O, O}}, {{0.5, 0.2, 0.3}, {B, O}}}, types).empty());

  // Prime 3 of the Dadin sentence typed Convict with its own token marked.
  std::vector<PrimeHeads> heads(7, PrimeHeads{{1, 0, 0}, std::vector<int>(7, O)});
  heads[3] = {{0.1, 0.1, 0.8}, {O, O, O, B, O, O, O}};
  auto t = assemble_primed_triggers(heads, types);
  REQUIRE(t.size() == 1);
  CHECK(t[0].span == TokenSpan{3, 4});
  CHECK(t[0].event_type == "Convict");
  CHECK(t[0].score == doctest::Approx(0.8));

  // Attack with an all-O span head falls back to the prime token alone.
  heads[3] = {{0.1, 0.7, 0.2}, std::vector<int>(7, O)};
  t = assemble_primed_triggers(heads, types);
  REQUIRE(t.size() == 1);
  CHECK(t[0].span == TokenSpan{3, 4});
  CHECK(t[0].event_type == "Attack");

  // A span not containing the prime is ignored too.
  heads[3] = {{0.1, 0.7, 0.2}, {B, I, O, O, O, O, O}};
  t = assemble_primed_triggers(heads, types);
  REQUIRE(t.size() == 1);
  CHECK(t[0].span == TokenSpan{3, 4});

  // Two primes decoding the same span merge to the best score; an
  // overlapping different span survives.
  heads.assign(4, PrimeHeads{{1, 0, 0}, std::vector<int>(4, O)});
  heads[1] = {{0.2, 0.6, 0.2}, {O, B, I, O}};
  heads[2] = {{0.1, 0.9, 0.0}, {O, B, I, O}};
  heads[3] = {{0.1, 0.9, 0.0}, {O, O, B, I}};
  t = assemble_primed_triggers(heads, types);
  REQUIRE(t.size() == 2);
  CHECK(t[0].span == TokenSpan{1, 3});
  CHECK(t[0].score == doctest::Approx(0.9));
  CHECK(t[1].span == TokenSpan{2, 4});

  CHECK_THROWS_AS(assemble_primed_triggers({{{1, 0}, {O}}}, types), ShapeError);

  Rng rng(5);
  for (int trial = 0; trial < 500; ++trial) {
    const int n = 1 + int(uniform_index(rng, 6));
    std::vector<PrimeHeads> h(n);
    for (auto& x : h) {
      for (int k = 0; k < 3; ++k) x.type_probs.push_back(uniform01(rng));
      for (int i = 0; i < n; ++i) x.span_labels.push_back(int(uniform_index(rng, 3)));
    }
    auto preds = assemble_primed_triggers(h, types);
    for (int p = 0; p < n; ++p) {
      const auto& q = h[p].type_probs;
      const int best = int(std::max_element(q.begin(), q.end()) - q.begin());
      const bool emitted = std::any_of(preds.begin(), preds.end(), [&](const TriggerPrediction& x) {
        return best > 0 && x.span.contains(p) && x.event_type == types[best - 1];
      });
      CHECK(emitted == (best != 0));
    }
    for (const auto& x : preds) {
      bool from_prime = false;
      for (int p = x.span.start; p < x.span.end; ++p) {
        const auto& q = h[p].type_probs;
        const int best = int(std::max_element(q.begin(), q.end()) - q.begin());
        from_prime |= best > 0 && types[best - 1] == x.event_type;
      }
      CHECK(from_prime);
    }
  }
}

TEST_CASE("primed trigger model with NONE dominant emits nothing") {
  const Ontology o = tiny_ontology();
  const Corpus c = dadin_corpus();
  Model m(ModelKind::trigger_primed, toy_model_config(), o, toy_vocab(c), 4);
  set_param(m, "type.weight", 0);
  param(m, "type.bias") = {5, 0, 0};
  CHECK(m.detect_triggers(c.sentences[0]).empty());
  param(m, "type.bias") = {0, 0, 5};
  auto t = m.detect_triggers(c.sentences[0]);
  CHECK(t.size() >= 1);
  for (const auto& x : t) CHECK(x.event_type == "Convict");
}

TEST_CASE("argument inputs depend on the queried trigger only when primed") {
  const Ontology o = tiny_ontology();
  const Corpus c = dadin_corpus();
  const SubwordVocab v = toy_vocab(c);
  const Sentence& s = c.sentences[0];
  const TokenSpan t1{1, 2}, t2{3, 4};
  Model primed(ModelKind::args_trigger_primed, toy_model_config(), o, v, 1);
  CHECK(primed.input_for(s, &t1, nullptr, -1).ids != primed.input_for(s, &t2, nullptr, -1).ids);
  Model base(ModelKind::args_baseline, toy_model_config(), o, v, 1);
  CHECK(base.input_for(s, &t1, nullptr, -1).ids == base.input_for(s, &t2, nullptr, -1).ids);
  const std::string role = "Defendant";
  Model roles(ModelKind::args_role_primed, toy_model_config(), o, v, 1);
  CHECK(detokenize(v, roles.input_for(s, &t2, &role, -1).ids) ==
        "[CLS] conviction ; 13 [SEP] crowds protested the conviction of Ildar Dadin [SEP]");
  CHECK_THROWS(primed.extract_arguments(s, {5, 9}, "Convict"));
  CHECK_THROWS_AS(primed.extract_arguments(s, t2, "Flood"), ValidationError);
}

TEST_CASE("Defendant labels on Ildar Dadin decode to one Defendant argument") {
  const Ontology o = tiny_ontology();
  const LabelSpace local = LabelSpace::typed_bio(o.roles_of("Convict"));
  const int B = local.index_of("B-Defendant"), I = local.index_of("I-Defendant");
  const std::vector<int> labels = {0, 0, 0, 0, 0, B, I};
  auto spans = bio_spans(labels, local);
  REQUIRE(spans.size() == 1);
  CHECK(spans[0] == LabeledSpan{5, 7, "Defendant"});
  CHECK(local.index_of("B-Attacker") == -1);

  const Corpus c = dadin_corpus();
  Model m(ModelKind::args_baseline, toy_model_config(), o, toy_vocab(c), 1);
  auto inst = m.build_instances(c);
  REQUIRE(inst.size() == 2);
  CHECK(inst[1].labels == labels);
}

TEST_CASE("candidate classifier applies the legality constraint") {
  Ontology o = tiny_ontology();
  Rng rng(23);
  Corpus c = random_corpus(rng, o, 30);
  const SubwordVocab v = vocab_for(c);

  SUBCASE("random decodes never produce illegal triples") {
    long decisions = 0, illegal = 0;
    for (int rep = 0; rep < 25; ++rep) {
      Model m(ModelKind::candidates, toy_model_config(), o, v, 200 + rep);
      scramble(m, rng, 4.0);
      for (const auto& s : c.sentences) {
        if (s.entities.empty()) continue;
        for (const auto& type : o.event_types) {
          const int a = int(uniform_index(rng, s.length()));
          for (const auto& d : m.classify_candidates(s, {a, a + 1}, type, s.entities)) {
            ++decisions;
            illegal += d.role != "NONE" && !o.is_legal(d.candidate.entity_type, type, d.role);
            if (d.role != "NONE") CHECK(o.allows_role(type, d.role));
          }
        }
      }
    }
    CHECK(decisions > 500);
    CHECK(illegal == 0);
  }

  SUBCASE("empty legality table forces NONE") {
    o.legal_triples.clear();
    Model m(ModelKind::candidates, toy_model_config(), o, v, 7);
    scramble(m, rng, 4.0);
    for (const auto& s : c.sentences)
      if (!s.entities.empty())
        for (const auto& d : m.classify_candidates(s, {0, 1}, "Attack", s.entities)) CHECK(d.role == "NONE");
  }

  SUBCASE("an illegal decoded role is filtered") {
    // Only LOC may fill Attack roles; force Attacker for every candidate.
    o.legal_triples = {{"LOC", "Attack", "Place"}};
    Model m(ModelKind::candidates, toy_model_config(), o, v, 7);
    set_param(m, "candidates.weight", 0);
    const LabelSpace global = LabelSpace::candidate_roles(o.all_roles());
    param(m, "candidates.bias")[global.index_of("Attacker")] = 10;
    const Sentence s = dadin_sentence();
    const Tensor em = m.candidate_emissions(s, {1, 2}, "Attack", s.entities);
    const LabelSpace local = LabelSpace::candidate_roles(o.roles_of("Attack"));
    for (int r = 0; r < em.rows(); ++r) {
      int best = 0;
      for (int k = 1; k < em.cols(); ++k)
        if (em.at(r, k) > em.at(r, best)) best = k;
      CHECK(local.labels[best] == "Attacker");
    }
    for (const auto& d : m.classify_candidates(s, {1, 2}, "Attack", s.entities)) CHECK(d.role == "NONE");
  }

  SUBCASE("candidate errors") {
    Model m(ModelKind::candidates, toy_model_config(), o, v, 7);
    const Sentence s = dadin_sentence();
    CHECK_THROWS_AS(m.classify_candidates(s, {1, 2}, "Attack", {}), ValidationError);
    CHECK_THROWS_AS(m.classify_candidates(s, {1, 2}, "Attack", {{{5, 7}, "PER", 2}}), ValidationError);
  }
}

TEST_CASE("candidate representation uses the head token") {
  const Ontology o = tiny_ontology();
  const Corpus c = dadin_corpus();
  Model m(ModelKind::candidates, toy_model_config(), o, toy_vocab(c), 9);
  Sentence s = dadin_sentence();
  s.tokens[5] = "Bob";
  s.tokens[6] = "Smith";
  const std::vector<EntityMention> cands = {{{5, 7}, "PER", 6}, {{0, 1}, "PER", std::nullopt}};
  const TokenSpan trigger{3, 4};
  const Tensor words = m.word_vectors(m.input_for(s, &trigger, nullptr, -1));
  const Tensor base = m.candidate_emissions(s, trigger, "Convict", cands, &words);

  Tensor no_bob = words;
  for (int k = 0; k < no_bob.cols(); ++k) no_bob.at(5, k) += 7;
  const Tensor e1 = m.candidate_emissions(s, trigger, "Convict", cands, &no_bob);
  for (int k = 0; k < base.cols(); ++k) CHECK(e1.at(0, k) == base.at(0, k));

  Tensor no_smith = words;
  for (int k = 0; k < no_smith.cols(); ++k) no_smith.at(6, k) += 7;
  const Tensor e2 = m.candidate_emissions(s, trigger, "Convict", cands, &no_smith);
  bool changed = false;
  for (int k = 0; k < base.cols(); ++k) changed |= e2.at(0, k) != base.at(0, k);
  CHECK(changed);

  // Without a head the first token represents the candidate.
  Tensor first = words;
  for (int k = 0; k < first.cols(); ++k) first.at(0, k) += 7;
  const Tensor e3 = m.candidate_emissions(s, trigger, "Convict", cands, &first);
  changed = false;
  for (int k = 0; k < base.cols(); ++k) changed |= e3.at(1, k) != base.at(1, k);
  CHECK(changed);
}

TEST_CASE("instance building") {
  const Ontology o = tiny_ontology();
  const Corpus c = dadin_corpus();
  const SubwordVocab v = toy_vocab(c);
  Model roles(ModelKind::args_role_primed, toy_model_config(), o, v, 1);
  Corpus one = c;
  one.sentences[0].events.resize(1);
  CHECK(roles.build_instances(one).size() == 3);
  CHECK(roles.build_instances(c).size() == 5);

  Model primed(ModelKind::args_trigger_primed, toy_model_config(), o, v, 1);
  auto inst = primed.build_instances(c);
  REQUIRE(inst.size() == 2);
  CHECK(inst[0].event != inst[1].event);

  Model cand(ModelKind::candidates, toy_model_config(), o, v, 1);
  Corpus four = c;
  four.sentences[0].entities = {{{5, 7}, "PER", 6}, {{0, 1}, "PER", std::nullopt}, {{2, 3}, "LOC", std::nullopt},
                                {{4, 5}, "LOC", std::nullopt}};
  inst = cand.build_instances(four);
  REQUIRE(inst.size() == 2);
  CHECK(inst[0].labels.size() == 4);
  // Candidates run in document order: Crowds, the, of, Ildar Dadin.
  const LabelSpace local = LabelSpace::candidate_roles(o.roles_of("Convict"));
  CHECK(inst[1].labels == std::vector<int>{0, 0, 0, local.index_of("Defendant")});

  Model trig(ModelKind::trigger_primed, toy_model_config(), o, v, 1);
  inst = trig.build_instances(c, 5);
  int pos = 0, neg = 0;
  for (const auto& x : inst) (x.positive ? pos : neg)++;
  CHECK(pos == 2);
  CHECK(neg == 5);  // 3:1 capped by the five non-trigger tokens
  CHECK(trig.build_instances(c, 5).size() == inst.size());

  Corpus empty = c;
  empty.sentences[0].events.clear();
  CHECK_THROWS_AS(primed.build_instances(empty), ValidationError);
}

TEST_CASE("gold-trigger composition matches direct argument calls") {
  const Ontology o = tiny_ontology();
  const Corpus c = dadin_corpus();
  const SubwordVocab v = toy_vocab(c);
  Rng rng(3);
  Model args(ModelKind::args_trigger_primed, toy_model_config(), o, v, 1);
  scramble(args, rng, 2.0);
  const Sentence& s = c.sentences[0];
  std::vector<TriggerPrediction> gold = {{{1, 2}, "Attack", 1.0}, {{3, 4}, "Convict", 1.0}};
  auto events = extract_events(nullptr, args, s, &gold);
  REQUIRE(events.size() == 2);
  for (std::size_t i = 0; i < gold.size(); ++i) {
    auto direct = args.extract_arguments(s, gold[i].span, gold[i].event_type);
    REQUIRE(events[i].arguments.size() == direct.size());
    for (std::size_t k = 0; k < direct.size(); ++k) {
      CHECK(events[i].arguments[k].span == direct[k].span);
      CHECK(events[i].arguments[k].role == direct[k].role);
    }
  }
  std::vector<TriggerPrediction> none;
  CHECK(extract_events(nullptr, args, s, &none).empty());

  Model trig(ModelKind::trigger_baseline, toy_model_config(), o, v, 2);
  set_param(trig, "tagger.weight", 0);
  param(trig, "tagger.bias")[0] = 5;
  CHECK(extract_events(&trig, args, s).empty());
}

TEST_CASE("model checkpoints round-trip") {
  const Ontology o = tiny_ontology();
  const Corpus c = dadin_corpus();
  const SubwordVocab v = toy_vocab(c);
  Rng rng(8);
  for (auto kind : all_model_kinds()) {
    CAPTURE(model_kind_name(kind));
    Model m(kind, toy_model_config(), o, v, 11);
    scramble(m, rng, 1.0);
    const std::string text = m.to_checkpoint();
    Model back = Model::from_checkpoint(text, o);
    CHECK(back.kind() == kind);
    CHECK(back.to_checkpoint() == text);
    REQUIRE(back.params().size() == m.params().size());
    for (int i = 0; i < m.params().size(); ++i) CHECK(back.params().at(i).values == m.params().at(i).values);
  }
  Model m(ModelKind::args_baseline, toy_model_config(), o, v, 11);
  Ontology other = o;
  other.id = "other";
  CHECK_THROWS_AS(Model::from_checkpoint(m.to_checkpoint(), other), ValidationError);
}

TEST_CASE("decoding is a pure function of parameters and input") {
  const Ontology o = tiny_ontology();
  const Corpus c = dadin_corpus();
  const SubwordVocab v = toy_vocab(c);
  Model a(ModelKind::args_role_primed, toy_model_config(), o, v, 5);
  Model b(ModelKind::args_role_primed, toy_model_config(), o, v, 5);
  const auto x = a.extract_arguments(c.sentences[0], {3, 4}, "Convict");
  const auto y = a.extract_arguments(c.sentences[0], {3, 4}, "Convict");
  const auto z = b.extract_arguments(c.sentences[0], {3, 4}, "Convict");
  REQUIRE(x.size() == y.size());
  REQUIRE(x.size() == z.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    CHECK(x[i].span == y[i].span);
    CHECK(x[i].score == y[i].score);
    CHECK(x[i].score == z[i].score);
  }
}

TEST_CASE("parallel batch gradients equal the serial reference bit for bit") {
  const Ontology o = tiny_ontology();
  Rng rng(31);
  const Corpus c = random_corpus(rng, o, 12);
  const SubwordVocab v = vocab_for(c);
  for (auto kind : all_model_kinds()) {
    CAPTURE(model_kind_name(kind));
    Model m(kind, toy_model_config(), o, v, 13);
    const auto inst = m.build_instances(c, 1);
    GradBuffer gs(m.params()), gp(m.params());
    const double ls = batch_gradient_serial(m, c, inst, gs);
    const double lp = batch_gradient_parallel(m, c, inst, gp);
    CHECK(ls == lp);
    CHECK(gs.grads == gp.grads);
  }
}

#ifdef PRIMEIE_DOUBLE
TEST_CASE("full model losses pass the finite-difference audit") {
  const Ontology o = tiny_ontology();
  Rng rng(41);
  const Corpus c = random_corpus(rng, o, 6, 6);
  const SubwordVocab v = vocab_for(c);
  for (auto kind : all_model_kinds()) {
    CAPTURE(model_kind_name(kind));
    Model m(kind, toy_model_config(), o, v, 19);
    scramble(m, rng, 0.2);
    const auto inst = m.build_instances(c, 2);
    auto loss = [&](Graph& g) {
      Binder bind(g, m.params(), true);
      Var total;
      for (std::size_t i = 0; i < std::min<std::size_t>(inst.size(), 3); ++i) {
        Var l = m.loss(bind, c.sentences[inst[i].sentence], inst[i]);
        total = i == 0 ? l : add(g, total, l);
      }
      return total;
    };
    const FdCheckResult r = fd_check(loss, m.params().pointers(), kFdEps, 150, 7);
    CHECK(r.coordinates >= 100);
    CAPTURE(r.worst_tensor);
    CAPTURE(r.analytic);
    CAPTURE(r.numeric);
    CHECK(r.max_rel_error <= kGradTol);
  }
}
#endif
