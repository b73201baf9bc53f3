#include "primeie/audit.hpp"

#include <cmath>
#include <limits>

#include "primeie/ops.hpp"
#include "primeie/syngen.hpp"

namespace primeie {
inline namespace PRIMEIE_ABI {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double enumerate_score(const Tensor& e, const TransitionTable& t, const std::vector<int>& y) {
  const int T = t.labels();
  if (t.mask.start[y[0]]) return kNegInf;
  double s = double(t.start.values[y[0]]) + t.end.values[y.back()];
  for (std::size_t i = 0; i < y.size(); ++i) {
    s += e.values[i * T + y[i]];
    if (i == 0) continue;
    if (t.mask.forbidden(y[i - 1], y[i])) return kNegInf;
    s += t.transition.values[y[i - 1] * T + y[i]];
  }
  return s;
}

Real draw(Rng& rng, bool integral) {
  return integral ? static_cast<Real>(int(uniform_index(rng, 5)) - 2) : static_cast<Real>(uniform(rng, -2, 2));
}

}  // namespace

CrfCheckReport crf_check(int per_shape, int max_length, int max_labels, std::uint64_t seed) {
  CrfCheckReport r;
  Rng rng(seed);
  for (int T = 1; T <= max_labels; ++T)
    for (int L = 1; L <= max_length; ++L)
      for (int k = 0; k < per_shape; ++k) {
        const bool integral = k % 2 == 1;
        TransitionTable t(T);
        for (auto* p : {&t.transition, &t.start, &t.end})
          for (auto& v : p->values) v = draw(rng, integral);
        if (T == 3 && k % 3 == 0) t.mask = bio_mask(LabelSpace::untyped_bio());
        if (T == 5 && k % 3 == 0) t.mask = bio_mask(LabelSpace::typed_bio({"a", "b"}));
        Tensor e(L, T);
        for (auto& v : e.values) v = draw(rng, integral);

        // Lexicographic visit; strict improvement keeps the smallest tie.
        std::vector<int> y(L, 0), best;
        double best_score = kNegInf, m = kNegInf;
        std::vector<double> scores;
        for (bool more = true; more;) {
          const double s = enumerate_score(e, t, y);
          scores.push_back(s);
          if (s > best_score) best_score = s, best = y;
          m = std::max(m, s);
          int pos = L - 1;
          while (pos >= 0 && ++y[pos] == T) y[pos--] = 0;
          more = pos >= 0;
        }
        double acc = 0;
        for (double s : scores) acc += std::exp(s - m);
        const double z = m + std::log(acc);
        const double got = log_partition(e, t);
        r.max_rel_error = std::max(r.max_rel_error, std::abs(got - z) / std::max(1.0, std::abs(z)));
        if (viterbi(e, t).labels != best) ++r.viterbi_mismatches;
        ++r.instances;
      }
  return r;
}

double audit_epsilon() { return sizeof(Real) == 8 ? 1e-4 : 3e-2; }
double audit_tolerance() { return sizeof(Real) == 8 ? 1e-6 : 1e-3; }

std::vector<GradAuditEntry> audit_model_gradients(std::size_t coordinates, std::uint64_t seed) {
  const Ontology o = default_ontology();
  const GrammarSpec g = default_grammar();
  Corpus c = generate_corpus(g, o, 3, seed, GenMode::simple);
  for (auto& s : generate_corpus(g, o, 3, seed + 1, GenMode::two_event).sentences) {
    s.sent_id += "t";
    c.sentences.push_back(s);
  }
  std::vector<std::string> reserved = {";"};
  for (const auto& r : o.all_roles()) reserved.push_back(o.code_of(r));
  const SubwordVocab v = build_vocab(c, 100, seed, reserved);

  ModelConfig mc;
  mc.encoder.hidden = 8;
  mc.encoder.heads = 2;
  mc.encoder.layers = 1;
  mc.encoder.ff = 12;
  mc.encoder.max_positions = 64;
  mc.lstm_hidden = 4;
  mc.event_dim = 3;
  mc.entity_dim = 3;

  std::vector<GradAuditEntry> out;
  Rng rng(derive_seed(seed, 7));
  for (ModelKind kind : all_model_kinds()) {
    Model m(kind, mc, o, v, seed);
    // Non-zero CRF and head parameters so every term carries gradient.
    for (int i = 0; i < m.params().size(); ++i)
      if (m.params().name(i).rfind("encoder.", 0) != 0)
        for (Real& x : m.params().at(i).values) x = static_cast<Real>(uniform(rng, -0.5, 0.5));
    const auto inst = m.build_instances(c, seed);
    auto loss = [&](Graph& graph) {
      Binder bind(graph, m.params(), true);
      Var total;
      for (std::size_t i = 0; i < std::min<std::size_t>(inst.size(), 3); ++i) {
        Var l = m.loss(bind, c.sentences[inst[i].sentence], inst[i]);
        total = i == 0 ? l : add(graph, total, l);
      }
      return total;
    };
    const FdCheckResult r = fd_check(loss, m.params().pointers(), audit_epsilon(), coordinates, seed);
    out.push_back({kind, r, m.params().name(static_cast<int>(r.worst_tensor))});
  }
  return out;
}

}  // namespace PRIMEIE_ABI
}  // namespace primeie
