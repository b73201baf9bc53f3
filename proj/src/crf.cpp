#include "primeie/crf.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>

#include "primeie/error.hpp"

namespace primeie {
inline namespace PRIMEIE_ABI {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double log_add(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  const double m = std::max(a, b);
  return m + std::log(std::exp(a - m) + std::exp(b - m));
}

// Parsed view of a BIO label: prefix 'O', 'B' or 'I' plus its type.
struct BioTag {
  char prefix = 'O';
  std::string type;
};

BioTag parse_tag(const std::string& label) {
  if (label == "O") return {'O', ""};
  if (label == "B" || label == "I") return {label[0], ""};
  if (label.size() > 2 && (label[0] == 'B' || label[0] == 'I') && label[1] == '-') return {label[0], label.substr(2)};
  throw ConfigError("not a BIO label: " + label);
}

// Plain-number view over the pieces the recurrences need.
struct Scores {
  int length;
  int labels;
  std::vector<double> emit, trans, start, end;
  const CrfMask* mask;

  double e(int i, int a) const { return emit[static_cast<std::size_t>(i) * labels + a]; }
  double t(int a, int b) const { return mask->forbidden(a, b) ? kNegInf : trans[static_cast<std::size_t>(a) * labels + b]; }
  double s(int a) const { return mask->start[a] ? kNegInf : start[a]; }
};

template <typename T>
std::vector<double> widen(const T* p, std::size_t n) {
  return std::vector<double>(p, p + n);
}

void check_table(int length, int labels, const TransitionTable& table) {
  const int t = table.labels();
  if (length < 1) throw ShapeError("crf: emissions need at least one row");
  if (labels != t || table.transition.rows() != t || table.transition.cols() != t ||
      static_cast<int>(table.start.size()) != t || static_cast<int>(table.end.size()) != t)
    throw ShapeError("crf: emissions " + shape_string({length, labels}) + " vs transition table " +
                     shape_string({t, t}));
}

Scores make_scores(const Tensor& emissions, const TransitionTable& table) {
  check_table(emissions.rows(), emissions.cols(), table);
  return Scores{emissions.rows(),
                emissions.cols(),
                widen(emissions.values.data(), emissions.size()),
                widen(table.transition.values.data(), table.transition.size()),
                widen(table.start.values.data(), table.start.size()),
                widen(table.end.values.data(), table.end.size()),
                &table.mask};
}

// alpha[i][b]: log-sum of prefixes ending in b at position i.
std::vector<double> forward(const Scores& sc) {
  const int L = sc.length, T = sc.labels;
  std::vector<double> alpha(static_cast<std::size_t>(L) * T, kNegInf);
  for (int a = 0; a < T; ++a) alpha[a] = sc.s(a) + sc.e(0, a);
  for (int i = 1; i < L; ++i)
    for (int b = 0; b < T; ++b) {
      double acc = kNegInf;
      for (int a = 0; a < T; ++a) acc = log_add(acc, alpha[static_cast<std::size_t>(i - 1) * T + a] + sc.t(a, b));
      alpha[static_cast<std::size_t>(i) * T + b] = acc + sc.e(i, b);
    }
  return alpha;
}

// beta[i][a]: log-sum of suffixes after position i given label a there.
std::vector<double> backward(const Scores& sc) {
  const int L = sc.length, T = sc.labels;
  std::vector<double> beta(static_cast<std::size_t>(L) * T, kNegInf);
  for (int a = 0; a < T; ++a) beta[static_cast<std::size_t>(L - 1) * T + a] = sc.end[a];
  for (int i = L - 2; i >= 0; --i)
    for (int a = 0; a < T; ++a) {
      double acc = kNegInf;
      for (int b = 0; b < T; ++b)
        acc = log_add(acc, sc.t(a, b) + sc.e(i + 1, b) + beta[static_cast<std::size_t>(i + 1) * T + b]);
      beta[static_cast<std::size_t>(i) * T + a] = acc;
    }
  return beta;
}

double partition_from(const Scores& sc, const std::vector<double>& alpha) {
  const int T = sc.labels;
  double z = kNegInf;
  for (int a = 0; a < T; ++a) z = log_add(z, alpha[static_cast<std::size_t>(sc.length - 1) * T + a] + sc.end[a]);
  return z;
}

double gold_score(const Scores& sc, std::span<const int> gold) {
  if (static_cast<int>(gold.size()) != sc.length)
    throw ShapeError("crf: gold length " + std::to_string(gold.size()) + " vs " + std::to_string(sc.length) + " emission rows");
  for (int y : gold)
    if (y < 0 || y >= sc.labels) throw DecodeError("crf: gold label " + std::to_string(y) + " out of range");
  if (sc.mask->start[gold[0]]) throw DecodeError("crf: gold sequence starts with a masked label");
  double s = sc.start[gold[0]] + sc.e(0, gold[0]);
  for (int i = 1; i < sc.length; ++i) {
    if (sc.mask->forbidden(gold[i - 1], gold[i]))
      throw DecodeError("crf: gold sequence uses masked transition at position " + std::to_string(i));
    s += sc.trans[static_cast<std::size_t>(gold[i - 1]) * sc.labels + gold[i]] + sc.e(i, gold[i]);
  }
  return s + sc.end[gold[sc.length - 1]];
}

}  // namespace

LabelSpace LabelSpace::typed_bio(const std::vector<std::string>& types) {
  LabelSpace s;
  s.kind = LabelKind::TypedBio;
  s.labels.push_back("O");
  for (const auto& t : types) {
    s.labels.push_back("B-" + t);
    s.labels.push_back("I-" + t);
  }
  return s;
}

LabelSpace LabelSpace::untyped_bio() {
  LabelSpace s;
  s.kind = LabelKind::UntypedBio;
  s.labels = {"O", "B", "I"};
  return s;
}

LabelSpace LabelSpace::candidate_roles(const std::vector<std::string>& roles) {
  LabelSpace s;
  s.kind = LabelKind::CandidateRoles;
  s.labels.push_back("NONE");
  s.labels.insert(s.labels.end(), roles.begin(), roles.end());
  return s;
}

int LabelSpace::index_of(const std::string& label) const {
  auto it = std::find(labels.begin(), labels.end(), label);
  return it == labels.end() ? -1 : static_cast<int>(it - labels.begin());
}

void LabelSpace::validate() const {
  const std::string null_label = is_bio() ? "O" : "NONE";
  if (std::count(labels.begin(), labels.end(), null_label) != 1)
    throw ConfigError("label space must contain " + null_label + " exactly once");
  if (kind == LabelKind::TypedBio)
    for (const auto& l : labels) {
      if (l == "O") continue;
      const BioTag tag = parse_tag(l);
      const std::string twin = std::string(1, tag.prefix == 'B' ? 'I' : 'B') + "-" + tag.type;
      if (tag.type.empty() || index_of(twin) < 0) throw ConfigError("label " + l + " has no matching " + twin);
    }
}

CrfMask CrfMask::none(int labels) {
  CrfMask m;
  m.labels = labels;
  m.transition.assign(static_cast<std::size_t>(labels) * labels, false);
  m.start.assign(labels, false);
  return m;
}

std::size_t CrfMask::forbidden_count() const {
  return static_cast<std::size_t>(std::count(transition.begin(), transition.end(), true) +
                                  std::count(start.begin(), start.end(), true));
}

CrfMask bio_mask(const LabelSpace& space) {
  if (!space.is_bio()) throw ConfigError("bio_mask: label space is not BIO");
  const int T = space.size();
  std::vector<BioTag> tags;
  for (const auto& l : space.labels) tags.push_back(parse_tag(l));
  CrfMask m = CrfMask::none(T);
  for (int b = 0; b < T; ++b) {
    if (tags[b].prefix != 'I') continue;
    m.start[b] = true;
    for (int a = 0; a < T; ++a)
      if (tags[a].prefix == 'O' || tags[a].type != tags[b].type) m.transition[static_cast<std::size_t>(a) * T + b] = true;
  }
  return m;
}

TransitionTable::TransitionTable(int labels)
    : transition(labels, labels), start(1, labels), end(1, labels), mask(CrfMask::none(labels)) {}

double log_partition(const Tensor& emissions, const TransitionTable& table) {
  const Scores sc = make_scores(emissions, table);
  return partition_from(sc, forward(sc));
}

double sequence_score(const Tensor& emissions, const TransitionTable& table, std::span<const int> labels) {
  return gold_score(make_scores(emissions, table), labels);
}

double nll(const Tensor& emissions, const TransitionTable& table, std::span<const int> gold) {
  const Scores sc = make_scores(emissions, table);
  const double s = gold_score(sc, gold);
  return partition_from(sc, forward(sc)) - s;
}

ViterbiResult viterbi(const Tensor& emissions, const TransitionTable& table) {
  const Scores sc = make_scores(emissions, table);
  const int L = sc.length, T = sc.labels;
  // Best suffix scores, so that decoding can run left to right and take the
  // smallest label among exact ties at each position.
  std::vector<double> best(static_cast<std::size_t>(L) * T, kNegInf);
  for (int a = 0; a < T; ++a) best[static_cast<std::size_t>(L - 1) * T + a] = sc.e(L - 1, a) + sc.end[a];
  for (int i = L - 2; i >= 0; --i)
    for (int a = 0; a < T; ++a) {
      double m = kNegInf;
      for (int b = 0; b < T; ++b) m = std::max(m, sc.t(a, b) + best[static_cast<std::size_t>(i + 1) * T + b]);
      best[static_cast<std::size_t>(i) * T + a] = m + sc.e(i, a);
    }
  ViterbiResult r;
  r.labels.resize(L);
  double top = kNegInf;
  int arg = -1;
  for (int a = 0; a < T; ++a) {
    const double v = sc.s(a) + best[a];
    if (v > top) {
      top = v;
      arg = a;
    }
  }
  if (arg < 0 || top == kNegInf) throw DecodeError("viterbi: every label sequence is masked");
  r.score = top;
  r.labels[0] = arg;
  for (int i = 1; i < L; ++i) {
    double m = kNegInf;
    int next = -1;
    for (int b = 0; b < T; ++b) {
      const double v = sc.t(r.labels[i - 1], b) + best[static_cast<std::size_t>(i) * T + b];
      if (v > m) {
        m = v;
        next = b;
      }
    }
    r.labels[i] = next;
  }
  return r;
}

Var crf_nll(Graph& g, Var emissions, Var transition, Var start, Var end, const CrfMask& mask, std::span<const int> gold_span) {
  const int L = g.rows(emissions), T = g.cols(emissions);
  if (L < 1 || mask.labels != T || g.rows(transition) != T || g.cols(transition) != T ||
      static_cast<int>(g.size(start)) != T || static_cast<int>(g.size(end)) != T)
    throw ShapeError("crf_nll: emissions " + shape_string({L, T}) + " vs transition " +
                     shape_string({g.rows(transition), g.cols(transition)}));
  std::vector<int> gold(gold_span.begin(), gold_span.end());
  auto sc = std::make_shared<Scores>(Scores{L, T, widen(g.value(emissions), g.size(emissions)),
                                            widen(g.value(transition), g.size(transition)),
                                            widen(g.value(start), g.size(start)), widen(g.value(end), g.size(end)),
                                            nullptr});
  auto owned_mask = std::make_shared<CrfMask>(mask);
  sc->mask = owned_mask.get();
  const double gs = gold_score(*sc, gold);
  auto alpha = std::make_shared<std::vector<double>>(forward(*sc));
  const double z = partition_from(*sc, *alpha);
  if (!std::isfinite(z)) throw DecodeError("crf_nll: every label sequence is masked");
  const Real value = static_cast<Real>(z - gs);
  return g.emplace(1, 1, {value}, {emissions, transition, start, end},
                   [=](Graph& gr, Var self) {
                     const double gy = gr.grad(self)[0];
                     const std::vector<double> beta = backward(*sc);
                     const std::vector<double>& al = *alpha;
                     auto idx = [T](int i, int a) { return static_cast<std::size_t>(i) * T + a; };
                     if (gr.requires_grad(emissions)) {
                       Real* ge = gr.grad(emissions);
                       for (int i = 0; i < L; ++i)
                         for (int a = 0; a < T; ++a) {
                           double p = std::exp(al[idx(i, a)] + beta[idx(i, a)] - z);
                           if (gold[i] == a) p -= 1.0;
                           ge[idx(i, a)] += static_cast<Real>(gy * p);
                         }
                     }
                     if (gr.requires_grad(transition)) {
                       Real* gt = gr.grad(transition);
                       for (int i = 0; i + 1 < L; ++i)
                         for (int a = 0; a < T; ++a)
                           for (int b = 0; b < T; ++b) {
                             if (owned_mask->forbidden(a, b)) continue;
                             double p = std::exp(al[idx(i, a)] + sc->t(a, b) + sc->e(i + 1, b) + beta[idx(i + 1, b)] - z);
                             if (gold[i] == a && gold[i + 1] == b) p -= 1.0;
                             gt[static_cast<std::size_t>(a) * T + b] += static_cast<Real>(gy * p);
                           }
                     }
                     if (gr.requires_grad(start)) {
                       Real* gs2 = gr.grad(start);
                       for (int a = 0; a < T; ++a) {
                         if (owned_mask->start[a]) continue;
                         double p = std::exp(al[idx(0, a)] + beta[idx(0, a)] - z);
                         if (gold[0] == a) p -= 1.0;
                         gs2[a] += static_cast<Real>(gy * p);
                       }
                     }
                     if (gr.requires_grad(end)) {
                       Real* gd = gr.grad(end);
                       for (int a = 0; a < T; ++a) {
                         double p = std::exp(al[idx(L - 1, a)] + sc->end[a] - z);
                         if (gold[L - 1] == a) p -= 1.0;
                         gd[a] += static_cast<Real>(gy * p);
                       }
                     }
                   });
}

bool is_valid_bio(std::span<const int> labels, const LabelSpace& space) {
  std::string open;
  bool inside = false;
  for (int y : labels) {
    if (y < 0 || y >= space.size()) return false;
    const BioTag tag = parse_tag(space.labels[y]);
    if (tag.prefix == 'I' && (!inside || tag.type != open)) return false;
    inside = tag.prefix != 'O';
    open = tag.type;
  }
  return true;
}

std::vector<LabeledSpan> bio_spans(std::span<const int> labels, const LabelSpace& space) {
  if (!is_valid_bio(labels, space)) throw DecodeError("bio_spans: malformed BIO sequence");
  std::vector<LabeledSpan> spans;
  for (int i = 0; i < static_cast<int>(labels.size()); ++i) {
    const BioTag tag = parse_tag(space.labels[labels[i]]);
    if (tag.prefix == 'B') spans.push_back({i, i + 1, tag.type});
    else if (tag.prefix == 'I') spans.back().end = i + 1;
  }
  return spans;
}

std::vector<int> repair_bio(std::span<const int> labels, const LabelSpace& space) {
  std::vector<int> out(labels.begin(), labels.end());
  std::string open;
  bool inside = false;
  for (int& y : out) {
    BioTag tag = parse_tag(space.labels[y]);
    if (tag.prefix == 'I' && (!inside || tag.type != open)) {
      y = space.index_of(tag.type.empty() ? "B" : "B-" + tag.type);
      tag.prefix = 'B';
    }
    inside = tag.prefix != 'O';
    open = tag.type;
  }
  return out;
}

std::vector<int> encode_bio(const std::vector<LabeledSpan>& spans, int length, const LabelSpace& space) {
  std::vector<int> labels(length, 0);
  std::vector<bool> taken(length, false);
  for (const auto& s : spans) {
    if (s.start < 0 || s.end > length || s.start >= s.end) throw ShapeError("encode_bio: span out of range");
    bool free = true;
    for (int i = s.start; i < s.end; ++i) free = free && !taken[i];
    if (!free) continue;  // overlapping spans cannot share one BIO row; the first wins
    const std::string suffix = s.type.empty() ? "" : "-" + s.type;
    const int b = space.index_of("B" + suffix), in = space.index_of("I" + suffix);
    if (b < 0 || in < 0) throw ConfigError("encode_bio: no labels for type '" + s.type + "'");
    labels[s.start] = b;
    taken[s.start] = true;
    for (int i = s.start + 1; i < s.end; ++i) {
      labels[i] = in;
      taken[i] = true;
    }
  }
  return labels;
}

}  // namespace PRIMEIE_ABI
}  // namespace primeie
