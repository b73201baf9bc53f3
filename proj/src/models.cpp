#include "primeie/models.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "primeie/checkpoint.hpp"
#include "primeie/error.hpp"
#include "primeie/ops.hpp"

namespace primeie {
inline namespace PRIMEIE_ABI {

namespace {

constexpr const char* kNone = "NONE";

const std::vector<std::pair<ModelKind, const char*>>& kind_names() {
  static const std::vector<std::pair<ModelKind, const char*>> names = {
      {ModelKind::trigger_baseline, "trigger-baseline"},
      {ModelKind::trigger_primed, "trigger-primed"},
      {ModelKind::args_baseline, "args-baseline"},
      {ModelKind::args_trigger_primed, "args-trigger-primed"},
      {ModelKind::args_role_primed, "args-role-primed"},
      {ModelKind::candidates, "candidates"},
      {ModelKind::args_ablated, "args-ablated"},
  };
  return names;
}

bool typed_arguments(ModelKind k) {
  return k == ModelKind::args_baseline || k == ModelKind::args_trigger_primed || k == ModelKind::args_ablated;
}

Tensor to_tensor(const Graph& g, Var v) { return Tensor({g.rows(v), g.cols(v)}, g.values(v)); }

void check_span(const TokenSpan& span, const Sentence& s, const char* what) {
  if (span.start < 0 || span.start >= span.end || span.end > s.length())
    throw ValidationError(std::string(what) + " span [" + std::to_string(span.start) + "," +
                          std::to_string(span.end) + ") outside sentence of " + std::to_string(s.length()) +
                          " tokens");
}

double path_probability(const Tensor& em, const TransitionTable& table, double score) {
  return std::exp(score - log_partition(em, table));
}

}  // namespace

const char* model_kind_name(ModelKind k) {
  for (const auto& [kind, name] : kind_names())
    if (kind == k) return name;
  return "?";
}

ModelKind parse_model_kind(const std::string& name) {
  for (const auto& [kind, n] : kind_names())
    if (name == n) return kind;
  throw ConfigError("unknown model kind '" + name + "'");
}

bool is_trigger_model(ModelKind k) { return k == ModelKind::trigger_baseline || k == ModelKind::trigger_primed; }

std::vector<ModelKind> all_model_kinds() {
  std::vector<ModelKind> out;
  for (const auto& [kind, name] : kind_names()) out.push_back(kind);
  return out;
}

nlohmann::ordered_json ModelConfig::to_json() const {
  return {{"encoder", encoder.to_json()},
          {"lstm_hidden", lstm_hidden},
          {"event_dim", event_dim},
          {"entity_dim", entity_dim},
          {"type_weight", type_weight},
          {"negative_ratio", negative_ratio},
          {"candidate_prime", prime_kind_name(candidate_prime)}};
}

ModelConfig ModelConfig::from_json(const nlohmann::json& j) {
  ModelConfig c;
  if (j.contains("encoder")) c.encoder = EncoderConfig::from_json(j["encoder"]);
  c.lstm_hidden = j.value("lstm_hidden", c.lstm_hidden);
  c.event_dim = j.value("event_dim", c.event_dim);
  c.entity_dim = j.value("entity_dim", c.entity_dim);
  c.type_weight = j.value("type_weight", c.type_weight);
  c.negative_ratio = j.value("negative_ratio", c.negative_ratio);
  c.candidate_prime = parse_prime_kind(j.value("candidate_prime", std::string("trigger")));
  if (c.candidate_prime != PrimeKind::none && c.candidate_prime != PrimeKind::trigger)
    throw ConfigError("candidate_prime must be none or trigger");
  if (c.lstm_hidden < 1 || c.event_dim < 1 || c.entity_dim < 1) throw ConfigError("model sizes must be positive");
  if (c.type_weight < 0) throw ConfigError("type_weight must be non-negative");
  if (c.negative_ratio < 0) throw ConfigError("negative_ratio must be non-negative");
  return c;
}

struct Model::Query {
  TokenSpan trigger{0, 0};
  int event_index = -1;
  std::string event_type;
  std::string role;
  int token = -1;
  std::vector<EntityMention> candidates;
  // Gold event for label construction; null at decode time.
  const EventMention* gold = nullptr;
};

Model::Model(ModelKind kind, const ModelConfig& config, const Ontology& ontology, const SubwordVocab& vocab,
             std::uint64_t seed)
    : kind_(kind), config_(config), ontology_(ontology), vocab_(vocab) {
  config_.encoder.vocab_size = vocab_.size();
  register_params();
  Rng rng(seed);
  encoder_.init(params_, rng);
  if (lstm_.hidden() > 0) lstm_.init(params_, rng);
  for (int id : {out_w_, type_w_, event_emb_, entity_emb_, crf_.transition, crf_.start, crf_.end})
    if (id >= 0) {
      Tensor& t = params_.at(id);
      if (id == crf_.transition || id == crf_.start || id == crf_.end)
        fill(t, 0);
      else if (t.size() > 0)
        xavier_uniform(t, rng);
    }
  for (int id : {out_b_, type_b_})
    if (id >= 0) fill(params_.at(id), 0);
}

PrimeKind Model::prime_kind() const {
  switch (kind_) {
    case ModelKind::trigger_primed: return PrimeKind::token;
    case ModelKind::args_trigger_primed: return PrimeKind::trigger;
    case ModelKind::args_role_primed: return PrimeKind::trigger_role;
    case ModelKind::candidates: return config_.candidate_prime;
    default: return PrimeKind::none;
  }
}

void Model::register_params() {
  encoder_ = Encoder(config_.encoder, params_);
  const int d = config_.encoder.hidden;
  const int r = config_.lstm_hidden;
  const int types = static_cast<int>(ontology_.event_types.size());
  const auto roles = ontology_.all_roles();
  auto add_crf = [&](int labels) {
    crf_.transition = params_.add("crf.transition", labels, labels);
    crf_.start = params_.add("crf.start", 1, labels);
    crf_.end = params_.add("crf.end", 1, labels);
  };
  auto add_event_emb = [&] { event_emb_ = params_.add("event_type.embedding", types, config_.event_dim); };

  switch (kind_) {
    case ModelKind::trigger_baseline:
      global_space_ = LabelSpace::typed_bio(ontology_.event_types);
      out_w_ = params_.add("tagger.weight", d, global_space_.size());
      out_b_ = params_.add("tagger.bias", 1, global_space_.size());
      break;
    case ModelKind::trigger_primed:
      global_space_ = LabelSpace::untyped_bio();
      lstm_ = BiLstm(params_, "span.lstm.", d, r);
      out_w_ = params_.add("span.weight", 2 * r, 3);
      out_b_ = params_.add("span.bias", 1, 3);
      add_crf(3);
      type_w_ = params_.add("type.weight", 2 * d, types + 1);
      type_b_ = params_.add("type.bias", 1, types + 1);
      break;
    case ModelKind::args_baseline:
    case ModelKind::args_trigger_primed:
    case ModelKind::args_ablated: {
      global_space_ = LabelSpace::typed_bio(roles);
      const bool full = kind_ != ModelKind::args_ablated;
      if (full) add_event_emb();
      lstm_ = BiLstm(params_, "args.lstm.", full ? 2 * d + config_.event_dim : d, r);
      out_w_ = params_.add("args.weight", 2 * r, global_space_.size());
      out_b_ = params_.add("args.bias", 1, global_space_.size());
      add_crf(global_space_.size());
      for (const auto& t : ontology_.event_types) {
        std::vector<int> idx = {0};
        if (!full) {
          // Every type reads the whole label space: no query information.
          for (int k = 1; k < global_space_.size(); ++k) idx.push_back(k);
          subsets_.push_back(idx);
          continue;
        }
        for (const auto& role : ontology_.roles_of(t)) {
          const int k = static_cast<int>(std::find(roles.begin(), roles.end(), role) - roles.begin());
          idx.push_back(1 + 2 * k);
          idx.push_back(2 + 2 * k);
        }
        subsets_.push_back(idx);
      }
      break;
    }
    case ModelKind::args_role_primed:
      global_space_ = LabelSpace::untyped_bio();
      add_event_emb();
      lstm_ = BiLstm(params_, "args.lstm.", 2 * d + config_.event_dim, r);
      out_w_ = params_.add("args.weight", 2 * r, 3);
      out_b_ = params_.add("args.bias", 1, 3);
      add_crf(3);
      break;
    case ModelKind::candidates: {
      global_space_ = LabelSpace::candidate_roles(roles);
      add_event_emb();
      entity_emb_ = params_.add("entity_type.embedding", static_cast<int>(ontology_.entity_types.size()),
                                config_.entity_dim);
      const int in = 2 * d + config_.event_dim + config_.entity_dim;
      out_w_ = params_.add("candidates.weight", in, global_space_.size());
      out_b_ = params_.add("candidates.bias", 1, global_space_.size());
      add_crf(global_space_.size());
      for (const auto& t : ontology_.event_types) {
        std::vector<int> idx = {0};
        for (const auto& role : ontology_.roles_of(t))
          idx.push_back(1 + static_cast<int>(std::find(roles.begin(), roles.end(), role) - roles.begin()));
        subsets_.push_back(idx);
      }
      break;
    }
  }
}

const std::vector<int>& Model::subset(const std::string& event_type) const {
  const int t = ontology_.event_type_index(event_type);
  if (t < 0) throw ValidationError("unknown event type '" + event_type + "'");
  return subsets_.at(t);
}

LabelSpace Model::local_space(const std::string& event_type) const {
  if (kind_ == ModelKind::candidates) return LabelSpace::candidate_roles(ontology_.roles_of(event_type));
  if (kind_ == ModelKind::args_ablated) return global_space_;
  if (typed_arguments(kind_)) return LabelSpace::typed_bio(ontology_.roles_of(event_type));
  return global_space_;
}

TransitionTable Model::table(const Crf& crf, const std::vector<int>* idx, const CrfMask& mask) const {
  const Tensor& tr = params_.at(crf.transition);
  const Tensor& st = params_.at(crf.start);
  const Tensor& en = params_.at(crf.end);
  const int n = idx ? static_cast<int>(idx->size()) : tr.rows();
  TransitionTable t(n);
  for (int a = 0; a < n; ++a) {
    const int ga = idx ? (*idx)[a] : a;
    t.start.values[a] = st.values[ga];
    t.end.values[a] = en.values[ga];
    for (int b = 0; b < n; ++b) t.transition.at(a, b) = tr.at(ga, idx ? (*idx)[b] : b);
  }
  t.mask = mask;
  return t;
}

PrimedInput Model::input_for(const Sentence& s, const TokenSpan* trigger, const std::string* role, int token) const {
  switch (prime_kind()) {
    case PrimeKind::none: return prime_none(vocab_, s.tokens);
    case PrimeKind::trigger: return prime_trigger(vocab_, s.words(*trigger), s.tokens);
    case PrimeKind::trigger_role: return prime_trigger_role(vocab_, s.words(*trigger), *role, ontology_, s.tokens);
    case PrimeKind::token: return prime_token(vocab_, token, s.tokens);
  }
  throw ConfigError("unhandled prime kind");
}

Var Model::encode(Binder& bind, const PrimedInput& in, Var* pieces, Rng* dropout_rng) const {
  calls_->fetch_add(1, std::memory_order_relaxed);
  Var h = encoder_.forward(bind, in.ids, in.segments, nullptr, dropout_rng);
  if (pieces) *pieces = h;
  return pool_word_vectors(bind.graph(), h, in.alignment);
}

Tensor Model::word_vectors(const PrimedInput& input) const {
  Graph g(false);
  Binder bind(g, params_);
  return to_tensor(g, encode(bind, input, nullptr, nullptr));
}

Var Model::argument_features(Binder& bind, Var words, const TokenSpan& trigger, int event_index) const {
  Graph& g = bind.graph();
  const int n = g.rows(words);
  Var tv = mean_rows(g, slice_rows(g, words, trigger.start, trigger.end));
  std::vector<int> zeros(n, 0), types(n, event_index);
  return concat_cols(g, {words, gather_rows(g, tv, zeros), embedding(g, bind(event_emb_), types)});
}

Var Model::emissions(Binder& bind, const Sentence& s, const Query& q, Rng* dropout_rng, Var* type_logits,
                     const Tensor* words_override) const {
  Graph& g = bind.graph();
  PrimedInput in = input_for(s, &q.trigger, &q.role, q.token);
  Var pieces;
  Var words = words_override ? g.constant(*words_override) : encode(bind, in, &pieces, dropout_rng);
  switch (kind_) {
    case ModelKind::trigger_baseline:
      return affine(g, words, bind(out_w_), bind(out_b_));
    case ModelKind::trigger_primed: {
      if (type_logits) {
        Var cls = slice_rows(g, pieces, 0, 1);
        const std::pair<int, int> prime[1] = {in.prime_token_pieces};
        Var pv = segment_mean(g, pieces, prime);
        *type_logits = affine(g, concat_cols(g, {cls, pv}), bind(type_w_), bind(type_b_));
      }
      return affine(g, lstm_.forward(bind, words), bind(out_w_), bind(out_b_));
    }
    case ModelKind::args_ablated: {
      Var e = affine(g, lstm_.forward(bind, words), bind(out_w_), bind(out_b_));
      return gather_cols(g, e, subset(q.event_type));
    }
    case ModelKind::args_baseline:
    case ModelKind::args_trigger_primed: {
      Var x = argument_features(bind, words, q.trigger, q.event_index);
      Var e = affine(g, lstm_.forward(bind, x), bind(out_w_), bind(out_b_));
      return gather_cols(g, e, subset(q.event_type));
    }
    case ModelKind::args_role_primed: {
      Var x = argument_features(bind, words, q.trigger, q.event_index);
      return affine(g, lstm_.forward(bind, x), bind(out_w_), bind(out_b_));
    }
    case ModelKind::candidates: {
      const int m = static_cast<int>(q.candidates.size());
      std::vector<int> heads, entity_types;
      for (const auto& c : q.candidates) {
        heads.push_back(c.head_index.value_or(c.span.start));
        entity_types.push_back(ontology_.entity_type_index(c.entity_type));
      }
      Var tv = mean_rows(g, slice_rows(g, words, q.trigger.start, q.trigger.end));
      std::vector<int> zeros(m, 0), types(m, q.event_index);
      Var x = concat_cols(g, {gather_rows(g, words, heads), gather_rows(g, tv, zeros),
                              embedding(g, bind(event_emb_), types), embedding(g, bind(entity_emb_), entity_types)});
      return gather_cols(g, affine(g, x, bind(out_w_), bind(out_b_)), subset(q.event_type));
    }
  }
  throw ConfigError("unhandled model kind");
}

std::vector<EntityMention> Model::ordered_candidates(const Sentence& s) const {
  std::vector<EntityMention> c = s.entities;
  std::stable_sort(c.begin(), c.end(), [](const EntityMention& a, const EntityMention& b) { return a.span < b.span; });
  return c;
}

Model::Query Model::query_of(const Sentence& s, const Instance& inst) const {
  Query q;
  q.token = inst.token;
  q.role = inst.role;
  if (inst.event >= 0) {
    q.gold = &s.events.at(inst.event);
    q.trigger = q.gold->trigger;
    q.event_type = q.gold->event_type;
    q.event_index = ontology_.event_type_index(q.event_type);
  }
  if (kind_ == ModelKind::candidates) q.candidates = ordered_candidates(s);
  return q;
}

std::vector<int> Model::gold_labels(const Sentence& s, const Query& q) const {
  const int n = s.length();
  switch (kind_) {
    case ModelKind::trigger_baseline: {
      std::vector<LabeledSpan> spans;
      for (const auto& e : s.events) spans.push_back({e.trigger.start, e.trigger.end, e.event_type});
      return encode_bio(spans, n, global_space_);
    }
    case ModelKind::trigger_primed: {
      for (const auto& e : s.events)
        if (e.trigger.contains(q.token)) return encode_bio({{e.trigger.start, e.trigger.end, ""}}, n, global_space_);
      return std::vector<int>(n, 0);
    }
    case ModelKind::args_role_primed: {
      std::vector<LabeledSpan> spans;
      for (const auto& a : q.gold->arguments)
        if (a.role == q.role) spans.push_back({a.span.start, a.span.end, ""});
      return encode_bio(spans, n, global_space_);
    }
    case ModelKind::candidates: {
      const LabelSpace local = local_space(q.event_type);
      std::vector<int> labels;
      for (const auto& c : q.candidates) {
        int y = 0;
        for (const auto& a : q.gold->arguments)
          if (a.span == c.span) {
            y = local.index_of(a.role);
            break;
          }
        labels.push_back(y);
      }
      return labels;
    }
    default: {
      std::vector<LabeledSpan> spans;
      for (const auto& a : q.gold->arguments) spans.push_back({a.span.start, a.span.end, a.role});
      return encode_bio(spans, n, local_space(q.event_type));
    }
  }
}

std::vector<Instance> Model::build_instances(const Corpus& corpus, std::uint64_t seed) const {
  std::vector<Instance> out;
  Rng rng(seed);
  bool any_event = false;
  for (int si = 0; si < static_cast<int>(corpus.sentences.size()); ++si) {
    const Sentence& s = corpus.sentences[si];
    any_event |= !s.events.empty();
    auto finish = [&](Instance inst) {
      inst.labels = gold_labels(s, query_of(s, inst));
      out.push_back(std::move(inst));
    };
    switch (kind_) {
      case ModelKind::trigger_baseline: {
        Instance inst;
        inst.sentence = si;
        inst.positive = !s.events.empty();
        finish(inst);
        break;
      }
      case ModelKind::trigger_primed: {
        std::vector<int> negatives;
        int positives = 0;
        for (int t = 0; t < s.length(); ++t) {
          const EventMention* hit = nullptr;
          for (const auto& e : s.events)
            if (e.trigger.contains(t)) {
              hit = &e;
              break;
            }
          if (!hit) {
            negatives.push_back(t);
            continue;
          }
          Instance inst;
          inst.sentence = si;
          inst.token = t;
          inst.type_label = 1 + ontology_.event_type_index(hit->event_type);
          inst.positive = true;
          finish(inst);
          ++positives;
        }
        shuffle(negatives, rng);
        const std::size_t keep = std::min<std::size_t>(
            negatives.size(), static_cast<std::size_t>(config_.negative_ratio) * std::max(1, positives));
        negatives.resize(keep);
        std::sort(negatives.begin(), negatives.end());
        for (int t : negatives) {
          Instance inst;
          inst.sentence = si;
          inst.token = t;
          finish(inst);
        }
        break;
      }
      case ModelKind::args_role_primed:
        for (int ei = 0; ei < static_cast<int>(s.events.size()); ++ei)
          for (const auto& role : ontology_.roles_of(s.events[ei].event_type)) {
            Instance inst;
            inst.sentence = si;
            inst.event = ei;
            inst.role = role;
            for (const auto& a : s.events[ei].arguments) inst.positive |= a.role == role;
            finish(inst);
          }
        break;
      case ModelKind::candidates:
        if (s.entities.empty()) break;
        for (int ei = 0; ei < static_cast<int>(s.events.size()); ++ei) {
          Instance inst;
          inst.sentence = si;
          inst.event = ei;
          inst.labels = gold_labels(s, query_of(s, inst));
          inst.positive = std::any_of(inst.labels.begin(), inst.labels.end(), [](int y) { return y != 0; });
          out.push_back(std::move(inst));
        }
        break;
      default:
        for (int ei = 0; ei < static_cast<int>(s.events.size()); ++ei) {
          Instance inst;
          inst.sentence = si;
          inst.event = ei;
          inst.positive = !s.events[ei].arguments.empty();
          finish(inst);
        }
        break;
    }
  }
  if (!any_event || out.empty())
    throw ValidationError(std::string("no training instances for ") + model_kind_name(kind_) +
                          ": the corpus has no usable events");
  return out;
}

Var Model::loss(Binder& bind, const Sentence& s, const Instance& inst, Rng* dropout_rng) const {
  Graph& g = bind.graph();
  const Query q = query_of(s, inst);
  Var type_logits;
  Var em = emissions(bind, s, q, dropout_rng, kind_ == ModelKind::trigger_primed ? &type_logits : nullptr);
  if (kind_ == ModelKind::trigger_baseline) return pick_nll(g, log_softmax_rows(g, em), inst.labels);

  Var tr = bind(crf_.transition), st = bind(crf_.start), en = bind(crf_.end);
  CrfMask mask = CrfMask::none(g.cols(em));
  if (kind_ == ModelKind::candidates || typed_arguments(kind_)) {
    const auto& idx = subset(q.event_type);
    tr = gather_block(g, tr, idx);
    st = gather_cols(g, st, idx);
    en = gather_cols(g, en, idx);
  }
  if (kind_ != ModelKind::candidates) mask = bio_mask(local_space(q.event_type));
  Var l = crf_nll(g, em, tr, st, en, mask, inst.labels);
  if (kind_ == ModelKind::trigger_primed) {
    const int target[1] = {inst.type_label};
    l = add(g, l, scale(g, pick_nll(g, log_softmax_rows(g, type_logits), target), static_cast<Real>(config_.type_weight)));
  }
  return l;
}

Tensor Model::decode_emissions(const Sentence& s, const Query& q, std::vector<double>* type_probs,
                               const Tensor* words_override) const {
  Graph g(false);
  Binder bind(g, params_);
  Var type_logits;
  Var em = emissions(bind, s, q, nullptr, type_probs ? &type_logits : nullptr, words_override);
  if (type_probs) {
    Var p = softmax_rows(g, type_logits);
    type_probs->assign(g.value(p), g.value(p) + g.size(p));
  }
  return to_tensor(g, em);
}

std::vector<PrimeHeads> Model::primed_heads(const Sentence& s) const {
  if (kind_ != ModelKind::trigger_primed) throw ConfigError("primed_heads needs a trigger-primed model");
  std::vector<PrimeHeads> out;
  const TransitionTable tab = table(crf_, nullptr, bio_mask(global_space_));
  for (int t = 0; t < s.length(); ++t) {
    Query q;
    q.token = t;
    PrimeHeads h;
    Tensor em = decode_emissions(s, q, &h.type_probs);
    h.span_labels = viterbi(em, tab).labels;
    out.push_back(std::move(h));
  }
  return out;
}

std::vector<TriggerPrediction> assemble_primed_triggers(const std::vector<PrimeHeads>& heads,
                                                        const std::vector<std::string>& event_types) {
  const LabelSpace space = LabelSpace::untyped_bio();
  std::vector<TriggerPrediction> out;
  for (int t = 0; t < static_cast<int>(heads.size()); ++t) {
    const auto& p = heads[t].type_probs;
    if (p.size() != event_types.size() + 1) throw ShapeError("assemble_primed_triggers: type head size mismatch");
    const int best = static_cast<int>(std::max_element(p.begin(), p.end()) - p.begin());
    if (best == 0) continue;
    TokenSpan span{t, t + 1};
    for (const auto& sp : bio_spans(repair_bio(heads[t].span_labels, space), space))
      if (sp.start <= t && t < sp.end) span = {sp.start, sp.end};
    TriggerPrediction pred{span, event_types[best - 1], p[best]};
    auto dup = std::find_if(out.begin(), out.end(), [&](const TriggerPrediction& x) {
      return x.span == pred.span && x.event_type == pred.event_type;
    });
    if (dup == out.end())
      out.push_back(pred);
    else
      dup->score = std::max(dup->score, pred.score);
  }
  return out;
}

std::vector<TriggerPrediction> Model::detect_triggers(const Sentence& s) const {
  if (kind_ == ModelKind::trigger_primed) return assemble_primed_triggers(primed_heads(s), ontology_.event_types);
  if (kind_ != ModelKind::trigger_baseline) throw ConfigError(std::string(model_kind_name(kind_)) + " does not detect triggers");
  Query q;
  Tensor em = decode_emissions(s, q, nullptr);
  const int n = em.rows(), T = em.cols();
  std::vector<int> labels(n);
  std::vector<double> conf(n);
  for (int i = 0; i < n; ++i) {
    int best = 0;
    double mx = em.at(i, 0), z = 0;
    for (int c = 1; c < T; ++c)
      if (em.at(i, c) > em.at(i, best)) best = c;
    mx = em.at(i, best);
    for (int c = 0; c < T; ++c) z += std::exp(double(em.at(i, c)) - mx);
    labels[i] = best;
    conf[i] = 1.0 / z;
  }
  std::vector<TriggerPrediction> out;
  for (const auto& sp : bio_spans(repair_bio(labels, global_space_), global_space_)) {
    double sc = 0;
    for (int i = sp.start; i < sp.end; ++i) sc += conf[i];
    out.push_back({{sp.start, sp.end}, sp.type, sc / (sp.end - sp.start)});
  }
  return out;
}

std::vector<ArgumentPrediction> Model::extract_arguments(const Sentence& s, const TokenSpan& trigger,
                                                         const std::string& event_type) const {
  if (is_trigger_model(kind_) || kind_ == ModelKind::candidates)
    throw ConfigError(std::string(model_kind_name(kind_)) + " does not tag arguments");
  check_span(trigger, s, "trigger");
  Query q;
  q.trigger = trigger;
  q.event_type = event_type;
  q.event_index = ontology_.event_type_index(event_type);
  if (q.event_index < 0) throw ValidationError("unknown event type '" + event_type + "'");

  std::vector<ArgumentPrediction> out;
  if (kind_ == ModelKind::args_role_primed) {
    const TransitionTable tab = table(crf_, nullptr, bio_mask(global_space_));
    for (const auto& role : ontology_.roles_of(event_type)) {
      q.role = role;
      Tensor em = decode_emissions(s, q, nullptr);
      ViterbiResult v = viterbi(em, tab);
      const double p = path_probability(em, tab, v.score);
      for (const auto& sp : bio_spans(v.labels, global_space_))
        out.push_back({trigger, event_type, {sp.start, sp.end}, role, p});
    }
    return out;
  }
  const LabelSpace local = local_space(event_type);
  const TransitionTable tab = table(crf_, &subset(event_type), bio_mask(local));
  Tensor em = decode_emissions(s, q, nullptr);
  ViterbiResult v = viterbi(em, tab);
  const double p = path_probability(em, tab, v.score);
  for (const auto& sp : bio_spans(v.labels, local)) {
    // The ablated tagger spans every role; keep the ones the type allows.
    if (kind_ == ModelKind::args_ablated && !ontology_.allows_role(event_type, sp.type)) continue;
    out.push_back({trigger, event_type, {sp.start, sp.end}, sp.type, p});
  }
  return out;
}

Tensor Model::candidate_emissions(const Sentence& s, const TokenSpan& trigger, const std::string& event_type,
                                  const std::vector<EntityMention>& candidates, const Tensor* words) const {
  if (kind_ != ModelKind::candidates) throw ConfigError("candidate_emissions needs a candidates model");
  check_span(trigger, s, "trigger");
  if (candidates.empty()) throw ValidationError("classify_candidates: no candidates");
  for (const auto& c : candidates) {
    check_span(c.span, s, "candidate");
    if (c.head_index && !c.span.contains(*c.head_index))
      throw ValidationError("candidate head_index " + std::to_string(*c.head_index) + " outside its span");
    if (ontology_.entity_type_index(c.entity_type) < 0)
      throw ValidationError("unknown entity type '" + c.entity_type + "'");
  }
  Query q;
  q.trigger = trigger;
  q.event_type = event_type;
  q.event_index = ontology_.event_type_index(event_type);
  if (q.event_index < 0) throw ValidationError("unknown event type '" + event_type + "'");
  q.candidates = candidates;
  return decode_emissions(s, q, nullptr, words);
}

std::vector<CandidateDecision> Model::classify_candidates(const Sentence& s, const TokenSpan& trigger,
                                                          const std::string& event_type,
                                                          const std::vector<EntityMention>& candidates) const {
  Tensor em = candidate_emissions(s, trigger, event_type, candidates);
  const LabelSpace local = local_space(event_type);
  const TransitionTable tab = table(crf_, &subset(event_type), CrfMask::none(local.size()));
  const ViterbiResult v = viterbi(em, tab);
  std::vector<CandidateDecision> out;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    std::string role = local.labels[v.labels[i]];
    if (role != kNone && !ontology_.is_legal(candidates[i].entity_type, event_type, role)) role = kNone;
    out.push_back({candidates[i], role});
  }
  return out;
}

std::string Model::to_checkpoint() const {
  nlohmann::ordered_json meta;
  meta["kind"] = model_kind_name(kind_);
  meta["prime_kind"] = prime_kind_name(prime_kind());
  meta["ontology_id"] = ontology_.id;
  meta["label_space"] = global_space_.labels;
  meta["config"] = config_.to_json();
  meta["vocab"] = vocab_.pieces();
  return checkpoint_to_string(meta, params_);
}

Model Model::from_checkpoint(const std::string& text, const Ontology& ontology) {
  const nlohmann::json j = parse_checkpoint(text);
  const auto& meta = j.at("metadata");
  const std::string id = meta.at("ontology_id").get<std::string>();
  if (id != ontology.id)
    throw ValidationError("checkpoint was trained with ontology " + id + " but " + ontology.id + " was supplied");
  Model m(parse_model_kind(meta.at("kind").get<std::string>()), ModelConfig::from_json(meta.at("config")), ontology,
          SubwordVocab(meta.at("vocab").get<std::vector<std::string>>()), 0);
  if (meta.at("label_space").get<std::vector<std::string>>() != m.global_space_.labels)
    throw ValidationError("checkpoint label space does not match the ontology");
  tensors_from_json(j.at("tensors"), m.params_);
  return m;
}

std::vector<EventMention> extract_events(const Model* trigger_model, const Model& argument_model, const Sentence& s,
                                         const std::vector<TriggerPrediction>* gold_triggers) {
  std::vector<TriggerPrediction> triggers;
  if (gold_triggers)
    triggers = *gold_triggers;
  else if (trigger_model)
    triggers = trigger_model->detect_triggers(s);
  else
    throw ConfigError("extract_events: neither a trigger model nor gold triggers");
  std::vector<EventMention> out;
  for (const auto& t : triggers) {
    EventMention e;
    e.trigger = t.span;
    e.event_type = t.event_type;
    e.score = t.score;
    if (argument_model.kind() == ModelKind::candidates) {
      if (!s.entities.empty()) {
        std::vector<EntityMention> cands = s.entities;
        std::stable_sort(cands.begin(), cands.end(),
                         [](const EntityMention& a, const EntityMention& b) { return a.span < b.span; });
        for (const auto& d : argument_model.classify_candidates(s, t.span, t.event_type, cands))
          if (d.role != kNone) e.arguments.push_back({d.candidate.span, d.role, 0.0});
      }
    } else {
      for (const auto& a : argument_model.extract_arguments(s, t.span, t.event_type))
        e.arguments.push_back({a.span, a.role, a.score});
    }
    out.push_back(std::move(e));
  }
  return out;
}

}  // namespace PRIMEIE_ABI
}  // namespace primeie
