#pragma once

#include <atomic>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "primeie/corpus.hpp"
#include "primeie/crf.hpp"
#include "primeie/encoder.hpp"
#include "primeie/lstm.hpp"
#include "primeie/ontology.hpp"
#include "primeie/priming.hpp"
#include "primeie/tokenizer.hpp"

namespace primeie {
inline namespace PRIMEIE_ABI {

enum class ModelKind {
  trigger_baseline,
  trigger_primed,
  args_baseline,
  args_trigger_primed,
  args_role_primed,
  candidates,
  /// Argument tagger without the trigger vector, the event type or any
  /// prime. It tags over every role of the ontology and gives the same
  /// output for every query of a sentence.
  args_ablated,
};

const char* model_kind_name(ModelKind k);
ModelKind parse_model_kind(const std::string& name);
bool is_trigger_model(ModelKind k);
std::vector<ModelKind> all_model_kinds();

struct ModelConfig {
  EncoderConfig encoder;
  int lstm_hidden = 64;
  int event_dim = 16;
  int entity_dim = 16;
  /// Weight of the type objective in the primed trigger model.
  double type_weight = 1.0;
  /// Negatives sampled per positive prime in the primed trigger model.
  int negative_ratio = 3;
  /// Prime of the candidate classifier: none or trigger.
  PrimeKind candidate_prime = PrimeKind::trigger;

  nlohmann::ordered_json to_json() const;
  static ModelConfig from_json(const nlohmann::json& j);
};

struct TriggerPrediction {
  TokenSpan span;
  std::string event_type;
  double score = 0.0;
};

struct ArgumentPrediction {
  TokenSpan trigger;
  std::string event_type;
  TokenSpan span;
  std::string role;
  double score = 0.0;
};

struct CandidateDecision {
  EntityMention candidate;
  std::string role;  // "NONE" when no role is assigned
};

/// One training example. Field use depends on the model kind.
struct Instance {
  int sentence = -1;
  int event = -1;     // gold event (argument and candidate models)
  int token = -1;     // prime token (primed trigger model)
  std::string role;   // queried role (role-primed model)
  std::vector<int> labels;
  int type_label = 0;  // primed trigger type head; 0 is NONE
  bool positive = false;
};

/// Head outputs of the primed trigger model for one prime token.
struct PrimeHeads {
  std::vector<double> type_probs;  // NONE first, then event types
  std::vector<int> span_labels;    // untyped BIO over the sentence
};

/// Applies the primed trigger decision rule to per-token head outputs:
/// a prime yields a trigger iff its argmax type is not NONE; the span is
/// the decoded span containing the prime, else the prime token alone.
/// Exact duplicates keep the best score.
std::vector<TriggerPrediction> assemble_primed_triggers(const std::vector<PrimeHeads>& heads,
                                                        const std::vector<std::string>& event_types);

class Model {
 public:
  Model(ModelKind kind, const ModelConfig& config, const Ontology& ontology, const SubwordVocab& vocab,
        std::uint64_t seed);

  ModelKind kind() const { return kind_; }
  const ModelConfig& config() const { return config_; }
  const Ontology& ontology() const { return ontology_; }
  const SubwordVocab& vocab() const { return vocab_; }
  PrimeKind prime_kind() const;
  ParamSet& params() { return params_; }
  const ParamSet& params() const { return params_; }

  /// Training examples for this kind. The primed trigger model samples
  /// negative primes with `seed`.
  std::vector<Instance> build_instances(const Corpus& corpus, std::uint64_t seed = 0) const;
  /// Scalar loss of one instance; parameters come from `bind`.
  Var loss(Binder& bind, const Sentence& sentence, const Instance& instance, Rng* dropout_rng = nullptr) const;

  std::vector<TriggerPrediction> detect_triggers(const Sentence& s) const;
  std::vector<PrimeHeads> primed_heads(const Sentence& s) const;
  std::vector<ArgumentPrediction> extract_arguments(const Sentence& s, const TokenSpan& trigger,
                                                    const std::string& event_type) const;
  std::vector<CandidateDecision> classify_candidates(const Sentence& s, const TokenSpan& trigger,
                                                     const std::string& event_type,
                                                     const std::vector<EntityMention>& candidates) const;
  /// Emission rows of the candidate classifier over the event type's
  /// label subset, before decoding.
  /// `words` replaces the pooled encoder output when given.
  Tensor candidate_emissions(const Sentence& s, const TokenSpan& trigger, const std::string& event_type,
                             const std::vector<EntityMention>& candidates, const Tensor* words = nullptr) const;
  /// Pooled encoder output for the model's unprimed or primed input.
  Tensor word_vectors(const PrimedInput& input) const;

  /// Encoder input used for a query; exposed for inspection.
  PrimedInput input_for(const Sentence& s, const TokenSpan* trigger, const std::string* role, int token) const;

  long encoder_calls() const { return calls_->load(); }
  void reset_encoder_calls() { calls_->store(0); }

  std::string to_checkpoint() const;
  /// Rebuilds a model from a checkpoint; the ontology must match the one
  /// recorded at training time.
  static Model from_checkpoint(const std::string& text, const Ontology& ontology);

 private:
  struct Crf {
    int transition = -1, start = -1, end = -1;
  };
  struct Query;

  Var encode(Binder& bind, const PrimedInput& in, Var* pieces, Rng* dropout_rng) const;
  Var argument_features(Binder& bind, Var words, const TokenSpan& trigger, int event_index) const;
  Var emissions(Binder& bind, const Sentence& s, const Query& q, Rng* dropout_rng, Var* type_logits,
                const Tensor* words_override = nullptr) const;
  Query query_of(const Sentence& s, const Instance& instance) const;
  Tensor decode_emissions(const Sentence& s, const Query& q, std::vector<double>* type_probs,
                          const Tensor* words_override = nullptr) const;
  /// Global label indices of `event_type`'s label subset.
  const std::vector<int>& subset(const std::string& event_type) const;
  LabelSpace local_space(const std::string& event_type) const;
  TransitionTable table(const Crf& crf, const std::vector<int>* idx, const CrfMask& mask) const;
  std::vector<int> gold_labels(const Sentence& s, const Query& q) const;
  void register_params();
  std::vector<EntityMention> ordered_candidates(const Sentence& s) const;

  ModelKind kind_;
  ModelConfig config_;
  Ontology ontology_;
  SubwordVocab vocab_;
  ParamSet params_;
  Encoder encoder_;
  BiLstm lstm_;
  int out_w_ = -1, out_b_ = -1;
  int type_w_ = -1, type_b_ = -1;
  int event_emb_ = -1, entity_emb_ = -1;
  Crf crf_;
  LabelSpace global_space_;
  std::vector<std::vector<int>> subsets_;  // per event type
  std::shared_ptr<std::atomic<long>> calls_ = std::make_shared<std::atomic<long>>(0);
};

/// Triggers from `trigger_model` (or the supplied gold triggers) and, per
/// trigger, arguments from `argument_model`.
std::vector<EventMention> extract_events(const Model* trigger_model, const Model& argument_model,
                                         const Sentence& s,
                                         const std::vector<TriggerPrediction>* gold_triggers = nullptr);

}  // namespace PRIMEIE_ABI
}  // namespace primeie
