#include "primeie/training.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <memory>

#include "primeie/error.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace primeie {
inline namespace PRIMEIE_ABI {

void TrainConfig::validate() const {
  if (!(learning_rate >= 0)) throw ConfigError("learning_rate must be non-negative");
  if (batch_size < 1) throw ConfigError("batch_size must be at least 1");
  if (max_epochs < 1) throw ConfigError("max_epochs must be at least 1");
  if (patience < 1) throw ConfigError("patience must be at least 1");
  if (type_weight < 0) throw ConfigError("type_weight must be non-negative");
  if (!(beta1 > 0 && beta1 < 1) || !(beta2 > 0 && beta2 < 1)) throw ConfigError("betas must lie in (0, 1)");
  if (!(epsilon > 0)) throw ConfigError("epsilon must be positive");
  if (jobs < 1) throw ConfigError("jobs must be at least 1");
}

nlohmann::ordered_json TrainConfig::to_json() const {
  return {{"learning_rate", learning_rate},
          {"batch_size", batch_size},
          {"max_epochs", max_epochs},
          {"patience", patience},
          {"seed", seed},
          {"type_weight", type_weight},
          {"negative_downsample", negative_downsample},
          {"beta1", beta1},
          {"beta2", beta2},
          {"epsilon", epsilon},
          {"linear_decay", linear_decay},
          {"jobs", jobs}};
}

TrainConfig TrainConfig::from_json(const nlohmann::json& j) {
  TrainConfig c;
  c.learning_rate = j.value("learning_rate", c.learning_rate);
  c.batch_size = j.value("batch_size", c.batch_size);
  c.max_epochs = j.value("max_epochs", c.max_epochs);
  c.patience = j.value("patience", c.patience);
  c.seed = j.value("seed", c.seed);
  c.type_weight = j.value("type_weight", c.type_weight);
  c.negative_downsample = j.value("negative_downsample", c.negative_downsample);
  c.beta1 = j.value("beta1", c.beta1);
  c.beta2 = j.value("beta2", c.beta2);
  c.epsilon = j.value("epsilon", c.epsilon);
  c.linear_decay = j.value("linear_decay", c.linear_decay);
  c.jobs = j.value("jobs", c.jobs);
  c.validate();
  return c;
}

nlohmann::ordered_json TrainReport::to_json() const {
  return {{"epoch_loss", epoch_loss}, {"dev_f1", dev_f1},           {"best_epoch", best_epoch},
          {"best_dev_f1", best_dev_f1}, {"wall_seconds", wall_seconds}, {"early_stopped", early_stopped}};
}

std::vector<Instance> build_instances(const Model& model, const Corpus& corpus, std::uint64_t seed) {
  return model.build_instances(corpus, seed);
}

std::vector<Instance> downsample_negatives(const std::vector<Instance>& instances, std::uint64_t seed) {
  std::vector<std::size_t> pos, neg;
  for (std::size_t i = 0; i < instances.size(); ++i) (instances[i].positive ? pos : neg).push_back(i);
  if (neg.size() > pos.size()) {
    Rng rng(seed);
    shuffle(neg, rng);
    neg.resize(pos.size());
  }
  std::vector<bool> keep(instances.size(), false);
  for (auto i : pos) keep[i] = true;
  for (auto i : neg) keep[i] = true;
  std::vector<Instance> out;
  for (std::size_t i = 0; i < instances.size(); ++i)
    if (keep[i]) out.push_back(instances[i]);
  return out;
}

namespace {

double instance_gradient(const Model& model, const Corpus& corpus, const Instance& inst, GradBuffer& grads,
                         std::uint64_t dropout_seed, std::size_t index) {
  Graph g;
  Binder bind(g, model.params(), &grads);
  std::unique_ptr<Rng> rng;
  if (model.config().encoder.dropout > 0) rng = std::make_unique<Rng>(derive_seed(dropout_seed, index));
  Var loss = model.loss(bind, corpus.sentences.at(inst.sentence), inst, rng.get());
  const double value = g.scalar(loss);
  g.backward(loss);
  return value;
}

bool finite_params(const ParamSet& params) {
  for (int i = 0; i < params.size(); ++i)
    for (Real v : params.at(i).values)
      if (!std::isfinite(v)) return false;
  return true;
}

}  // namespace

double batch_gradient_serial(const Model& model, const Corpus& corpus, std::span<const Instance> batch,
                             GradBuffer& grads, std::uint64_t dropout_seed) {
  double total = 0;
  for (std::size_t i = 0; i < batch.size(); ++i)
    total += instance_gradient(model, corpus, batch[i], grads, dropout_seed, i);
  return total;
}

double batch_gradient_parallel(const Model& model, const Corpus& corpus, std::span<const Instance> batch,
                               GradBuffer& grads, std::uint64_t dropout_seed) {
  const int n = static_cast<int>(batch.size());
  std::vector<GradBuffer> local(n, GradBuffer(model.params()));
  std::vector<double> losses(n, 0.0);
  std::vector<std::string> errors(n);
#pragma omp parallel for schedule(dynamic, 1)
  for (int i = 0; i < n; ++i) {
    try {
      losses[i] = instance_gradient(model, corpus, batch[i], local[i], dropout_seed, i);
    } catch (const std::exception& e) {
      errors[i] = e.what();
    }
  }
  for (int i = 0; i < n; ++i)
    if (!errors[i].empty()) throw TrainingError("instance " + std::to_string(i) + ": " + errors[i]);
  double total = 0;
  for (int i = 0; i < n; ++i) {
    grads.add(local[i]);
    total += losses[i];
  }
  return total;
}

Adam::Adam(const ParamSet& params, double beta1, double beta2, double epsilon) : b1_(beta1), b2_(beta2), eps_(epsilon) {
  for (int i = 0; i < params.size(); ++i) {
    m_.emplace_back(params.at(i).size(), 0.0);
    v_.emplace_back(params.at(i).size(), 0.0);
  }
}

void Adam::step(ParamSet& params, const GradBuffer& grads, double learning_rate, double grad_scale) {
  ++t_;
  const double c1 = 1.0 - std::pow(b1_, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(b2_, static_cast<double>(t_));
  for (int i = 0; i < params.size(); ++i) {
    Real* w = params.at(i).values.data();
    const Real* g = grads.grads[i].data();
    double* m = m_[i].data();
    double* v = v_[i].data();
    const std::size_t n = params.at(i).size();
    for (std::size_t j = 0; j < n; ++j) {
      const double gj = g[j] * grad_scale;
      m[j] = b1_ * m[j] + (1 - b1_) * gj;
      v[j] = b2_ * v[j] + (1 - b2_) * gj * gj;
      const double update = learning_rate * (m[j] / c1) / (std::sqrt(v[j] / c2) + eps_);
      w[j] = static_cast<Real>(w[j] - update);
    }
  }
}

EventSet decode_corpus(const Model& model, const Corpus& corpus) {
  EventSet out;
  out.reserve(corpus.sentences.size());
  for (const auto& s : corpus.sentences) {
    SentenceEvents se{s.doc_id, s.sent_id, {}};
    if (is_trigger_model(model.kind())) {
      for (const auto& t : model.detect_triggers(s)) se.events.push_back({t.span, t.event_type, {}, t.score});
    } else {
      std::vector<TriggerPrediction> gold;
      for (const auto& e : s.events) gold.push_back({e.trigger, e.event_type, 1.0});
      se.events = extract_events(nullptr, model, s, &gold);
    }
    out.push_back(std::move(se));
  }
  return out;
}

double task_f1(const Model& model, const Corpus& corpus) {
  const EventSet pred = decode_corpus(model, corpus);
  const EventSet gold = events_of(corpus);
  return score(pred, gold, is_trigger_model(model.kind()) ? Level::trigger : Level::argument).f1;
}

TrainResult train(ModelKind kind, const ModelConfig& model_config, const Ontology& ontology,
                  const SubwordVocab& vocab, const Corpus& train_corpus, const Corpus& dev_corpus,
                  const TrainConfig& config) {
  config.validate();
  const auto t0 = std::chrono::steady_clock::now();
  ModelConfig mc = model_config;
  mc.type_weight = config.type_weight;
  TrainResult r{Model(kind, mc, ontology, vocab, config.seed), {}};
  Model& model = r.model;

  const bool resample = kind == ModelKind::trigger_primed;
  std::vector<Instance> base = model.build_instances(train_corpus, derive_seed(config.seed, 1));

  Adam adam(model.params(), config.beta1, config.beta2, config.epsilon);
  GradBuffer grads(model.params());
  std::vector<std::vector<Real>> best;
  double best_f1 = -std::numeric_limits<double>::infinity();
  int since_best = 0;
  const bool parallel = config.jobs > 1;
#ifdef _OPENMP
  if (parallel) omp_set_num_threads(config.jobs);
#endif

  for (int epoch = 1; epoch <= config.max_epochs; ++epoch) {
    std::vector<Instance> inst =
        resample && epoch > 1 ? model.build_instances(train_corpus, derive_seed(config.seed, 1 + epoch)) : base;
    if (config.negative_downsample) inst = downsample_negatives(inst, derive_seed(config.seed, 100000 + epoch));
    Rng order_rng(derive_seed(config.seed, 200000 + epoch));
    shuffle(inst, order_rng);

    const double lr = config.linear_decay
                          ? config.learning_rate * (1.0 - double(epoch - 1) / double(config.max_epochs))
                          : config.learning_rate;
    double epoch_loss = 0;
    const std::size_t B = static_cast<std::size_t>(config.batch_size);
    for (std::size_t start = 0, b = 0; start < inst.size(); start += B, ++b) {
      const std::size_t len = std::min(B, inst.size() - start);
      std::span<const Instance> batch(inst.data() + start, len);
      grads.zero();
      const std::uint64_t dseed = derive_seed(config.seed, 300000 + epoch * 100003ULL + b);
      const double loss = parallel ? batch_gradient_parallel(model, train_corpus, batch, grads, dseed)
                                   : batch_gradient_serial(model, train_corpus, batch, grads, dseed);
      if (!std::isfinite(loss))
        throw TrainingError("loss became non-finite at epoch " + std::to_string(epoch) + " batch " +
                            std::to_string(b + 1));
      epoch_loss += loss;
      adam.step(model.params(), grads, lr, 1.0 / double(len));
      if (!finite_params(model.params()))
        throw TrainingError("parameters became non-finite at epoch " + std::to_string(epoch) + " batch " +
                            std::to_string(b + 1));
    }
    r.report.epoch_loss.push_back(epoch_loss / double(inst.size()));

    double f1 = -r.report.epoch_loss.back();
    if (!dev_corpus.sentences.empty()) {
      try {
        f1 = task_f1(model, dev_corpus);
      } catch (const DecodeError& e) {
        throw TrainingError("model outputs became non-finite at epoch " + std::to_string(epoch) + " after batch " +
                            std::to_string((inst.size() + B - 1) / B) + ": " + e.what());
      }
    }
    r.report.dev_f1.push_back(f1);
    if (f1 > best_f1) {
      best_f1 = f1;
      r.report.best_epoch = epoch;
      best.clear();
      for (int i = 0; i < model.params().size(); ++i) best.push_back(model.params().at(i).values);
      since_best = 0;
    } else if (++since_best >= config.patience) {
      r.report.early_stopped = true;
      break;
    }
  }
  for (int i = 0; i < model.params().size(); ++i) model.params().at(i).values = best[i];
  r.report.best_dev_f1 = best_f1;
  r.report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

std::vector<TrainResult> train_multiseed(ModelKind kind, const ModelConfig& model_config, const Ontology& ontology,
                                         const SubwordVocab& vocab, const Corpus& train_corpus,
                                         const Corpus& dev_corpus, const TrainConfig& config,
                                         const std::vector<std::uint64_t>& seeds) {
  if (seeds.empty()) throw ConfigError("train_multiseed: no seeds");
  std::vector<TrainResult> out;
  for (auto seed : seeds) {
    TrainConfig c = config;
    c.seed = seed;
    out.push_back(train(kind, model_config, ontology, vocab, train_corpus, dev_corpus, c));
  }
  return out;
}

}  // namespace PRIMEIE_ABI
}  // namespace primeie
