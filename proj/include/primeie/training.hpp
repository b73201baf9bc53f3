#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "primeie/models.hpp"
#include "primeie/scoring.hpp"

namespace primeie {
inline namespace PRIMEIE_ABI {

struct TrainConfig {
  double learning_rate = 3e-4;
  int batch_size = 16;
  int max_epochs = 50;
  int patience = 5;
  std::uint64_t seed = 0;
  /// Weight of the type objective (primed trigger model).
  double type_weight = 1.0;
  bool negative_downsample = false;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  bool linear_decay = false;
  /// Threads for the batch gradient; 1 runs the serial path.
  int jobs = 1;

  void validate() const;
  nlohmann::ordered_json to_json() const;
  static TrainConfig from_json(const nlohmann::json& j);
};

struct TrainReport {
  std::vector<double> epoch_loss;  // mean instance loss per epoch
  std::vector<double> dev_f1;
  int best_epoch = 0;  // 1-based; 0 when no epoch ran
  double best_dev_f1 = 0.0;
  double wall_seconds = 0.0;
  bool early_stopped = false;
  nlohmann::ordered_json to_json() const;
};

struct TrainResult {
  Model model;
  TrainReport report;
};

std::vector<Instance> build_instances(const Model& model, const Corpus& corpus, std::uint64_t seed = 0);

/// Keeps every positive and a uniform sample (without replacement) of the
/// negatives of equal size. Order of the input is preserved.
std::vector<Instance> downsample_negatives(const std::vector<Instance>& instances, std::uint64_t seed);

/// Sum of instance losses; gradients are added into `grads`. The serial
/// path accumulates instance by instance; the parallel path computes
/// per-instance gradients concurrently and reduces them in instance
/// order, giving bit-identical results.
double batch_gradient_serial(const Model& model, const Corpus& corpus, std::span<const Instance> batch,
                             GradBuffer& grads, std::uint64_t dropout_seed = 0);
double batch_gradient_parallel(const Model& model, const Corpus& corpus, std::span<const Instance> batch,
                               GradBuffer& grads, std::uint64_t dropout_seed = 0);

/// Bias-corrected adaptive moments.
class Adam {
 public:
  Adam(const ParamSet& params, double beta1, double beta2, double epsilon);
  /// Applies one update with gradient `grads` scaled by `grad_scale`.
  void step(ParamSet& params, const GradBuffer& grads, double learning_rate, double grad_scale);
  long steps() const { return t_; }

 private:
  double b1_, b2_, eps_;
  long t_ = 0;
  std::vector<std::vector<double>> m_, v_;
};

/// Predictions for every sentence of `corpus`. Argument models read gold
/// triggers; trigger models emit triggers only.
EventSet decode_corpus(const Model& model, const Corpus& corpus);
/// Dev metric: trigger F1 for trigger models, argument F1 with gold
/// triggers otherwise.
double task_f1(const Model& model, const Corpus& corpus);

TrainResult train(ModelKind kind, const ModelConfig& model_config, const Ontology& ontology,
                  const SubwordVocab& vocab, const Corpus& train_corpus, const Corpus& dev_corpus,
                  const TrainConfig& config);

/// One run per seed, in seed order; runs differ only in their seed.
std::vector<TrainResult> train_multiseed(ModelKind kind, const ModelConfig& model_config, const Ontology& ontology,
                                         const SubwordVocab& vocab, const Corpus& train_corpus,
                                         const Corpus& dev_corpus, const TrainConfig& config,
                                         const std::vector<std::uint64_t>& seeds);

}  // namespace PRIMEIE_ABI
}  // namespace primeie
