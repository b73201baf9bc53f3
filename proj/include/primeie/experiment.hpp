#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"
#include "primeie/models.hpp"
#include "primeie/scoring.hpp"
#include "primeie/syngen.hpp"
#include "primeie/training.hpp"

namespace primeie {
inline namespace PRIMEIE_ABI {

struct ExperimentConfig {
  // Inputs; empty paths select the built-in ontology and grammar, and
  // generated corpora.
  std::string ontology_path;
  std::string grammar_path;
  std::string train_path, dev_path, test_path;
  GenMode mode = GenMode::simple;
  int n_train = 600, n_dev = 150, n_test = 200;
  std::uint64_t data_seed = 1;
  /// Anchor fractions of translated test sets (language B).
  std::vector<double> translate;

  std::vector<ModelKind> systems = {ModelKind::args_baseline, ModelKind::args_role_primed};
  std::vector<double> fractions = {1.0};
  /// Run i uses seed + i unless `seeds` lists them explicitly.
  std::uint64_t seed = 1;
  int num_seeds = 5;
  std::vector<std::uint64_t> seeds;
  bool gold_triggers = true;
  /// Also score arguments held by exactly one event of their sentence.
  bool discriminating = false;
  int vocab_words = 400;
  int max_sentence_tokens = 80;
  bool write_checkpoints = true;
  int jobs = 1;
  ModelConfig model;
  TrainConfig train;

  std::vector<std::uint64_t> run_seeds() const;
  void validate() const;
  nlohmann::ordered_json to_json() const;
  static ExperimentConfig from_json(const nlohmann::json& j);
};

struct ResultRow {
  std::string system;
  std::string language_pair;
  double fraction = 1.0;
  std::uint64_t seed = 0;
  std::string level;
  double precision = 0.0, recall = 0.0, f1 = 0.0;
};

struct ExperimentResult {
  std::vector<ResultRow> rows;
  std::string csv;
};

/// Whole documents in a seeded order until at least `fraction` of the
/// corpus's events are covered. Sentence order within the corpus is kept.
/// Subsets for increasing fractions are nested.
Corpus subset_by_documents(const Corpus& corpus, double fraction, std::uint64_t seed);

/// Decodes a corpus after splitting long sentences, then remaps to the
/// unsplit reference. Gold triggers come from `corpus` when requested.
EventSet decode_events(const Model* trigger_model, const Model& argument_model, const Corpus& corpus,
                       bool gold_triggers, int max_sentence_tokens);

std::string rows_to_csv(const std::vector<ResultRow>& rows);
std::string language_pair_name(const std::string& source, const std::string& target, double anchors);

/// Runs every (system, fraction, seed) sub-run, writing data, vocabulary,
/// checkpoints, reports, predictions, scores and results.csv under `out_dir`.
ExperimentResult run_experiment(const ExperimentConfig& config, const std::string& out_dir);

}  // namespace PRIMEIE_ABI
}  // namespace primeie
