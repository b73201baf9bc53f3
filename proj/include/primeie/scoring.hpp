#pragma once

#include <string>
#include <vector>

#include "json.hpp"
#include "primeie/corpus.hpp"

namespace primeie {
inline namespace PRIMEIE_ABI {

enum class Level { trigger, argument };
const char* level_name(Level l);
Level parse_level(const std::string& name);

struct LevelScore {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  long tp = 0, fp = 0, fn = 0;
};

struct ScoreReport {
  LevelScore trigger;
  LevelScore argument;
  const LevelScore& at(Level l) const { return l == Level::trigger ? trigger : argument; }
  nlohmann::ordered_json to_json() const;
};

/// P = tp/(tp+fp) and R = tp/(tp+fn); a 0/0 ratio is 1 only when both
/// the predicted and the gold set are empty, else 0. F1 0/0 is 0.
LevelScore prf(long tp, long fp, long fn);

/// Triggers match on span and event type; arguments on span, event type
/// and role. Each gold item matches at most once, greedily in order.
/// Sentences absent from `pred` count as empty; predicted sentences
/// absent from `gold` are an error.
ScoreReport score(const EventSet& pred, const EventSet& gold);
LevelScore score(const EventSet& pred, const EventSet& gold, Level level);

struct MeanStd {
  double mean = 0.0;
  double stdev = 0.0;  // sample standard deviation; 0 for one value
};

struct LevelAverage {
  MeanStd precision, recall, f1;
};

struct AveragedReport {
  LevelAverage trigger, argument;
  std::size_t seeds = 0;
  nlohmann::ordered_json to_json() const;
};

MeanStd mean_std(const std::vector<double>& values);
AveragedReport average_seeds(const std::vector<ScoreReport>& reports);

/// Union keyed by (sentence, trigger span, event type, argument span,
/// role). All inputs must cover the same sentences.
EventSet union_decode(const std::vector<EventSet>& per_seed);

struct DiffCounts {
  long both_correct = 0;
  long only_correct = 0;
  long substitution = 0;
  long similar = 0;
  long deletion = 0;
  long insertion = 0;
  long total() const { return both_correct + only_correct + substitution + similar + deletion + insertion; }
};

/// Error taxonomy of two systems against gold. Exact matches are correct
/// (split by whether the other system also matched that gold item). An
/// unmatched gold item overlapped by a prediction is a substitution,
/// otherwise a deletion; an unmatched prediction overlapping gold is a
/// substitution, one overlapping only the other system's output is
/// similar, anything else an insertion. Overlap needs the same sentence
/// and event type and a shared token.
struct DiffReport {
  Level level = Level::argument;
  DiffCounts a, b;
  long gold_items = 0, a_items = 0, b_items = 0, a_exact = 0, b_exact = 0;
  nlohmann::ordered_json to_json() const;
};

DiffReport diff_outputs(const EventSet& pred_a, const EventSet& pred_b, const EventSet& gold, Level level);

/// Keeps gold arguments whose span is an argument of exactly one event of
/// its sentence, and predictions on those spans.
std::pair<EventSet, EventSet> restrict_to_discriminating(const EventSet& pred, const EventSet& gold);

std::string report_to_text(const ScoreReport& r);
std::string averaged_to_text(const AveragedReport& r);
std::string diff_to_text(const DiffReport& r);

}  // namespace PRIMEIE_ABI
}  // namespace primeie
