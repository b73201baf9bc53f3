#pragma once

#include <span>
#include <string>
#include <vector>

#include "primeie/graph.hpp"
#include "primeie/tensor.hpp"

namespace primeie {
inline namespace PRIMEIE_ABI {

enum class LabelKind { TypedBio, UntypedBio, CandidateRoles };

/// Ordered label inventory. Label 0 is always the null label ("O" or
/// "NONE"), so the decoder's smallest-index tie-break prefers it.
struct LabelSpace {
  std::vector<std::string> labels;
  LabelKind kind = LabelKind::UntypedBio;

  static LabelSpace typed_bio(const std::vector<std::string>& types);
  static LabelSpace untyped_bio();
  static LabelSpace candidate_roles(const std::vector<std::string>& roles);

  int size() const { return static_cast<int>(labels.size()); }
  int index_of(const std::string& label) const;  // -1 when absent
  bool is_bio() const { return kind != LabelKind::CandidateRoles; }
  void validate() const;
};

/// Forbidden moves. `transition[a * T + b]` forbids a -> b and `start[b]`
/// forbids opening a sequence with b.
struct CrfMask {
  int labels = 0;
  std::vector<bool> transition;
  std::vector<bool> start;

  static CrfMask none(int labels);
  bool forbidden(int from, int to) const { return transition[static_cast<std::size_t>(from) * labels + to]; }
  std::size_t forbidden_count() const;
};

/// BIO well-formedness: forbids O -> I-x, start -> I-x, and B-y/I-y -> I-x
/// for x != y. Candidate-role spaces are rejected.
CrfMask bio_mask(const LabelSpace& space);

struct TransitionTable {
  Tensor transition;  // T x T
  Tensor start;       // 1 x T
  Tensor end;         // 1 x T
  CrfMask mask;

  explicit TransitionTable(int labels = 0);
  int labels() const { return mask.labels; }
};

/// log of the sum over label sequences of exp(start + emissions +
/// transitions + end), with masked moves excluded. Accumulates in double.
double log_partition(const Tensor& emissions, const TransitionTable& table);
double sequence_score(const Tensor& emissions, const TransitionTable& table, std::span<const int> labels);
/// log_partition - score(gold). Throws DecodeError if gold uses a masked move.
double nll(const Tensor& emissions, const TransitionTable& table, std::span<const int> gold);

struct ViterbiResult {
  std::vector<int> labels;
  double score = 0.0;
};

/// Highest-scoring sequence. Among tied sequences the lexicographically
/// smallest one is returned (smallest label at the earliest differing
/// position). Throws DecodeError when every path is masked.
ViterbiResult viterbi(const Tensor& emissions, const TransitionTable& table);

/// Differentiable NLL over emissions (L x T), transition (T x T), start and
/// end (1 x T). Gradients are exact CRF marginals from forward-backward.
Var crf_nll(Graph& g, Var emissions, Var transition, Var start, Var end, const CrfMask& mask,
            std::span<const int> gold);

/// A decoded span in token coordinates with its type (empty for untyped).
struct LabeledSpan {
  int start = 0;
  int end = 0;
  std::string type;
  bool operator==(const LabeledSpan&) const = default;
};

bool is_valid_bio(std::span<const int> labels, const LabelSpace& space);
/// Spans of a BIO sequence. Throws DecodeError on a malformed sequence.
std::vector<LabeledSpan> bio_spans(std::span<const int> labels, const LabelSpace& space);
/// Rewrites every I-x that does not continue a B-x/I-x run into B-x.
std::vector<int> repair_bio(std::span<const int> labels, const LabelSpace& space);
/// BIO labels for the given spans over a sequence of `length` tokens.
std::vector<int> encode_bio(const std::vector<LabeledSpan>& spans, int length, const LabelSpace& space);

}  // namespace PRIMEIE_ABI
}  // namespace primeie
