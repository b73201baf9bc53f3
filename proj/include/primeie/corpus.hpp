#pragma once

#include <compare>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "primeie/ontology.hpp"

namespace primeie {
inline namespace PRIMEIE_ABI {

/// Half-open token range [start, end).
struct TokenSpan {
  int start = 0;
  int end = 0;

  int length() const { return end - start; }
  bool overlaps(const TokenSpan& o) const { return start < o.end && o.start < end; }
  bool contains(int i) const { return start <= i && i < end; }
  TokenSpan shifted(int by) const { return {start + by, end + by}; }
  auto operator<=>(const TokenSpan&) const = default;
};

struct EntityMention {
  TokenSpan span;
  std::string entity_type;
  std::optional<int> head_index;
  bool operator==(const EntityMention&) const = default;
};

struct Argument {
  TokenSpan span;
  std::string role;
  double score = 0.0;  // only meaningful for predictions
  bool operator==(const Argument& o) const { return span == o.span && role == o.role; }
};

struct EventMention {
  TokenSpan trigger;
  std::string event_type;
  std::vector<Argument> arguments;
  double score = 0.0;  // only meaningful for predictions
  bool operator==(const EventMention& o) const {
    return trigger == o.trigger && event_type == o.event_type && arguments == o.arguments;
  }
};

struct Sentence {
  std::string doc_id;
  std::string sent_id;
  std::string language;
  std::vector<std::string> tokens;
  std::vector<EntityMention> entities;
  std::vector<EventMention> events;
  int origin_offset = 0;
  /// sent_id of the unsplit parent; empty for unsplit sentences.
  std::string parent_sent_id;

  int length() const { return static_cast<int>(tokens.size()); }
  std::vector<std::string> words(const TokenSpan& span) const;
  bool operator==(const Sentence&) const = default;
};

struct Corpus {
  std::vector<Sentence> sentences;
  std::string ontology_id;
  bool operator==(const Corpus&) const = default;
};

/// Events of one sentence, keyed by (doc_id, sent_id). Used for gold
/// references and for predictions alike.
struct SentenceEvents {
  std::string doc_id;
  std::string sent_id;
  std::vector<EventMention> events;
};
using EventSet = std::vector<SentenceEvents>;

EventSet events_of(const Corpus& corpus);

void validate_sentence(const Sentence& s, const Ontology& ontology);
void validate_corpus(const Corpus& corpus, const Ontology& ontology);

/// Reads line-delimited sentence records; blank lines are skipped.
/// ParseError carries the 1-based line number; ValidationError names the
/// first violated invariant and its line.
Corpus read_corpus(std::istream& in, const Ontology& ontology);
Corpus load_corpus(const std::string& path, const Ontology& ontology);
void write_corpus(std::ostream& out, const Corpus& corpus);
void save_corpus(const std::string& path, const Corpus& corpus);

/// Greedy left-to-right split into pieces of at most max_len tokens. An
/// event goes to the piece holding its trigger start (its trigger is
/// clipped to that piece); arguments and entities not fully inside the
/// piece are dropped from the piece-local gold.
Corpus split_long_sentences(const Corpus& corpus, int max_len);

struct SpanRef {
  std::string doc_id;
  std::string sent_id;
  TokenSpan span;
  bool operator==(const SpanRef&) const = default;
};

/// Shifts spans by their sentence's origin_offset and renames them to the
/// unsplit parent. Throws ValidationError for sentences not in `corpus`.
std::vector<SpanRef> remap_to_reference(const std::vector<SpanRef>& spans, const Corpus& corpus);
/// Event-level remap: pieces of one parent merge into a single entry in
/// first-appearance order.
EventSet remap_to_reference(const EventSet& events, const Corpus& corpus);

}  // namespace PRIMEIE_ABI
}  // namespace primeie
