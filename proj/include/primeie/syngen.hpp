#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "primeie/corpus.hpp"
#include "primeie/ontology.hpp"

namespace primeie {
inline namespace PRIMEIE_ABI {

/// Filler words for one slot class. Entity classes tag every filled slot
/// as an entity mention; lexical classes may contain "" for an empty fill.
struct SlotClass {
  std::string entity_type;  // empty for lexical classes
  std::vector<std::string> fillers;
};

struct TemplateEvent {
  std::string trigger;  // slot name
  std::string event_type;
  std::vector<std::pair<std::string, std::string>> roles;  // (slot name, role)
};

/// Flat token pattern. "{name:CLASS}" is a slot; "[" ... "]" encloses an
/// optional group (kept with probability one half).
struct Template {
  std::string mode;  // "simple" or "two_event"
  std::string pattern;
  std::vector<TemplateEvent> events;
};

enum class GenMode { simple, two_event };
const char* gen_mode_name(GenMode m);
GenMode parse_gen_mode(const std::string& name);

struct GrammarSpec {
  std::map<std::string, SlotClass> slot_classes;
  std::vector<Template> templates;
  int sentences_per_document = 4;
  std::string language = "A";
  std::string target_language = "B";
  /// Language-A word to language-B word; anchors map to themselves.
  std::map<std::string, std::string> lexicon;
  std::vector<std::string> anchor_words;

  void validate(const Ontology& ontology) const;
  std::string to_json() const;
  static GrammarSpec from_json(const std::string& text);
};

GrammarSpec load_grammar(const std::string& path);
void save_grammar(const std::string& path, const GrammarSpec& spec);

/// Toy grammar over five event types. Two-event templates share the
/// non-Place/Time participant between both events, so the arguments that
/// tell the events apart all fill Place or Time.
GrammarSpec default_grammar();
Ontology default_ontology();
/// (entity type, event type, role) triples the grammar can produce.
std::set<LegalTriple> grammar_triples(const GrammarSpec& spec);

/// Every word a generated sentence can contain, sorted.
std::vector<std::string> content_vocabulary(const GrammarSpec& spec);

/// Fills the lexicon: `anchor_fraction` of the content vocabulary (seeded
/// choice) maps to itself, every other word to a distinct single CJK
/// character never used in language A.
GrammarSpec with_lexicon(const GrammarSpec& spec, double anchor_fraction, std::uint64_t seed);

/// Sentence i depends only on (seed, i), so generation is shardable.
Corpus generate_corpus(const GrammarSpec& spec, const Ontology& ontology, int n, std::uint64_t seed, GenMode mode);
Sentence generate_sentence(const GrammarSpec& spec, const Ontology& ontology, int index, std::uint64_t seed,
                           GenMode mode);

/// Token-by-token substitution through the lexicon; structure unchanged.
Corpus translate_corpus(const Corpus& corpus, const GrammarSpec& spec);

}  // namespace PRIMEIE_ABI
}  // namespace primeie
