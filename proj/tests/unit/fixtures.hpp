#pragma once

#include <string>

#include "primeie/corpus.hpp"
#include "primeie/random.hpp"

namespace testutil {

inline const char* kTinyOntology = R"({
  "event_types": ["Attack", "Convict"],
  "roles_for": {"Attack": ["Attacker", "Target", "Place"], "Convict": ["Defendant", "Place"]},
  "role_code": {"Attacker": "1", "Target": "2", "Place": "3", "Defendant": "13"},
  "entity_types": ["PER", "LOC"],
  "legal_triples": [["PER", "Attack", "Attacker"], ["PER", "Attack", "Target"], ["LOC", "Attack", "Place"],
                    ["PER", "Convict", "Defendant"], ["LOC", "Convict", "Place"]]
})";

inline primeie::Ontology tiny_ontology() { return primeie::parse_ontology(kTinyOntology); }

/// Random valid sentence: non-overlapping triggers, arguments anywhere.
inline primeie::Sentence random_sentence(primeie::Rng& rng, const primeie::Ontology& o, int length,
                                         const std::string& id) {
  using namespace primeie;
  Sentence s;
  s.doc_id = "d" + id;
  s.sent_id = "s" + id;
  s.language = "en";
  for (int i = 0; i < length; ++i) s.tokens.push_back("w" + std::to_string(uniform_index(rng, 50)));
  auto span = [&] {
    int a = static_cast<int>(uniform_index(rng, length));
    int len = 1 + static_cast<int>(uniform_index(rng, 3));
    return TokenSpan{a, std::min(length, a + len)};
  };
  const int n_ent = static_cast<int>(uniform_index(rng, 4));
  for (int k = 0; k < n_ent; ++k) {
    EntityMention e{span(), o.entity_types[uniform_index(rng, o.entity_types.size())], std::nullopt};
    if (uniform01(rng) < 0.5) e.head_index = e.span.end - 1;
    s.entities.push_back(e);
  }
  const int n_ev = static_cast<int>(uniform_index(rng, 4));
  for (int k = 0; k < n_ev; ++k) {
    EventMention ev;
    ev.trigger = span();
    ev.event_type = o.event_types[uniform_index(rng, o.event_types.size())];
    bool clash = false;
    for (const auto& other : s.events) clash |= other.trigger == ev.trigger && other.event_type == ev.event_type;
    if (clash) continue;
    const auto& roles = o.roles_of(ev.event_type);
    const int n_arg = static_cast<int>(uniform_index(rng, 4));
    for (int a = 0; a < n_arg; ++a) {
      Argument arg{span(), roles[uniform_index(rng, roles.size())], 0.0};
      if (std::find(ev.arguments.begin(), ev.arguments.end(), arg) == ev.arguments.end()) ev.arguments.push_back(arg);
    }
    s.events.push_back(ev);
  }
  return s;
}

}  // namespace testutil
