#pragma once

#include <compare>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "primeie/real.hpp"

namespace primeie {
inline namespace PRIMEIE_ABI {

struct LegalTriple {
  std::string entity_type;
  std::string event_type;
  std::string role;
  auto operator<=>(const LegalTriple&) const = default;
};

/// Event ontology: event types, their role sets, integer role codes used
/// in role primes, entity types, and the legal (entity, event, role)
/// triples that constrain the candidate classifier.
struct Ontology {
  std::string id;
  std::vector<std::string> event_types;
  std::map<std::string, std::vector<std::string>> roles_for;
  std::map<std::string, std::string> role_code;
  std::vector<std::string> entity_types;
  std::set<LegalTriple> legal_triples;

  /// Throws ValidationError naming the first violated invariant.
  void validate() const;

  bool has_event_type(const std::string& t) const;
  bool has_entity_type(const std::string& t) const;
  bool allows_role(const std::string& event_type, const std::string& role) const;
  bool is_legal(const std::string& entity_type, const std::string& event_type, const std::string& role) const;
  const std::vector<std::string>& roles_of(const std::string& event_type) const;
  const std::string& code_of(const std::string& role) const;
  int event_type_index(const std::string& t) const;
  int entity_type_index(const std::string& t) const;
  /// Every role, ordered by numeric code.
  std::vector<std::string> all_roles() const;
};

/// Parses an ontology document. Roles without a code receive the next
/// integer in first-appearance order (event_types order, then roles_for
/// order), starting after the largest existing code. An absent "id" is
/// replaced by a content hash.
Ontology parse_ontology(const std::string& text);
Ontology load_ontology(const std::string& path);
std::string ontology_to_string(const Ontology& ontology);
void save_ontology(const std::string& path, const Ontology& ontology);

}  // namespace PRIMEIE_ABI
}  // namespace primeie
