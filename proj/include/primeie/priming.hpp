#pragma once

#include <string>
#include <vector>

#include "primeie/ontology.hpp"
#include "primeie/tokenizer.hpp"

namespace primeie {
inline namespace PRIMEIE_ABI {

enum class PrimeKind { none, trigger, trigger_role, token };

const char* prime_kind_name(PrimeKind k);
PrimeKind parse_prime_kind(const std::string& name);

struct PrimedInput {
  std::vector<int> ids;
  std::vector<int> segments;
  Alignment alignment;
  PrimeKind kind = PrimeKind::none;
  /// Pieces of the priming token; set for PrimeKind::token only.
  PieceRange prime_token_pieces{0, 0};
};

inline constexpr const char* kRoleSeparator = ";";

PrimedInput prime_none(const SubwordVocab& vocab, const std::vector<std::string>& sentence);
PrimedInput prime_trigger(const SubwordVocab& vocab, const std::vector<std::string>& trigger_words,
                          const std::vector<std::string>& sentence);
/// Prime segment: trigger words, ";", role_code[role].
PrimedInput prime_trigger_role(const SubwordVocab& vocab, const std::vector<std::string>& trigger_words,
                               const std::string& role, const Ontology& ontology,
                               const std::vector<std::string>& sentence);
PrimedInput prime_token(const SubwordVocab& vocab, int token_index, const std::vector<std::string>& sentence);

}  // namespace PRIMEIE_ABI
}  // namespace primeie
