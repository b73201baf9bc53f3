#include "primeie/priming.hpp"

#include "primeie/error.hpp"

namespace primeie {
inline namespace PRIMEIE_ABI {

namespace {

PrimedInput wrap(EncodedInput in, PrimeKind kind) {
  PrimedInput p;
  p.ids = std::move(in.ids);
  p.segments = std::move(in.segments);
  p.alignment = std::move(in.alignment);
  p.kind = kind;
  return p;
}

}  // namespace

const char* prime_kind_name(PrimeKind k) {
  switch (k) {
    case PrimeKind::none: return "none";
    case PrimeKind::trigger: return "trigger";
    case PrimeKind::trigger_role: return "trigger_role";
    case PrimeKind::token: return "token";
  }
  return "none";
}

PrimeKind parse_prime_kind(const std::string& name) {
  for (PrimeKind k : {PrimeKind::none, PrimeKind::trigger, PrimeKind::trigger_role, PrimeKind::token})
    if (name == prime_kind_name(k)) return k;
  throw ConfigError("unknown prime kind '" + name + "'");
}

PrimedInput prime_none(const SubwordVocab& vocab, const std::vector<std::string>& sentence) {
  return wrap(encode_input(vocab, {}, sentence), PrimeKind::none);
}

PrimedInput prime_trigger(const SubwordVocab& vocab, const std::vector<std::string>& trigger_words,
                          const std::vector<std::string>& sentence) {
  if (trigger_words.empty()) throw ValidationError("prime_trigger: empty trigger");
  return wrap(encode_input(vocab, trigger_words, sentence), PrimeKind::trigger);
}

PrimedInput prime_trigger_role(const SubwordVocab& vocab, const std::vector<std::string>& trigger_words,
                               const std::string& role, const Ontology& ontology,
                               const std::vector<std::string>& sentence) {
  if (trigger_words.empty()) throw ValidationError("prime_trigger_role: empty trigger");
  std::vector<std::string> prime = trigger_words;
  prime.push_back(kRoleSeparator);
  prime.push_back(ontology.code_of(role));
  return wrap(encode_input(vocab, prime, sentence), PrimeKind::trigger_role);
}

PrimedInput prime_token(const SubwordVocab& vocab, int token_index, const std::vector<std::string>& sentence) {
  if (token_index < 0 || token_index >= static_cast<int>(sentence.size()))
    throw ValidationError("prime_token: index " + std::to_string(token_index) + " outside sentence of " +
                          std::to_string(sentence.size()) + " words");
  PrimedInput p = wrap(encode_input(vocab, {sentence[token_index]}, sentence), PrimeKind::token);
  p.prime_token_pieces = p.alignment.prime_pieces;
  return p;
}

}  // namespace PRIMEIE_ABI
}  // namespace primeie
