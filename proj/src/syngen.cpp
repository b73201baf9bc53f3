#include "primeie/syngen.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "json.hpp"
#include "primeie/error.hpp"
#include "primeie/json_io.hpp"
#include "primeie/random.hpp"

namespace primeie {
inline namespace PRIMEIE_ABI {

namespace {

using ojson = nlohmann::ordered_json;

struct Element {
  enum Kind { literal, slot, open, close } kind;
  std::string text;  // literal word or slot name
  std::string cls;
};

std::vector<std::string> split_words(const std::string& s) {
  std::istringstream in(s);
  std::vector<std::string> out;
  for (std::string w; in >> w;) out.push_back(w);
  return out;
}

std::vector<Element> parse_pattern(const std::string& pattern) {
  std::vector<Element> out;
  for (const auto& w : split_words(pattern)) {
    if (w == "[") {
      out.push_back({Element::open, "", ""});
    } else if (w == "]") {
      out.push_back({Element::close, "", ""});
    } else if (w.size() > 2 && w.front() == '{' && w.back() == '}') {
      const auto colon = w.find(':');
      if (colon == std::string::npos || colon == 1 || colon + 2 >= w.size())
        throw ValidationError("grammar: malformed slot '" + w + "'");
      out.push_back({Element::slot, w.substr(1, colon - 1), w.substr(colon + 1, w.size() - colon - 2)});
    } else {
      out.push_back({Element::literal, w, ""});
    }
  }
  return out;
}

// CJK unified ideograph U+4E00 + k as UTF-8.
std::string cjk(std::size_t k) {
  const unsigned cp = 0x4E00u + static_cast<unsigned>(k);
  std::string s;
  s += static_cast<char>(0xE0 | (cp >> 12));
  s += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
  s += static_cast<char>(0x80 | (cp & 0x3F));
  return s;
}

bool has_discriminating(const Sentence& s) {
  std::map<TokenSpan, int> holders;
  for (const auto& e : s.events) {
    std::set<TokenSpan> mine;
    for (const auto& a : e.arguments) mine.insert(a.span);
    for (const auto& sp : mine) ++holders[sp];
  }
  for (const auto& [sp, n] : holders)
    if (n == 1) return true;
  return false;
}

Sentence fill_template(const GrammarSpec& spec, const Template& t, Rng& rng) {
  Sentence s;
  std::map<std::string, TokenSpan> spans;
  bool keep = true;
  for (const auto& el : parse_pattern(t.pattern)) {
    switch (el.kind) {
      case Element::open: keep = uniform01(rng) < 0.5; break;
      case Element::close: keep = true; break;
      case Element::literal:
        if (keep) s.tokens.push_back(el.text);
        break;
      case Element::slot: {
        if (!keep) break;
        const SlotClass& c = spec.slot_classes.at(el.cls);
        const auto words = split_words(c.fillers[uniform_index(rng, c.fillers.size())]);
        const int start = s.length();
        s.tokens.insert(s.tokens.end(), words.begin(), words.end());
        if (words.empty()) break;
        const TokenSpan span{start, s.length()};
        spans[el.text] = span;
        if (!c.entity_type.empty()) s.entities.push_back({span, c.entity_type, span.end - 1});
        break;
      }
    }
  }
  for (const auto& te : t.events) {
    EventMention e;
    e.trigger = spans.at(te.trigger);
    e.event_type = te.event_type;
    for (const auto& [slot, role] : te.roles) {
      auto it = spans.find(slot);
      if (it != spans.end()) e.arguments.push_back({it->second, role, 0.0});
    }
    s.events.push_back(std::move(e));
  }
  return s;
}

}  // namespace

const char* gen_mode_name(GenMode m) { return m == GenMode::simple ? "simple" : "two_event"; }

GenMode parse_gen_mode(const std::string& name) {
  if (name == "simple") return GenMode::simple;
  if (name == "two_event") return GenMode::two_event;
  throw ConfigError("unknown generation mode '" + name + "'");
}

void GrammarSpec::validate(const Ontology& ontology) const {
  for (const auto& [name, c] : slot_classes) {
    if (c.fillers.empty()) throw ValidationError("grammar: slot class '" + name + "' has no fillers");
    if (!c.entity_type.empty()) {
      if (!ontology.has_entity_type(c.entity_type))
        throw ValidationError("grammar: slot class '" + name + "' has unknown entity type '" + c.entity_type + "'");
      for (const auto& f : c.fillers)
        if (split_words(f).empty()) throw ValidationError("grammar: entity class '" + name + "' has an empty filler");
    }
  }
  if (sentences_per_document < 1) throw ValidationError("grammar: sentences_per_document must be at least 1");
  for (std::size_t ti = 0; ti < templates.size(); ++ti) {
    const Template& t = templates[ti];
    const std::string where = "grammar: template " + std::to_string(ti) + ": ";
    if (t.mode != "simple" && t.mode != "two_event") throw ValidationError(where + "unknown mode '" + t.mode + "'");
    std::map<std::string, std::pair<std::string, bool>> slots;  // name -> (class, optional)
    bool in_group = false;
    for (const auto& el : parse_pattern(t.pattern)) {
      if (el.kind == Element::open) {
        if (in_group) throw ValidationError(where + "nested optional group");
        in_group = true;
      } else if (el.kind == Element::close) {
        if (!in_group) throw ValidationError(where + "unbalanced ']'");
        in_group = false;
      } else if (el.kind == Element::slot) {
        if (!slot_classes.count(el.cls)) throw ValidationError(where + "slot class '" + el.cls + "' has no fillers");
        if (!slots.emplace(el.text, std::make_pair(el.cls, in_group)).second)
          throw ValidationError(where + "duplicate slot '" + el.text + "'");
      }
    }
    if (in_group) throw ValidationError(where + "unclosed optional group");
    const std::size_t want = t.mode == "simple" ? 1 : 2;
    if (t.events.size() != want)
      throw ValidationError(where + t.mode + " templates need exactly " + std::to_string(want) + " event(s)");
    if (want == 2 && t.events[0].event_type == t.events[1].event_type)
      throw ValidationError(where + "two_event templates need two different event types");
    for (const auto& e : t.events) {
      if (!ontology.has_event_type(e.event_type))
        throw ValidationError(where + "unknown event type '" + e.event_type + "'");
      auto tr = slots.find(e.trigger);
      if (tr == slots.end()) throw ValidationError(where + "trigger slot '" + e.trigger + "' not in the pattern");
      if (tr->second.second) throw ValidationError(where + "trigger slot '" + e.trigger + "' is optional");
      const SlotClass& tc = slot_classes.at(tr->second.first);
      if (!tc.entity_type.empty()) throw ValidationError(where + "trigger slot '" + e.trigger + "' is an entity class");
      for (const auto& f : tc.fillers)
        if (split_words(f).empty()) throw ValidationError(where + "trigger class has an empty filler");
      for (const auto& [slot, role] : e.roles) {
        if (!ontology.allows_role(e.event_type, role))
          throw ValidationError(where + "role '" + role + "' not allowed for " + e.event_type);
        auto it = slots.find(slot);
        if (it == slots.end()) throw ValidationError(where + "argument slot '" + slot + "' not in the pattern");
        if (slot_classes.at(it->second.first).entity_type.empty())
          throw ValidationError(where + "argument slot '" + slot + "' is not an entity class");
      }
    }
  }
  std::set<std::string> images;
  for (const auto& [a, b] : lexicon)
    if (!images.insert(b).second) throw ValidationError("grammar: lexicon is not injective at '" + b + "'");
  for (const auto& w : anchor_words) {
    auto it = lexicon.find(w);
    if (it == lexicon.end() || it->second != w)
      throw ValidationError("grammar: anchor '" + w + "' must map to itself in the lexicon");
  }
}

std::string GrammarSpec::to_json() const {
  ojson j;
  j["language"] = language;
  j["target_language"] = target_language;
  j["sentences_per_document"] = sentences_per_document;
  ojson classes = ojson::object();
  for (const auto& [name, c] : slot_classes) {
    ojson x;
    if (!c.entity_type.empty()) x["entity_type"] = c.entity_type;
    x["fillers"] = c.fillers;
    classes[name] = x;
  }
  j["slot_classes"] = classes;
  ojson ts = ojson::array();
  for (const auto& t : templates) {
    ojson x;
    x["mode"] = t.mode;
    x["pattern"] = t.pattern;
    ojson evs = ojson::array();
    for (const auto& e : t.events) {
      ojson roles = ojson::array();
      for (const auto& [slot, role] : e.roles) roles.push_back({slot, role});
      evs.push_back({{"trigger", e.trigger}, {"event_type", e.event_type}, {"roles", roles}});
    }
    x["events"] = evs;
    ts.push_back(x);
  }
  j["templates"] = ts;
  ojson lex = ojson::object();
  for (const auto& [a, b] : lexicon) lex[a] = b;
  j["lexicon"] = lex;
  j["anchor_words"] = anchor_words;
  return j.dump(2) + "\n";
}

GrammarSpec GrammarSpec::from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("grammar: ") + e.what(), 0);
  }
  try {
    GrammarSpec g;
    g.language = j.value("language", g.language);
    g.target_language = j.value("target_language", g.target_language);
    g.sentences_per_document = j.value("sentences_per_document", g.sentences_per_document);
    for (const auto& [name, c] : j.at("slot_classes").items())
      g.slot_classes[name] = {c.value("entity_type", std::string()), c.at("fillers").get<std::vector<std::string>>()};
    for (const auto& t : j.at("templates")) {
      Template x{t.at("mode").get<std::string>(), t.at("pattern").get<std::string>(), {}};
      for (const auto& e : t.at("events")) {
        TemplateEvent te{e.at("trigger").get<std::string>(), e.at("event_type").get<std::string>(), {}};
        for (const auto& r : e.at("roles")) te.roles.emplace_back(r.at(0).get<std::string>(), r.at(1).get<std::string>());
        x.events.push_back(std::move(te));
      }
      g.templates.push_back(std::move(x));
    }
    if (j.contains("lexicon")) g.lexicon = j["lexicon"].get<std::map<std::string, std::string>>();
    if (j.contains("anchor_words")) g.anchor_words = j["anchor_words"].get<std::vector<std::string>>();
    return g;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("grammar: ") + e.what());
  }
}

GrammarSpec load_grammar(const std::string& path) { return GrammarSpec::from_json(read_text_file(path)); }
void save_grammar(const std::string& path, const GrammarSpec& spec) { write_text_file(path, spec.to_json()); }

std::set<LegalTriple> grammar_triples(const GrammarSpec& spec) {
  std::set<LegalTriple> out;
  for (const auto& t : spec.templates) {
    std::map<std::string, std::string> cls;
    for (const auto& el : parse_pattern(t.pattern))
      if (el.kind == Element::slot) cls[el.text] = el.cls;
    for (const auto& e : t.events)
      for (const auto& [slot, role] : e.roles)
        out.insert({spec.slot_classes.at(cls.at(slot)).entity_type, e.event_type, role});
  }
  return out;
}

std::vector<std::string> content_vocabulary(const GrammarSpec& spec) {
  std::set<std::string> words;
  for (const auto& t : spec.templates)
    for (const auto& el : parse_pattern(t.pattern))
      if (el.kind == Element::literal) words.insert(el.text);
  for (const auto& [name, c] : spec.slot_classes)
    for (const auto& f : c.fillers)
      for (const auto& w : split_words(f)) words.insert(w);
  return {words.begin(), words.end()};
}

GrammarSpec with_lexicon(const GrammarSpec& spec, double anchor_fraction, std::uint64_t seed) {
  if (!(anchor_fraction >= 0 && anchor_fraction <= 1)) throw ConfigError("anchor fraction must lie in [0, 1]");
  GrammarSpec out = spec;
  const auto vocab = content_vocabulary(spec);
  if (vocab.size() > 20000) throw ConfigError("content vocabulary too large for the CJK lexicon");
  std::vector<std::string> order = vocab;
  Rng rng(seed);
  shuffle(order, rng);
  const auto n_anchor = static_cast<std::size_t>(std::llround(anchor_fraction * double(vocab.size())));
  const std::set<std::string> anchors(order.begin(), order.begin() + n_anchor);
  out.lexicon.clear();
  for (std::size_t k = 0; k < vocab.size(); ++k) out.lexicon[vocab[k]] = anchors.count(vocab[k]) ? vocab[k] : cjk(k);
  out.anchor_words.assign(anchors.begin(), anchors.end());
  return out;
}

Sentence generate_sentence(const GrammarSpec& spec, const Ontology& ontology, int index, std::uint64_t seed,
                           GenMode mode) {
  std::vector<const Template*> pool;
  for (const auto& t : spec.templates)
    if (t.mode == gen_mode_name(mode)) pool.push_back(&t);
  if (pool.empty()) throw ValidationError(std::string("grammar: no templates for mode ") + gen_mode_name(mode));
  Rng rng(derive_seed(seed, static_cast<std::uint64_t>(index)));
  for (int attempt = 0; attempt < 100; ++attempt) {
    Sentence s = fill_template(spec, *pool[uniform_index(rng, pool.size())], rng);
    if (mode == GenMode::two_event && !has_discriminating(s)) continue;
    s.doc_id = "doc" + std::to_string(index / spec.sentences_per_document);
    s.sent_id = "s" + std::to_string(index);
    s.language = spec.language;
    validate_sentence(s, ontology);
    return s;
  }
  throw ValidationError("grammar: no two_event template yields a discriminating argument");
}

Corpus generate_corpus(const GrammarSpec& spec, const Ontology& ontology, int n, std::uint64_t seed, GenMode mode) {
  if (n < 1) throw ConfigError("generate_corpus: n must be at least 1");
  spec.validate(ontology);
  Corpus c;
  c.ontology_id = ontology.id;
  c.sentences.resize(n);
#pragma omp parallel for schedule(static)
  for (int i = 0; i < n; ++i) c.sentences[i] = generate_sentence(spec, ontology, i, seed, mode);
  return c;
}

Corpus translate_corpus(const Corpus& corpus, const GrammarSpec& spec) {
  Corpus out = corpus;
  for (auto& s : out.sentences) {
    for (auto& tok : s.tokens) {
      auto it = spec.lexicon.find(tok);
      if (it == spec.lexicon.end())
        throw ValidationError("translate: token '" + tok + "' in " + s.doc_id + "/" + s.sent_id +
                              " is not in the lexicon");
      tok = it->second;
    }
    s.language = spec.target_language;
  }
  return out;
}

GrammarSpec default_grammar() {
  GrammarSpec g;
  g.slot_classes = {
      {"PER", {"PER", {"Bob Smith", "Ildar Dadin", "Maria Lopez", "Chen Wei", "Omar", "Anna Petrova", "John",
                       "Li Na", "Karim Haddad", "Sara", "the general", "the suspect", "Ivan Ivanov", "the mayor",
                       "Yusuf Ali", "Elena"}}},
      {"GROUP", {"PER", {"activists", "students", "workers", "crowds", "protesters", "farmers", "the opposition",
                         "hundreds of residents", "supporters of the party"}}},
      {"ORG", {"ORG", {"police", "the army", "security forces", "the militia", "federal agents", "the border guard",
                       "troops"}}},
      {"COURT", {"ORG", {"a court", "the tribunal", "a military court", "judges", "the supreme court"}}},
      {"LOC", {"LOC", {"Paris", "Moscow", "New York", "Cairo", "the capital", "Baghdad", "the border town", "Lagos",
                       "Kyiv", "the old city", "Berlin", "a village near Aleppo"}}},
      {"TIME", {"TIME", {"Monday", "Tuesday", "on Friday", "last week", "this morning", "in March", "late on Sunday",
                         "two days ago"}}},
      {"WEA", {"WEA", {"a rifle", "rockets", "a car bomb", "knives", "artillery", "a drone"}}},
      {"OBJ", {"OBJ", {"supplies", "the cargo", "food aid", "weapons", "medical equipment", "fuel"}}},
      {"ATTACK_V", {"", {"attacked", "bombed", "shelled", "raided", "ambushed", "shot"}}},
      {"ARREST_V", {"", {"arrested", "detained", "jailed", "seized"}}},
      {"DEMO_V", {"", {"protested", "demonstrated", "rallied", "marched"}}},
      {"CONVICT_V", {"", {"convicted", "sentenced", "condemned"}}},
      {"TRANSPORT_V", {"", {"moved", "shipped", "transported", "delivered", "carried"}}},
      {"ADV", {"", {"", "", "reportedly", "again", "suddenly", "quietly"}}},
      {"SAY", {"", {"", "", "officials said", "witnesses said", "according to reports"}}},
  };
  using R = std::vector<std::pair<std::string, std::string>>;
  auto simple = [&](std::string pattern, std::string type, const R& roles) {
    R present;
    for (const auto& r : roles)
      if (pattern.find("{" + r.first + ":") != std::string::npos) present.push_back(r);
    g.templates.push_back({"simple", std::move(pattern), {{"t", std::move(type), present}}});
  };
  const R attack = {{"a", "Attacker"}, {"b", "Target"}, {"w", "Instrument"}, {"p", "Place"}};
  simple("{a:PER} {adv:ADV} {t:ATTACK_V} {b:PER} [ with {w:WEA} ] [ in {p:LOC} ] {s:SAY} .", "Attack", attack);
  simple("[ in {p:LOC} , ] {a:ORG} {t:ATTACK_V} {b:PER} [ using {w:WEA} ] .", "Attack", attack);
  simple("{b:PER} was {t:ATTACK_V} [ in {p:LOC} ] by {a:PER} [ with {w:WEA} ] .", "Attack", attack);
  const R arrest = {{"ag", "Agent"}, {"per", "Person"}, {"p", "Place"}, {"tm", "Time"}};
  simple("{ag:ORG} {adv:ADV} {t:ARREST_V} {per:PER} [ in {p:LOC} ] [ {tm:TIME} ] .", "Arrest", arrest);
  simple("{per:PER} was {t:ARREST_V} [ by {ag:ORG} ] [ in {p:LOC} ] [ {tm:TIME} ] {s:SAY} .", "Arrest", arrest);
  simple("[ {tm:TIME} , ] {ag:ORG} {t:ARREST_V} {per:GROUP} [ outside {p:LOC} ] .", "Arrest", arrest);
  const R demo = {{"e", "Entity"}, {"p", "Place"}, {"tm", "Time"}};
  simple("{e:GROUP} {adv:ADV} {t:DEMO_V} [ in {p:LOC} ] [ {tm:TIME} ] .", "Demonstrate", demo);
  simple("[ {tm:TIME} , ] thousands of {e:GROUP} {t:DEMO_V} [ outside {p:LOC} ] {s:SAY} .", "Demonstrate", demo);
  simple("[ in {p:LOC} , ] {e:GROUP} {t:DEMO_V} against the government [ {tm:TIME} ] .", "Demonstrate", demo);
  const R convict = {{"adj", "Adjudicator"}, {"d", "Defendant"}, {"p", "Place"}, {"tm", "Time"}};
  simple("{adj:COURT} {t:CONVICT_V} {d:PER} [ in {p:LOC} ] [ {tm:TIME} ] .", "Convict", convict);
  simple("{d:PER} was {adv:ADV} {t:CONVICT_V} [ by {adj:COURT} ] [ in {p:LOC} ] .", "Convict", convict);
  simple("[ {tm:TIME} , ] {adj:COURT} in {p:LOC} {t:CONVICT_V} {d:PER} {s:SAY} .", "Convict", convict);
  const R transport = {{"ag", "Agent"}, {"art", "Artifact"}, {"o", "Origin"}, {"de", "Destination"}};
  simple("{ag:ORG} {t:TRANSPORT_V} {art:OBJ} [ from {o:LOC} ] [ to {de:LOC} ] .", "Transport", transport);
  simple("{art:OBJ} were {t:TRANSPORT_V} [ from {o:LOC} ] to {de:LOC} [ by {ag:ORG} ] .", "Transport", transport);
  simple("[ {tm:TIME} , ] {ag:PER} {adv:ADV} {t:TRANSPORT_V} {art:OBJ} to {de:LOC} .", "Transport", transport);

  auto pair = [&](std::string pattern, TemplateEvent a, TemplateEvent b) {
    g.templates.push_back({"two_event", std::move(pattern), {std::move(a), std::move(b)}});
  };
  pair("{x:GROUP} {t1:DEMO_V} in {p1:LOC} [ {tm1:TIME} ] before being {t2:ARREST_V} in {p2:LOC} [ {tm2:TIME} ] .",
       {"t1", "Demonstrate", {{"x", "Entity"}, {"p1", "Place"}, {"tm1", "Time"}}},
       {"t2", "Arrest", {{"x", "Person"}, {"p2", "Place"}, {"tm2", "Time"}}});
  pair("{x:PER} was {t2:ARREST_V} in {p2:LOC} [ {tm2:TIME} ] after they {t1:DEMO_V} in {p1:LOC} [ {tm1:TIME} ] .",
       {"t1", "Demonstrate", {{"x", "Entity"}, {"p1", "Place"}, {"tm1", "Time"}}},
       {"t2", "Arrest", {{"x", "Person"}, {"p2", "Place"}, {"tm2", "Time"}}});
  pair("{x:PER} was {t1:ARREST_V} in {p1:LOC} [ {tm1:TIME} ] and {t2:CONVICT_V} in {p2:LOC} [ {tm2:TIME} ] .",
       {"t1", "Arrest", {{"x", "Person"}, {"p1", "Place"}, {"tm1", "Time"}}},
       {"t2", "Convict", {{"x", "Defendant"}, {"p2", "Place"}, {"tm2", "Time"}}});
  pair("{x:GROUP} {t1:DEMO_V} in {p1:LOC} [ {tm1:TIME} ] after being {t2:CONVICT_V} in {p2:LOC} [ {tm2:TIME} ] .",
       {"t1", "Demonstrate", {{"x", "Entity"}, {"p1", "Place"}, {"tm1", "Time"}}},
       {"t2", "Convict", {{"x", "Defendant"}, {"p2", "Place"}, {"tm2", "Time"}}});
  pair("{x:PER} {t1:ATTACK_V} targets in {p1:LOC} and was {t2:ARREST_V} in {p2:LOC} .",
       {"t1", "Attack", {{"x", "Attacker"}, {"p1", "Place"}}}, {"t2", "Arrest", {{"x", "Person"}, {"p2", "Place"}}});
  pair("{x:PER} was {t2:CONVICT_V} in {p2:LOC} for having {t1:ATTACK_V} a base in {p1:LOC} .",
       {"t1", "Attack", {{"x", "Attacker"}, {"p1", "Place"}}},
       {"t2", "Convict", {{"x", "Defendant"}, {"p2", "Place"}}});
  return g;
}

Ontology default_ontology() {
  ojson j;
  j["event_types"] = {"Attack", "Arrest", "Demonstrate", "Convict", "Transport"};
  j["roles_for"] = {{"Attack", {"Attacker", "Target", "Instrument", "Place"}},
                    {"Arrest", {"Agent", "Person", "Place", "Time"}},
                    {"Demonstrate", {"Entity", "Place", "Time"}},
                    {"Convict", {"Adjudicator", "Defendant", "Place", "Time"}},
                    {"Transport", {"Agent", "Artifact", "Origin", "Destination"}}};
  const std::vector<std::string> coded = {"Place",  "Time",   "Attacker",    "Target",   "Instrument",
                                          "Agent",  "Person", "Entity",      "Adjudicator", "Artifact",
                                          "Origin", "Destination", "Defendant"};
  ojson codes = ojson::object();
  for (std::size_t i = 0; i < coded.size(); ++i) codes[coded[i]] = std::to_string(i + 1);
  j["role_code"] = codes;
  j["entity_types"] = {"PER", "ORG", "LOC", "TIME", "WEA", "OBJ"};
  ojson triples = ojson::array();
  for (const auto& t : grammar_triples(default_grammar())) triples.push_back({t.entity_type, t.event_type, t.role});
  j["legal_triples"] = triples;
  return parse_ontology(j.dump());
}

}  // namespace PRIMEIE_ABI
}  // namespace primeie
