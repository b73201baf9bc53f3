#include "primeie/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "primeie/error.hpp"
#include "primeie/json_io.hpp"

namespace primeie {
inline namespace PRIMEIE_ABI {

namespace {

std::string where(const Sentence& s) { return s.doc_id + "/" + s.sent_id; }

void check_span(const TokenSpan& span, const Sentence& s, const std::string& what) {
  if (span.start < 0 || span.start >= span.end || span.end > s.length())
    throw ValidationError(where(s) + ": " + what + " span [" + std::to_string(span.start) + "," +
                          std::to_string(span.end) + ") invalid for sentence of " + std::to_string(s.length()) +
                          " tokens");
}

}  // namespace

std::vector<std::string> Sentence::words(const TokenSpan& span) const {
  return std::vector<std::string>(tokens.begin() + span.start, tokens.begin() + span.end);
}

EventSet events_of(const Corpus& corpus) {
  EventSet out;
  out.reserve(corpus.sentences.size());
  for (const auto& s : corpus.sentences) out.push_back({s.doc_id, s.sent_id, s.events});
  return out;
}

void validate_sentence(const Sentence& s, const Ontology& ontology) {
  if (s.tokens.empty()) throw ValidationError(where(s) + ": sentence has no tokens");
  if (s.origin_offset < 0) throw ValidationError(where(s) + ": origin_offset is negative");
  for (const auto& e : s.entities) {
    check_span(e.span, s, "entity");
    if (!ontology.has_entity_type(e.entity_type))
      throw ValidationError(where(s) + ": unknown entity type '" + e.entity_type + "'");
    if (e.head_index && !e.span.contains(*e.head_index))
      throw ValidationError(where(s) + ": head_index " + std::to_string(*e.head_index) + " outside entity span");
  }
  std::set<std::pair<TokenSpan, std::string>> triggers;
  for (const auto& ev : s.events) {
    check_span(ev.trigger, s, "trigger");
    if (!ontology.has_event_type(ev.event_type))
      throw ValidationError(where(s) + ": unknown event type '" + ev.event_type + "'");
    if (!triggers.insert({ev.trigger, ev.event_type}).second)
      throw ValidationError(where(s) + ": duplicate event " + ev.event_type);
    std::set<std::pair<TokenSpan, std::string>> args;
    for (const auto& a : ev.arguments) {
      check_span(a.span, s, "argument");
      if (!ontology.allows_role(ev.event_type, a.role))
        throw ValidationError(where(s) + ": role '" + a.role + "' not in roles_for[" + ev.event_type + "]");
      if (!args.insert({a.span, a.role}).second)
        throw ValidationError(where(s) + ": duplicate argument with role '" + a.role + "'");
    }
  }
}

void validate_corpus(const Corpus& corpus, const Ontology& ontology) {
  std::set<std::pair<std::string, std::string>> keys;
  for (const auto& s : corpus.sentences) {
    validate_sentence(s, ontology);
    if (!keys.insert({s.doc_id, s.sent_id}).second)
      throw ValidationError(where(s) + ": duplicate (doc_id, sent_id)");
  }
}

Corpus read_corpus(std::istream& in, const Ontology& ontology) {
  Corpus c;
  c.ontology_id = ontology.id;
  std::set<std::pair<std::string, std::string>> keys;
  std::string line;
  long lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    Sentence s;
    try {
      s = sentence_from_json(nlohmann::json::parse(line));
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(e.what(), lineno);
    }
    try {
      validate_sentence(s, ontology);
      if (!keys.insert({s.doc_id, s.sent_id}).second)
        throw ValidationError(where(s) + ": duplicate (doc_id, sent_id)");
    } catch (const ValidationError& e) {
      throw ValidationError("line " + std::to_string(lineno) + ": " + e.what());
    }
    c.sentences.push_back(std::move(s));
  }
  return c;
}

Corpus load_corpus(const std::string& path, const Ontology& ontology) {
  std::ifstream in(path);
  if (!in) throw Error("io_error", "cannot open " + path);
  return read_corpus(in, ontology);
}

void write_corpus(std::ostream& out, const Corpus& corpus) {
  for (const auto& s : corpus.sentences) out << sentence_to_json(s).dump() << '\n';
}

void save_corpus(const std::string& path, const Corpus& corpus) {
  std::ostringstream os;
  write_corpus(os, corpus);
  write_text_file(path, os.str());
}

Corpus split_long_sentences(const Corpus& corpus, int max_len) {
  if (max_len < 2) throw ConfigError("split_long_sentences: max_len must be at least 2");
  Corpus out;
  out.ontology_id = corpus.ontology_id;
  for (const auto& s : corpus.sentences) {
    if (s.length() <= max_len) {
      out.sentences.push_back(s);
      continue;
    }
    int piece = 0;
    for (int begin = 0; begin < s.length(); begin += max_len, ++piece) {
      const int end = std::min(begin + max_len, s.length());
      const TokenSpan window{begin, end};
      auto inside = [&](const TokenSpan& sp) { return sp.start >= begin && sp.end <= end; };
      Sentence p;
      p.doc_id = s.doc_id;
      p.sent_id = s.sent_id + ".p" + std::to_string(piece);
      p.parent_sent_id = s.parent_sent_id.empty() ? s.sent_id : s.parent_sent_id;
      p.language = s.language;
      p.origin_offset = s.origin_offset + begin;
      p.tokens.assign(s.tokens.begin() + begin, s.tokens.begin() + end);
      for (const auto& e : s.entities) {
        if (!inside(e.span)) continue;
        EntityMention m = e;
        m.span = e.span.shifted(-begin);
        if (m.head_index) *m.head_index -= begin;
        p.entities.push_back(m);
      }
      for (const auto& ev : s.events) {
        if (!window.contains(ev.trigger.start)) continue;
        EventMention m;
        m.event_type = ev.event_type;
        m.trigger = TokenSpan{ev.trigger.start, std::min(ev.trigger.end, end)}.shifted(-begin);
        // Clipping can make a crossing trigger coincide with another event.
        auto same = std::find_if(p.events.begin(), p.events.end(), [&](const EventMention& x) {
          return x.trigger == m.trigger && x.event_type == m.event_type;
        });
        EventMention& dest = same == p.events.end() ? m : *same;
        for (const auto& a : ev.arguments) {
          Argument local{a.span.shifted(-begin), a.role, a.score};
          if (inside(a.span) && std::find(dest.arguments.begin(), dest.arguments.end(), local) == dest.arguments.end())
            dest.arguments.push_back(local);
        }
        if (same == p.events.end()) p.events.push_back(std::move(m));
      }
      out.sentences.push_back(std::move(p));
    }
  }
  return out;
}

namespace {

struct Origin {
  std::string sent_id;
  int offset;
};

std::map<std::pair<std::string, std::string>, Origin> origins(const Corpus& corpus) {
  std::map<std::pair<std::string, std::string>, Origin> m;
  for (const auto& s : corpus.sentences)
    m[{s.doc_id, s.sent_id}] = {s.parent_sent_id.empty() ? s.sent_id : s.parent_sent_id, s.origin_offset};
  return m;
}

const Origin& lookup(const std::map<std::pair<std::string, std::string>, Origin>& m, const std::string& doc,
                     const std::string& sent) {
  auto it = m.find({doc, sent});
  if (it == m.end()) throw ValidationError("remap_to_reference: unknown sentence " + doc + "/" + sent);
  return it->second;
}

}  // namespace

std::vector<SpanRef> remap_to_reference(const std::vector<SpanRef>& spans, const Corpus& corpus) {
  const auto m = origins(corpus);
  std::vector<SpanRef> out;
  out.reserve(spans.size());
  for (const auto& r : spans) {
    const Origin& o = lookup(m, r.doc_id, r.sent_id);
    out.push_back({r.doc_id, o.sent_id, r.span.shifted(o.offset)});
  }
  return out;
}

EventSet remap_to_reference(const EventSet& events, const Corpus& corpus) {
  const auto m = origins(corpus);
  EventSet out;
  std::map<std::pair<std::string, std::string>, std::size_t> slot;
  for (const auto& se : events) {
    const Origin& o = lookup(m, se.doc_id, se.sent_id);
    auto [it, fresh] = slot.try_emplace({se.doc_id, o.sent_id}, out.size());
    if (fresh) out.push_back({se.doc_id, o.sent_id, {}});
    auto& dest = out[it->second].events;
    for (const auto& e : se.events) {
      EventMention shifted = e;
      shifted.trigger = e.trigger.shifted(o.offset);
      for (auto& a : shifted.arguments) a.span = a.span.shifted(o.offset);
      dest.push_back(std::move(shifted));
    }
  }
  return out;
}

}  // namespace PRIMEIE_ABI
}  // namespace primeie
