#include "primeie/json_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "primeie/error.hpp"

namespace primeie {
inline namespace PRIMEIE_ABI {

using ojson = nlohmann::ordered_json;

namespace {

TokenSpan span_from(const nlohmann::json& j) { return {j.at("start").get<int>(), j.at("end").get<int>()}; }

}  // namespace

ojson event_to_json(const EventMention& e, bool with_scores) {
  ojson j;
  j["trigger"] = {{"start", e.trigger.start}, {"end", e.trigger.end}};
  j["event_type"] = e.event_type;
  if (with_scores) j["score"] = e.score;
  ojson args = ojson::array();
  for (const auto& a : e.arguments) {
    ojson aj = {{"start", a.span.start}, {"end", a.span.end}, {"role", a.role}};
    if (with_scores) aj["score"] = a.score;
    args.push_back(aj);
  }
  j["arguments"] = args;
  return j;
}

EventMention event_from_json(const nlohmann::json& j) {
  EventMention e;
  e.trigger = span_from(j.at("trigger"));
  e.event_type = j.at("event_type").get<std::string>();
  e.score = j.value("score", 0.0);
  for (const auto& a : j.value("arguments", nlohmann::json::array()))
    e.arguments.push_back({span_from(a), a.at("role").get<std::string>(), a.value("score", 0.0)});
  return e;
}

ojson sentence_to_json(const Sentence& s) {
  ojson j;
  j["doc_id"] = s.doc_id;
  j["sent_id"] = s.sent_id;
  j["language"] = s.language;
  j["tokens"] = s.tokens;
  ojson ents = ojson::array();
  for (const auto& e : s.entities) {
    ojson ej = {{"start", e.span.start}, {"end", e.span.end}, {"entity_type", e.entity_type}};
    if (e.head_index) ej["head_index"] = *e.head_index;
    ents.push_back(ej);
  }
  j["entities"] = ents;
  ojson evs = ojson::array();
  for (const auto& e : s.events) evs.push_back(event_to_json(e, false));
  j["events"] = evs;
  if (s.origin_offset != 0) j["origin_offset"] = s.origin_offset;
  if (!s.parent_sent_id.empty()) j["parent_sent_id"] = s.parent_sent_id;
  return j;
}

Sentence sentence_from_json(const nlohmann::json& j) {
  Sentence s;
  s.doc_id = j.at("doc_id").get<std::string>();
  s.sent_id = j.at("sent_id").get<std::string>();
  s.language = j.value("language", std::string());
  s.tokens = j.at("tokens").get<std::vector<std::string>>();
  for (const auto& e : j.value("entities", nlohmann::json::array())) {
    EntityMention m{span_from(e), e.at("entity_type").get<std::string>(), std::nullopt};
    if (e.contains("head_index") && !e["head_index"].is_null()) m.head_index = e["head_index"].get<int>();
    s.entities.push_back(m);
  }
  for (const auto& e : j.value("events", nlohmann::json::array())) s.events.push_back(event_from_json(e));
  s.origin_offset = j.value("origin_offset", 0);
  s.parent_sent_id = j.value("parent_sent_id", std::string());
  return s;
}

void write_predictions(std::ostream& out, const EventSet& events) {
  for (const auto& se : events) {
    ojson j;
    j["doc_id"] = se.doc_id;
    j["sent_id"] = se.sent_id;
    ojson evs = ojson::array();
    for (const auto& e : se.events) evs.push_back(event_to_json(e, true));
    j["events"] = evs;
    out << j.dump() << '\n';
  }
}

void save_predictions(const std::string& path, const EventSet& events) {
  std::ostringstream os;
  write_predictions(os, events);
  write_text_file(path, os.str());
}

EventSet read_predictions(std::istream& in) {
  EventSet out;
  std::string line;
  long lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      auto j = nlohmann::json::parse(line);
      SentenceEvents se{j.at("doc_id").get<std::string>(), j.at("sent_id").get<std::string>(), {}};
      for (const auto& e : j.value("events", nlohmann::json::array())) se.events.push_back(event_from_json(e));
      out.push_back(std::move(se));
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(e.what(), lineno);
    }
  }
  return out;
}

EventSet load_predictions(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("io_error", "cannot open " + path);
  return read_predictions(in);
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("io_error", "cannot open " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("io_error", "cannot write " + tmp);
    out << content;
    if (!out) throw Error("io_error", "write failed for " + tmp);
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0) throw Error("io_error", "cannot rename " + tmp + " to " + path);
}

}  // namespace PRIMEIE_ABI
}  // namespace primeie
