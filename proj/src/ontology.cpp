#include "primeie/ontology.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "primeie/error.hpp"
#include "primeie/json_io.hpp"

namespace primeie {
inline namespace PRIMEIE_ABI {

using ojson = nlohmann::ordered_json;

namespace {

bool is_positive_decimal(const std::string& s) {
  if (s.empty() || s[0] == '0') return false;
  return std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; });
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

ojson body_json(const Ontology& o) {
  ojson j;
  j["event_types"] = o.event_types;
  ojson roles = ojson::object();
  for (const auto& t : o.event_types) roles[t] = o.roles_of(t);
  j["roles_for"] = roles;
  ojson codes = ojson::object();
  for (const auto& r : o.all_roles()) codes[r] = o.code_of(r);
  j["role_code"] = codes;
  j["entity_types"] = o.entity_types;
  ojson triples = ojson::array();
  for (const auto& t : o.legal_triples) triples.push_back({t.entity_type, t.event_type, t.role});
  j["legal_triples"] = triples;
  return j;
}

}  // namespace

void Ontology::validate() const {
  std::set<std::string> seen_types;
  for (const auto& t : event_types)
    if (!seen_types.insert(t).second) throw ValidationError("ontology: duplicate event type '" + t + "'");
  for (const auto& [t, roles] : roles_for) {
    if (!seen_types.count(t)) throw ValidationError("ontology: roles_for names unknown event type '" + t + "'");
    std::set<std::string> uniq(roles.begin(), roles.end());
    if (uniq.size() != roles.size()) throw ValidationError("ontology: duplicate role for event type '" + t + "'");
    for (const auto& r : roles)
      if (!role_code.count(r)) throw ValidationError("ontology: role '" + r + "' has no role_code entry");
  }
  std::set<std::string> codes;
  for (const auto& [role, code] : role_code) {
    if (!is_positive_decimal(code))
      throw ValidationError("ontology: role_code of '" + role + "' is not a positive decimal integer: '" + code + "'");
    if (!codes.insert(code).second) throw ValidationError("ontology: role_code '" + code + "' is not unique");
  }
  std::set<std::string> entities;
  for (const auto& e : entity_types)
    if (!entities.insert(e).second) throw ValidationError("ontology: duplicate entity type '" + e + "'");
  for (const auto& t : legal_triples) {
    if (!entities.count(t.entity_type))
      throw ValidationError("ontology: legal triple names unknown entity type '" + t.entity_type + "'");
    if (!seen_types.count(t.event_type))
      throw ValidationError("ontology: legal triple names unknown event type '" + t.event_type + "'");
    if (!allows_role(t.event_type, t.role))
      throw ValidationError("ontology: legal triple role '" + t.role + "' not in roles_for[" + t.event_type + "]");
  }
}

bool Ontology::has_event_type(const std::string& t) const {
  return std::find(event_types.begin(), event_types.end(), t) != event_types.end();
}

bool Ontology::has_entity_type(const std::string& t) const {
  return std::find(entity_types.begin(), entity_types.end(), t) != entity_types.end();
}

bool Ontology::allows_role(const std::string& event_type, const std::string& role) const {
  const auto& roles = roles_of(event_type);
  return std::find(roles.begin(), roles.end(), role) != roles.end();
}

bool Ontology::is_legal(const std::string& entity_type, const std::string& event_type, const std::string& role) const {
  return legal_triples.count({entity_type, event_type, role}) > 0;
}

const std::vector<std::string>& Ontology::roles_of(const std::string& event_type) const {
  static const std::vector<std::string> kEmpty;
  auto it = roles_for.find(event_type);
  return it == roles_for.end() ? kEmpty : it->second;
}

const std::string& Ontology::code_of(const std::string& role) const {
  auto it = role_code.find(role);
  if (it == role_code.end()) throw ValidationError("ontology: role '" + role + "' has no role_code entry");
  return it->second;
}

int Ontology::event_type_index(const std::string& t) const {
  auto it = std::find(event_types.begin(), event_types.end(), t);
  return it == event_types.end() ? -1 : static_cast<int>(it - event_types.begin());
}

int Ontology::entity_type_index(const std::string& t) const {
  auto it = std::find(entity_types.begin(), entity_types.end(), t);
  return it == entity_types.end() ? -1 : static_cast<int>(it - entity_types.begin());
}

std::vector<std::string> Ontology::all_roles() const {
  std::vector<std::string> roles;
  for (const auto& [r, c] : role_code) roles.push_back(r);
  std::sort(roles.begin(), roles.end(), [this](const std::string& a, const std::string& b) {
    const std::string& ca = role_code.at(a);
    const std::string& cb = role_code.at(b);
    return ca.size() != cb.size() ? ca.size() < cb.size() : ca < cb;
  });
  return roles;
}

Ontology parse_ontology(const std::string& text) {
  ojson j;
  try {
    j = ojson::parse(text);
  } catch (const std::exception& e) {
    throw ParseError(std::string("ontology: ") + e.what());
  }
  Ontology o;
  try {
    o.event_types = j.at("event_types").get<std::vector<std::string>>();
    for (const auto& [t, roles] : j.at("roles_for").items()) o.roles_for[t] = roles.get<std::vector<std::string>>();
    if (j.contains("role_code"))
      for (const auto& [r, code] : j["role_code"].items())
        o.role_code[r] = code.is_string() ? code.get<std::string>() : std::to_string(code.get<long>());
    o.entity_types = j.value("entity_types", std::vector<std::string>{});
    for (const auto& t : j.value("legal_triples", ojson::array())) {
      if (t.is_array())
        o.legal_triples.insert({t.at(0).get<std::string>(), t.at(1).get<std::string>(), t.at(2).get<std::string>()});
      else
        o.legal_triples.insert({t.at("entity_type").get<std::string>(), t.at("event_type").get<std::string>(),
                                t.at("role").get<std::string>()});
    }
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    throw ParseError(std::string("ontology: ") + e.what());
  }

  long next = 1;
  for (const auto& [r, code] : o.role_code)
    if (is_positive_decimal(code) && code.size() < 10) next = std::max(next, std::stol(code) + 1);
  for (const auto& t : o.event_types)
    for (const auto& r : o.roles_of(t))
      if (!o.role_code.count(r)) o.role_code[r] = std::to_string(next++);

  if (j.contains("id")) {
    o.id = j["id"].get<std::string>();
  } else {
    char buf[32];
    std::snprintf(buf, sizeof buf, "fnv1a64:%016llx", static_cast<unsigned long long>(fnv1a(body_json(o).dump())));
    o.id = buf;
  }
  o.validate();
  return o;
}

Ontology load_ontology(const std::string& path) { return parse_ontology(read_text_file(path)); }

std::string ontology_to_string(const Ontology& ontology) {
  ojson j;
  j["id"] = ontology.id;
  const ojson body = body_json(ontology);
  for (const auto& [k, v] : body.items()) j[k] = v;
  return j.dump(2) + "\n";
}

void save_ontology(const std::string& path, const Ontology& ontology) {
  write_text_file(path, ontology_to_string(ontology));
}

}  // namespace PRIMEIE_ABI
}  // namespace primeie
