#pragma once

#include "json.hpp"
#include "primeie/corpus.hpp"

namespace primeie {
inline namespace PRIMEIE_ABI {

nlohmann::ordered_json sentence_to_json(const Sentence& s);
Sentence sentence_from_json(const nlohmann::json& j);
/// `with_scores` adds trigger and argument scores (prediction files).
nlohmann::ordered_json event_to_json(const EventMention& e, bool with_scores);
EventMention event_from_json(const nlohmann::json& j);

/// Prediction file: one {doc_id, sent_id, events} object per line.
void write_predictions(std::ostream& out, const EventSet& events);
void save_predictions(const std::string& path, const EventSet& events);
EventSet read_predictions(std::istream& in);
EventSet load_predictions(const std::string& path);

std::string read_text_file(const std::string& path);
/// Writes via a temporary file and rename.
void write_text_file(const std::string& path, const std::string& content);

}  // namespace PRIMEIE_ABI
}  // namespace primeie
