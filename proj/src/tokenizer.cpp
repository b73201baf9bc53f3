#include "primeie/tokenizer.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "json.hpp"
#include "primeie/error.hpp"
#include "primeie/ops.hpp"

namespace primeie {
inline namespace PRIMEIE_ABI {

namespace {

const std::string kSpecialNames[SubwordVocab::kSpecials] = {"[CLS]", "[SEP]", "[PAD]", "[UNK]"};

}  // namespace

SubwordVocab::SubwordVocab(std::vector<std::string> pieces) : pieces_(std::move(pieces)) {
  for (std::size_t i = 0; i < pieces_.size(); ++i) {
    if (pieces_[i].empty()) throw ValidationError("vocab: empty piece at position " + std::to_string(i));
    if (!index_.emplace(pieces_[i], kSpecials + static_cast<int>(i)).second)
      throw ValidationError("vocab: duplicate piece '" + pieces_[i] + "'");
  }
}

int SubwordVocab::find(const std::string& piece) const {
  auto it = index_.find(piece);
  return it == index_.end() ? -1 : it->second;
}

const std::string& SubwordVocab::piece(int id) const {
  if (id < 0 || id >= size()) throw ValidationError("vocab: id " + std::to_string(id) + " out of range");
  return id < kSpecials ? kSpecialNames[id] : pieces_[id - kSpecials];
}

std::string SubwordVocab::to_json() const {
  nlohmann::ordered_json j;
  j["pieces"] = pieces_;
  return j.dump() + "\n";
}

SubwordVocab SubwordVocab::from_json(const std::string& text) {
  try {
    return SubwordVocab(nlohmann::json::parse(text).at("pieces").get<std::vector<std::string>>());
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("vocab: ") + e.what());
  }
}

std::vector<std::string> utf8_chars(const std::string& s) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < s.size();) {
    const auto c = static_cast<unsigned char>(s[i]);
    std::size_t n = c < 0x80 ? 1 : (c >> 5) == 0x6 ? 2 : (c >> 4) == 0xE ? 3 : (c >> 3) == 0x1E ? 4 : 1;
    if (i + n > s.size()) n = 1;
    for (std::size_t k = 1; k < n; ++k)
      if ((static_cast<unsigned char>(s[i + k]) & 0xC0) != 0x80) n = 1;
    out.push_back(s.substr(i, n));
    i += n;
  }
  return out;
}

SubwordVocab build_vocab(const Corpus& corpus, int target_size, std::uint64_t /*seed*/,
                         const std::vector<std::string>& reserved) {
  if (target_size < 1) throw ConfigError("build_vocab: target_size must be at least 1");
  if (corpus.sentences.empty()) throw ConfigError("build_vocab: corpus is empty");
  std::map<std::string, long> freq;
  std::set<std::string> chars;
  for (const auto& s : corpus.sentences)
    for (const auto& w : s.tokens) {
      ++freq[w];
      for (auto& c : utf8_chars(w)) chars.insert(std::move(c));
    }
  std::vector<std::pair<std::string, long>> ranked(freq.begin(), freq.end());
  std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) { return a.second > b.second; });

  std::vector<std::string> pieces;
  std::set<std::string> have;
  auto push = [&](const std::string& p) {
    if (!p.empty() && have.insert(p).second) pieces.push_back(p);
  };
  for (const auto& r : reserved) push(r);
  for (std::size_t i = 0; i < ranked.size() && i < static_cast<std::size_t>(target_size); ++i) push(ranked[i].first);
  for (const auto& c : chars) push(c);
  for (const auto& c : chars) push(SubwordVocab::kContinuation + c);
  return SubwordVocab(std::move(pieces));
}

std::vector<int> encode_word(const SubwordVocab& vocab, const std::string& word) {
  std::vector<int> out;
  if (const int whole = vocab.find(word); whole >= 0) {
    out.push_back(whole);
    return out;
  }
  const auto chars = utf8_chars(word);
  std::size_t pos = 0;
  while (pos < chars.size()) {
    const std::string prefix = pos == 0 ? "" : SubwordVocab::kContinuation;
    std::string candidate = prefix;
    for (std::size_t k = pos; k < chars.size(); ++k) candidate += chars[k];
    int hit = -1;
    std::size_t end = chars.size();
    for (; end > pos; --end) {
      hit = vocab.find(candidate);
      if (hit >= 0) break;
      candidate.resize(candidate.size() - chars[end - 1].size());
    }
    if (hit >= 0) {
      out.push_back(hit);
      pos = end;
    } else {
      out.push_back(SubwordVocab::kUnk);
      ++pos;
    }
  }
  return out;
}

EncodedInput encode_input(const SubwordVocab& vocab, const std::vector<std::string>& prime_words,
                          const std::vector<std::string>& sentence_words) {
  if (sentence_words.empty()) throw ValidationError("encode_input: sentence is empty");
  EncodedInput in;
  in.ids.push_back(SubwordVocab::kCls);
  if (!prime_words.empty()) {
    const int begin = static_cast<int>(in.ids.size());
    for (const auto& w : prime_words)
      for (int id : encode_word(vocab, w)) in.ids.push_back(id);
    in.alignment.prime_pieces = {begin, static_cast<int>(in.ids.size())};
    in.ids.push_back(SubwordVocab::kSep);
  }
  in.segments.assign(in.ids.size(), 0);
  const int seg = prime_words.empty() ? 0 : 1;
  in.alignment.word_to_pieces.reserve(sentence_words.size());
  for (const auto& w : sentence_words) {
    const int begin = static_cast<int>(in.ids.size());
    for (int id : encode_word(vocab, w)) in.ids.push_back(id);
    in.alignment.word_to_pieces.push_back({begin, static_cast<int>(in.ids.size())});
  }
  in.ids.push_back(SubwordVocab::kSep);
  in.segments.resize(in.ids.size(), seg);
  return in;
}

std::string detokenize(const SubwordVocab& vocab, const std::vector<int>& ids) {
  std::string out;
  const std::string& cont = SubwordVocab::kContinuation;
  for (int id : ids) {
    const std::string& p = vocab.piece(id);
    if (id >= SubwordVocab::kSpecials && p.size() > cont.size() && p.compare(0, cont.size(), cont) == 0 &&
        !out.empty()) {
      out += p.substr(cont.size());
    } else {
      if (!out.empty()) out += ' ';
      out += p;
    }
  }
  return out;
}

namespace {

void check_alignment(int pieces, const Alignment& alignment) {
  for (const auto& [b, e] : alignment.word_to_pieces)
    if (b < 0 || b >= e || e > pieces)
      throw ShapeError("pool_word_vectors: range [" + std::to_string(b) + "," + std::to_string(e) +
                       ") does not fit " + std::to_string(pieces) + " piece vectors");
}

}  // namespace

Tensor pool_word_vectors(const Tensor& vectors, const Alignment& alignment) {
  check_alignment(vectors.rows(), alignment);
  const int d = vectors.cols();
  Tensor out(static_cast<int>(alignment.word_to_pieces.size()), d);
  for (std::size_t w = 0; w < alignment.word_to_pieces.size(); ++w) {
    const auto [b, e] = alignment.word_to_pieces[w];
    for (int p = b; p < e; ++p)
      for (int c = 0; c < d; ++c) out.at(static_cast<int>(w), c) += vectors.at(p, c);
    for (int c = 0; c < d; ++c) out.at(static_cast<int>(w), c) /= static_cast<Real>(e - b);
  }
  return out;
}

Var pool_word_vectors(Graph& g, Var vectors, const Alignment& alignment) {
  check_alignment(g.rows(vectors), alignment);
  return segment_mean(g, vectors, alignment.word_to_pieces);
}

}  // namespace PRIMEIE_ABI
}  // namespace primeie
