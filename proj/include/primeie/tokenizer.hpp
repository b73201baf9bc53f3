#pragma once

#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "primeie/corpus.hpp"
#include "primeie/graph.hpp"
#include "primeie/tensor.hpp"

namespace primeie {
inline namespace PRIMEIE_ABI {

/// Word-plus-character subword vocabulary. Ids 0-3 are the specials;
/// `pieces` holds the remaining pieces in id order starting at 4.
class SubwordVocab {
 public:
  static constexpr int kCls = 0;
  static constexpr int kSep = 1;
  static constexpr int kPad = 2;
  static constexpr int kUnk = 3;
  static constexpr int kSpecials = 4;
  static inline const std::string kContinuation = "##";

  SubwordVocab() = default;
  explicit SubwordVocab(std::vector<std::string> pieces);

  int size() const { return kSpecials + static_cast<int>(pieces_.size()); }
  /// Id of a non-special piece, or -1.
  int find(const std::string& piece) const;
  const std::string& piece(int id) const;
  const std::vector<std::string>& pieces() const { return pieces_; }

  std::string to_json() const;
  static SubwordVocab from_json(const std::string& text);

 private:
  std::vector<std::string> pieces_;
  std::unordered_map<std::string, int> index_;
};

/// Specials, then `reserved` pieces in the given order, then the
/// `target_size` most frequent words (ties lexicographic), then every
/// observed character as an initial piece and as a "##" continuation.
/// The seed is accepted for interface stability; the result does not
/// depend on it.
SubwordVocab build_vocab(const Corpus& corpus, int target_size, std::uint64_t seed,
                         const std::vector<std::string>& reserved = {";"});

/// Greedy longest-match-first segmentation over UTF-8 characters. An
/// unseen character becomes one UNK.
std::vector<int> encode_word(const SubwordVocab& vocab, const std::string& word);

using PieceRange = std::pair<int, int>;

struct Alignment {
  /// Half-open piece range of each sentence word, in sequence positions.
  std::vector<PieceRange> word_to_pieces;
  /// Piece range of the prime segment; empty when there is no prime.
  PieceRange prime_pieces{0, 0};
};

struct EncodedInput {
  std::vector<int> ids;
  std::vector<int> segments;
  Alignment alignment;
};

/// CLS prime SEP sentence SEP, or CLS sentence SEP for an empty prime.
EncodedInput encode_input(const SubwordVocab& vocab, const std::vector<std::string>& prime_words,
                          const std::vector<std::string>& sentence_words);

/// Whitespace-joined pieces with continuations glued to their predecessor.
std::string detokenize(const SubwordVocab& vocab, const std::vector<int>& ids);

/// Mean of each word's piece rows.
Tensor pool_word_vectors(const Tensor& vectors, const Alignment& alignment);
Var pool_word_vectors(Graph& g, Var vectors, const Alignment& alignment);

/// Splits a UTF-8 string into characters (malformed bytes stand alone).
std::vector<std::string> utf8_chars(const std::string& s);

}  // namespace PRIMEIE_ABI
}  // namespace primeie
