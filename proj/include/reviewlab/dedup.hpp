#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "reviewlab/corpus.hpp"

namespace reviewlab::dedup {

using TokenSeq = std::vector<std::string>;

/// A review's text reduced to normalized sentences plus one 64-bit
/// fingerprint per sentence. Fingerprints are a pure function of the text.
struct SentenceSet {
  std::string review_id;
  std::vector<TokenSeq> sentences;
  std::vector<std::uint64_t> fingerprints;  // parallel to sentences
};

/// Two reviews of different products with near-complete textual overlap,
/// together with the contextual statistics of each copy.
struct PlagiarizedPair {
  std::string review_a;  // review_a < review_b lexicographically
  std::string review_b;
  double similarity = 0.0;
  double abs_dev_a = 0.0, abs_dev_b = 0.0;        // rounded to 0.5
  double signed_dev_a = 0.0, signed_dev_b = 0.0;  // rounded to 0.5
  double ratio_a = 0.0, ratio_b = 0.0;
  int helpful_a = 0, total_a = 0;
  int helpful_b = 0, total_b = 0;
};

/// Splits on '.', '!' or '?' followed by whitespace or end-of-text, and on
/// newlines. Empty segments are discarded; text without terminators is one
/// sentence.
std::vector<std::string> split_sentences(const std::string& text);

/// Lowercases, strips non-alphanumerics except apostrophes adjacent to a
/// letter or digit, collapses whitespace. Returns the word tokens.
TokenSeq normalize_sentence(const std::string& sentence);

/// 64-bit hash of a normalized token sequence (order-sensitive).
std::uint64_t fingerprint(const TokenSeq& tokens);

/// True iff the token-set Jaccard similarity is >= 0.8 or the sequences are
/// identical (two empty sequences are identical).
bool sentence_near_duplicate(const TokenSeq& s1, const TokenSeq& s2);

SentenceSet make_sentence_set(const Review& review);

/// Fraction of the shorter review's sentences that have at least one
/// near-duplicate sentence in the other review. Symmetric; when the two
/// reviews have equally many sentences the larger of the two directions is
/// taken. Empty-text reviews score 0.
double pair_similarity(const SentenceSet& r1, const SentenceSet& r2);

/// Enumerates all cross-product review pairs with pair_similarity >=
/// threshold. Candidates are generated through an inverted index from
/// sentence fingerprint to reviews, so only pairs sharing at least one
/// verbatim sentence are scored; same-product pairs are excluded before
/// scoring. Output is sorted by (review_a, review_b).
std::vector<PlagiarizedPair> find_plagiarized_pairs(const Corpus& corpus,
                                                    double threshold = 0.70,
                                                    int n_threads = 0);

}  // namespace reviewlab::dedup
