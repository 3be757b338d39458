#include "reviewlab/dedup.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <tuple>
#include <unordered_map>
#include <unordered_set>
#include <utility>

#include "reviewlab/parallel.hpp"
#include "reviewlab/stats.hpp"

namespace reviewlab::dedup {
namespace {

bool is_terminator(char c) { return c == '.' || c == '!' || c == '?'; }

bool is_blank(const std::string& s) {
  return std::all_of(s.begin(), s.end(),
                     [](unsigned char c) { return std::isspace(c); });
}

double jaccard(const std::vector<std::string>& a,
               const std::vector<std::string>& b) {
  // Inputs are sorted unique token sets.
  std::size_t i = 0, j = 0, inter = 0;
  while (i < a.size() && j < b.size()) {
    const int cmp = a[i].compare(b[j]);
    if (cmp == 0) {
      ++inter;
      ++i;
      ++j;
    } else if (cmp < 0) {
      ++i;
    } else {
      ++j;
    }
  }
  const std::size_t uni = a.size() + b.size() - inter;
  if (uni == 0) return 1.0;  // both empty
  return static_cast<double>(inter) / static_cast<double>(uni);
}

std::vector<std::string> token_set(const TokenSeq& tokens) {
  std::vector<std::string> set(tokens);
  std::sort(set.begin(), set.end());
  set.erase(std::unique(set.begin(), set.end()), set.end());
  return set;
}

// Directed match fraction: sentences of `from` with a near-duplicate in `to`.
double match_fraction(const SentenceSet& from, const SentenceSet& to) {
  std::size_t matched = 0;
  for (const TokenSeq& s : from.sentences) {
    for (const TokenSeq& t : to.sentences) {
      if (sentence_near_duplicate(s, t)) {
        ++matched;
        break;
      }
    }
  }
  return static_cast<double>(matched) /
         static_cast<double>(from.sentences.size());
}

}  // namespace

std::vector<std::string> split_sentences(const std::string& text) {
  std::vector<std::string> sentences;
  std::string current;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (c == '\n') {
      if (!is_blank(current)) sentences.push_back(current);
      current.clear();
      continue;
    }
    current.push_back(c);
    if (is_terminator(c)) {
      const bool at_end = i + 1 == text.size();
      const bool before_space =
          !at_end && std::isspace(static_cast<unsigned char>(text[i + 1]));
      if (at_end || before_space) {
        if (!is_blank(current)) sentences.push_back(current);
        current.clear();
      }
    }
  }
  if (!is_blank(current)) sentences.push_back(current);
  // Trim leading whitespace left over from inter-sentence gaps.
  for (std::string& s : sentences) {
    const std::size_t start = s.find_first_not_of(" \t\r");
    if (start != std::string::npos && start > 0) s.erase(0, start);
  }
  return sentences;
}

TokenSeq normalize_sentence(const std::string& sentence) {
  TokenSeq tokens;
  std::string current;
  auto flush = [&] {
    if (!current.empty() &&
        current.find_first_not_of('\'') != std::string::npos)
      tokens.push_back(current);
    current.clear();
  };
  const std::size_t n = sentence.size();
  for (std::size_t i = 0; i < n; ++i) {
    const unsigned char c = static_cast<unsigned char>(sentence[i]);
    if (std::isalnum(c)) {
      current.push_back(static_cast<char>(std::tolower(c)));
    } else if (c == '\'') {
      // Keep apostrophes attached to a word on either side ("don't", "'n").
      const bool prev_alnum =
          i > 0 && std::isalnum(static_cast<unsigned char>(sentence[i - 1]));
      const bool next_alnum =
          i + 1 < n && std::isalnum(static_cast<unsigned char>(sentence[i + 1]));
      if (prev_alnum || next_alnum)
        current.push_back('\'');
      else
        flush();
    } else {
      flush();
    }
  }
  flush();
  return tokens;
}

std::uint64_t fingerprint(const TokenSeq& tokens) {
  // FNV-1a over the tokens with a separator byte, so ["ab","c"] and
  // ["a","bc"] hash differently.
  std::uint64_t h = 0xcbf29ce484222325ULL;
  constexpr std::uint64_t kPrime = 0x100000001b3ULL;
  for (const std::string& token : tokens) {
    for (unsigned char c : token) {
      h ^= c;
      h *= kPrime;
    }
    h ^= 0x1f;
    h *= kPrime;
  }
  return h;
}

bool sentence_near_duplicate(const TokenSeq& s1, const TokenSeq& s2) {
  if (s1 == s2) return true;
  return jaccard(token_set(s1), token_set(s2)) >= 0.8;
}

SentenceSet make_sentence_set(const Review& review) {
  SentenceSet set;
  set.review_id = review.review_id;
  for (const std::string& raw : split_sentences(review.text)) {
    TokenSeq tokens = normalize_sentence(raw);
    if (tokens.empty()) continue;
    set.fingerprints.push_back(fingerprint(tokens));
    set.sentences.push_back(std::move(tokens));
  }
  return set;
}

double pair_similarity(const SentenceSet& r1, const SentenceSet& r2) {
  if (r1.sentences.empty() || r2.sentences.empty()) return 0.0;
  if (r1.sentences.size() < r2.sentences.size()) return match_fraction(r1, r2);
  if (r2.sentences.size() < r1.sentences.size()) return match_fraction(r2, r1);
  // Equal lengths: take the better direction so the measure stays symmetric.
  return std::max(match_fraction(r1, r2), match_fraction(r2, r1));
}

std::vector<PlagiarizedPair> find_plagiarized_pairs(const Corpus& corpus,
                                                    double threshold,
                                                    int n_threads) {
  if (threshold <= 0.0 || threshold > 1.0)
    throw std::invalid_argument("find_plagiarized_pairs: threshold in (0,1]");
  std::vector<PlagiarizedPair> result;
  if (corpus.reviews.empty()) return result;

  const std::size_t n = corpus.reviews.size();
  std::vector<SentenceSet> sets(n);
  parallel_for(n, n_threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i)
      sets[i] = make_sentence_set(corpus.reviews[i]);
  });

  // Inverted index: sentence fingerprint -> reviews containing it.
  std::unordered_map<std::uint64_t, std::vector<std::uint32_t>> index;
  for (std::size_t i = 0; i < n; ++i) {
    std::unordered_set<std::uint64_t> unique(sets[i].fingerprints.begin(),
                                             sets[i].fingerprints.end());
    for (std::uint64_t fp : unique)
      index[fp].push_back(static_cast<std::uint32_t>(i));
  }

  std::vector<std::pair<std::uint32_t, std::uint32_t>> candidates;
  {
    std::unordered_set<std::uint64_t> seen;
    for (const auto& [fp, members] : index) {
      for (std::size_t x = 0; x < members.size(); ++x) {
        for (std::size_t y = x + 1; y < members.size(); ++y) {
          std::uint32_t lo = members[x], hi = members[y];
          if (lo > hi) std::swap(lo, hi);
          if (corpus.reviews[lo].product_id == corpus.reviews[hi].product_id)
            continue;
          const std::uint64_t key =
              (static_cast<std::uint64_t>(lo) << 32) | hi;
          if (seen.insert(key).second) candidates.emplace_back(lo, hi);
        }
      }
    }
  }
  // Canonical candidate order; verification writes by index, so the outcome
  // is schedule-independent.
  std::sort(candidates.begin(), candidates.end());

  std::vector<double> similarity(candidates.size(), 0.0);
  parallel_for(candidates.size(), n_threads,
               [&](std::size_t begin, std::size_t end) {
                 for (std::size_t k = begin; k < end; ++k) {
                   const auto [i, j] = candidates[k];
                   similarity[k] = pair_similarity(sets[i], sets[j]);
                 }
               });

  const auto products = stats::product_stats(corpus);
  auto fill_side = [&](const Review& r, double& abs_dev, double& signed_dev,
                       double& ratio, int& helpful, int& total) {
    const double avg = products.at(r.product_id).computed_star_average;
    const double dev = r.star_rating - avg;
    signed_dev = stats::round_half_away(dev);
    abs_dev = stats::round_half_away(std::fabs(dev));
    ratio = r.total_votes > 0 ? static_cast<double>(r.helpful_votes) /
                                    static_cast<double>(r.total_votes)
                              : 0.0;
    helpful = r.helpful_votes;
    total = r.total_votes;
  };

  for (std::size_t k = 0; k < candidates.size(); ++k) {
    if (similarity[k] < threshold) continue;
    auto [i, j] = candidates[k];
    const Review* ra = &corpus.reviews[i];
    const Review* rb = &corpus.reviews[j];
    if (rb->review_id < ra->review_id) std::swap(ra, rb);
    PlagiarizedPair pair;
    pair.review_a = ra->review_id;
    pair.review_b = rb->review_id;
    pair.similarity = similarity[k];
    fill_side(*ra, pair.abs_dev_a, pair.signed_dev_a, pair.ratio_a,
              pair.helpful_a, pair.total_a);
    fill_side(*rb, pair.abs_dev_b, pair.signed_dev_b, pair.ratio_b,
              pair.helpful_b, pair.total_b);
    result.push_back(std::move(pair));
  }
  std::sort(result.begin(), result.end(),
            [](const PlagiarizedPair& x, const PlagiarizedPair& y) {
              return std::tie(x.review_a, x.review_b) <
                     std::tie(y.review_a, y.review_b);
            });
  return result;
}

}  // namespace reviewlab::dedup
