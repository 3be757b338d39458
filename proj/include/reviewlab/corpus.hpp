#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace reviewlab {

/// One product review with its helpfulness annotation ("a of b people
/// found the following review helpful").
struct Review {
  std::string review_id;
  std::string product_id;
  int star_rating = 0;       // integer stars in [1,5]
  int helpful_votes = 0;     // the "a"
  int total_votes = 0;       // the "b"
  std::string text;          // may be empty for stats-only datasets
  std::optional<std::string> version_group;  // groups alternate editions

  bool operator==(const Review&) const = default;
};

struct Corpus {
  std::vector<Review> reviews;
  std::string label;

  bool operator==(const Corpus&) const = default;
};

enum class SourceFormat { kJsonl, kCsv };

/// Malformed input. Carries the 1-based record line and the offending field
/// so CLI diagnostics can point at the exact problem.
class CorpusError : public std::runtime_error {
 public:
  CorpusError(std::size_t line, std::string field, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ", field '" +
                           field + "': " + what),
        line_(line),
        field_(std::move(field)) {}

  std::size_t line() const { return line_; }
  const std::string& field() const { return field_; }

 private:
  std::size_t line_;
  std::string field_;
};

/// Validates a single record's invariants; throws CorpusError on violation.
void validate_review(const Review& review, std::size_t line);

/// Parses a JSONL or CSV review stream. Record order is preserved.
/// Throws CorpusError for malformed records, invariant violations
/// (helpful_votes > total_votes, star_rating outside [1,5]) and duplicate
/// review ids. An empty source yields an empty corpus.
Corpus load_reviews(std::istream& source, SourceFormat format,
                    std::string label = {});

/// Writes the corpus in the JSONL schema accepted by load_reviews.
void save_jsonl(const Corpus& corpus, std::ostream& out);

/// Keeps exactly the reviews with total_votes >= min_votes.
Corpus filter_min_votes(const Corpus& corpus, int min_votes);

/// Collapses mechanical cross-postings: among reviews sharing a
/// version_group, identical normalized text and identical star rating, only
/// the copy with the largest total_votes survives (ties: smallest
/// review_id). Reviews without a version_group are never collapsed.
Corpus dedup_mechanical(const Corpus& corpus);

}  // namespace reviewlab
