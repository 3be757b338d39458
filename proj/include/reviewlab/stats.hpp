#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "reviewlab/corpus.hpp"

namespace reviewlab::stats {

/// Per-product aggregate over the corpus: mean star rating and the
/// population variance of the star ratings.
struct ProductStats {
  std::string product_id;
  std::int64_t review_count = 0;
  double computed_star_average = 0.0;
  double star_variance = 0.0;
};

struct DeviationRecord {
  std::string review_id;
  double signed_deviation = 0.0;   // star_rating - computed_star_average
  double helpfulness_ratio = 0.0;  // helpful_votes / total_votes
  double variance_bin = 0.0;       // product variance rounded to nearest 0.5
};

enum class CurveMode { kSigned, kAbsolute };

struct BinStats {
  std::int64_t count = 0;
  double q25 = 0.0;
  double median = 0.0;
  double q75 = 0.0;
  bool low_data = false;  // bin holds <= 0.1% of the curve's data
};

/// Quantile statistics of the helpfulness ratio, keyed by deviation bin
/// (multiples of 0.5).
struct BinnedCurve {
  CurveMode mode = CurveMode::kSigned;
  std::map<double, BinStats> bins;
};

struct CorpusSummary {
  std::string label;
  std::int64_t total_reviews = 0;
  std::optional<double> avg_helpfulness_ratio;  // empty for an empty corpus
  std::optional<double> avg_star_variance;
};

/// Rounds to the nearest multiple of 0.5, ties away from zero.
/// Used for deviations.
double round_half_away(double x);

/// Rounds to the nearest multiple of 0.5, ties upward. Used for variances.
double round_half_up(double x);

/// Linear interpolation between order statistics of a sorted sample.
/// q in [0,1]; position q*(n-1).
double interpolated_quantile(const std::vector<double>& sorted, double q);

std::map<std::string, ProductStats> product_stats(const Corpus& corpus);

/// helpful_votes / total_votes. Throws std::domain_error when
/// total_votes == 0 (such reviews must have been filtered out).
double helpfulness_ratio(const Review& review);

/// Builds the deviation/helpfulness curve. The corpus must already be
/// filtered to total_votes >= 10 (throws std::invalid_argument otherwise).
/// When variance_bin is given, only reviews of products in that bin
/// contribute; an empty selection yields an empty curve.
BinnedCurve deviation_curve(const Corpus& corpus, CurveMode mode,
                            std::optional<double> variance_bin = {});

/// Splits the corpus by product star-variance bin (nearest 0.5, ties up);
/// all of a product's reviews travel with it.
std::map<double, Corpus> variance_partition(const Corpus& corpus);

/// Whole-corpus summary. Requires total_votes >= 10 throughout
/// (throws std::invalid_argument otherwise); an empty corpus yields
/// total_reviews = 0 with both averages unset.
CorpusSummary summarize_corpus(const Corpus& corpus);

}  // namespace reviewlab::stats
