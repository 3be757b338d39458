#include "reviewlab/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace reviewlab::stats {
namespace {

void require_min_votes(const Corpus& corpus, int min_votes,
                       const char* op_name) {
  for (const Review& r : corpus.reviews) {
    if (r.total_votes < min_votes)
      throw std::invalid_argument(
          std::string(op_name) + ": corpus must be filtered to total_votes >= " +
          std::to_string(min_votes) + " (review '" + r.review_id + "' has " +
          std::to_string(r.total_votes) + ")");
  }
}

}  // namespace

double round_half_away(double x) {
  // std::round rounds halves away from zero.
  return std::round(x * 2.0) / 2.0;
}

double round_half_up(double x) {
  return std::floor(x * 2.0 + 0.5) / 2.0;
}

double interpolated_quantile(const std::vector<double>& sorted, double q) {
  if (sorted.empty())
    throw std::invalid_argument("interpolated_quantile: empty sample");
  if (sorted.size() == 1) return sorted.front();
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  if (lo + 1 >= sorted.size()) return sorted.back();
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

std::map<std::string, ProductStats> product_stats(const Corpus& corpus) {
  if (corpus.reviews.empty())
    throw std::invalid_argument("product_stats: empty corpus");
  std::map<std::string, ProductStats> out;
  // Fixed summation order (review input order) keeps results bit-identical
  // regardless of any outer parallel schedule.
  for (const Review& r : corpus.reviews) {
    ProductStats& ps = out[r.product_id];
    ps.product_id = r.product_id;
    ps.review_count += 1;
    ps.computed_star_average += r.star_rating;  // sum for now
  }
  for (auto& [id, ps] : out)
    ps.computed_star_average /= static_cast<double>(ps.review_count);
  for (const Review& r : corpus.reviews) {
    ProductStats& ps = out[r.product_id];
    const double d = r.star_rating - ps.computed_star_average;
    ps.star_variance += d * d;
  }
  for (auto& [id, ps] : out)
    ps.star_variance /= static_cast<double>(ps.review_count);
  return out;
}

double helpfulness_ratio(const Review& review) {
  if (review.total_votes == 0)
    throw std::domain_error("helpfulness_ratio: review '" + review.review_id +
                            "' has zero total votes");
  return static_cast<double>(review.helpful_votes) /
         static_cast<double>(review.total_votes);
}

BinnedCurve deviation_curve(const Corpus& corpus, CurveMode mode,
                            std::optional<double> variance_bin) {
  require_min_votes(corpus, 10, "deviation_curve");
  BinnedCurve curve;
  curve.mode = mode;
  if (corpus.reviews.empty()) return curve;

  const auto products = product_stats(corpus);
  std::map<double, std::vector<double>> ratios_by_bin;
  for (const Review& r : corpus.reviews) {
    const ProductStats& ps = products.at(r.product_id);
    if (variance_bin && round_half_up(ps.star_variance) != *variance_bin)
      continue;
    double dev = r.star_rating - ps.computed_star_average;
    if (mode == CurveMode::kAbsolute) dev = std::fabs(dev);
    const double bin = round_half_away(dev);
    ratios_by_bin[bin].push_back(helpfulness_ratio(r));
  }

  std::int64_t total = 0;
  for (auto& [bin, ratios] : ratios_by_bin)
    total += static_cast<std::int64_t>(ratios.size());
  for (auto& [bin, ratios] : ratios_by_bin) {
    std::sort(ratios.begin(), ratios.end());
    BinStats bs;
    bs.count = static_cast<std::int64_t>(ratios.size());
    bs.q25 = interpolated_quantile(ratios, 0.25);
    bs.median = interpolated_quantile(ratios, 0.50);
    bs.q75 = interpolated_quantile(ratios, 0.75);
    bs.low_data = bs.count * 1000 <= total;
    curve.bins[bin] = bs;
  }
  return curve;
}

std::map<double, Corpus> variance_partition(const Corpus& corpus) {
  std::map<double, Corpus> out;
  if (corpus.reviews.empty()) return out;
  const auto products = product_stats(corpus);
  for (const Review& r : corpus.reviews) {
    const double bin = round_half_up(products.at(r.product_id).star_variance);
    Corpus& part = out[bin];
    part.label = corpus.label;
    part.reviews.push_back(r);
  }
  return out;
}

CorpusSummary summarize_corpus(const Corpus& corpus) {
  CorpusSummary summary;
  summary.label = corpus.label;
  summary.total_reviews = static_cast<std::int64_t>(corpus.reviews.size());
  if (corpus.reviews.empty()) return summary;
  require_min_votes(corpus, 10, "summarize_corpus");

  double ratio_sum = 0.0;
  for (const Review& r : corpus.reviews) ratio_sum += helpfulness_ratio(r);
  summary.avg_helpfulness_ratio =
      ratio_sum / static_cast<double>(corpus.reviews.size());

  const auto products = product_stats(corpus);
  double var_sum = 0.0;
  for (const auto& [id, ps] : products) var_sum += ps.star_variance;
  summary.avg_star_variance = var_sum / static_cast<double>(products.size());
  return summary;
}

}  // namespace reviewlab::stats
