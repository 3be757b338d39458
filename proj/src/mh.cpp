#include "reviewlab/mh.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "reviewlab/rng.hpp"

namespace reviewlab::mh {
namespace {

constexpr double kZ95 = 1.959964;

bool ci_overlaps_unity_band(double lo, double hi) {
  return lo <= 1.005 && hi >= 0.995;
}

// Bin of one pair side on the axis. Mirrored uses the signed value; the
// other axes pick signed or absolute as appropriate.
double side_bin(Axis axis, double abs_dev, double signed_dev) {
  switch (axis) {
    case Axis::kAbsolute:
      return abs_dev;
    default:
      return signed_dev;
  }
}

}  // namespace

std::vector<double> axis_bins(Axis axis) {
  std::vector<double> bins;
  switch (axis) {
    case Axis::kAbsolute:
    case Axis::kSignedPositive:
      for (int k = 0; k <= 7; ++k) bins.push_back(k * 0.5);
      break;
    case Axis::kSignedNegative:
      for (int k = 0; k <= 7; ++k) bins.push_back(-k * 0.5);
      break;
    case Axis::kMirrored:
      for (int k = 1; k <= 7; ++k) bins.push_back(k * 0.5);
      break;
  }
  return bins;
}

std::vector<Stratum2x2> strata_for_bin_pair(
    std::span<const dedup::PlagiarizedPair> pairs, Axis axis, double i,
    double j) {
  double bin_i = i, bin_j = j;
  if (axis == Axis::kMirrored) {
    // Cell value v compares the copy at -v (role i) against the copy at +v.
    bin_i = -std::fabs(i);
    bin_j = std::fabs(j);
  }
  if (bin_i == bin_j)
    throw std::invalid_argument("strata_for_bin_pair: i == j");

  std::vector<Stratum2x2> strata;
  for (const dedup::PlagiarizedPair& pair : pairs) {
    const double bin_a = side_bin(axis, pair.abs_dev_a, pair.signed_dev_a);
    const double bin_b = side_bin(axis, pair.abs_dev_b, pair.signed_dev_b);
    int helpful_i, total_i, helpful_j, total_j;
    if (bin_a == bin_i && bin_b == bin_j) {
      helpful_i = pair.helpful_a;
      total_i = pair.total_a;
      helpful_j = pair.helpful_b;
      total_j = pair.total_b;
    } else if (bin_b == bin_i && bin_a == bin_j) {
      helpful_i = pair.helpful_b;
      total_i = pair.total_b;
      helpful_j = pair.helpful_a;
      total_j = pair.total_a;
    } else {
      continue;
    }
    if (total_i < 1 || total_j < 1) continue;  // stratum rows need votes
    strata.push_back(Stratum2x2{helpful_i, total_i - helpful_i, helpful_j,
                                total_j - helpful_j});
  }
  return strata;
}

Verdict verdict_from_ci(double ci_low, double ci_high) {
  if (ci_low > 1.0 && !ci_overlaps_unity_band(ci_low, ci_high))
    return Verdict::kGreater;
  if (ci_high < 1.0 && !ci_overlaps_unity_band(ci_low, ci_high))
    return Verdict::kLess;
  return Verdict::kNone;
}

MHResult mh_odds_ratio(std::span<const Stratum2x2> strata) {
  if (strata.empty())
    throw std::invalid_argument("mh_odds_ratio: no strata");

  double sum_r = 0.0, sum_s = 0.0;       // MH numerator / denominator
  double t1 = 0.0, t2 = 0.0, t3 = 0.0;   // RBG variance accumulators
  for (const Stratum2x2& s : strata) {
    if (s.a + s.b < 1 || s.c + s.d < 1)
      throw std::invalid_argument("mh_odds_ratio: empty stratum row");
    const double n = static_cast<double>(s.n());
    const double p_k = static_cast<double>(s.a + s.d) / n;
    const double q_k = static_cast<double>(s.b + s.c) / n;
    const double r_k = static_cast<double>(s.a) * static_cast<double>(s.d) / n;
    const double s_k = static_cast<double>(s.b) * static_cast<double>(s.c) / n;
    sum_r += r_k;
    sum_s += s_k;
    t1 += p_k * r_k;
    t2 += p_k * s_k + q_k * r_k;
    t3 += q_k * s_k;
  }

  MHResult result;
  result.n_strata = static_cast<int>(strata.size());
  if (sum_r == 0.0 && sum_s == 0.0)
    throw std::invalid_argument(
        "mh_odds_ratio: estimator undefined (all a*d and b*c are zero)");
  if (sum_s == 0.0) {
    // One-sided degenerate table: every stratum's j-row is unanimous.
    result.odds_ratio = std::numeric_limits<double>::infinity();
    result.ci_low = std::numeric_limits<double>::infinity();
    result.ci_high = std::numeric_limits<double>::infinity();
    result.verdict = Verdict::kGreater;
    result.degenerate = true;
    return result;
  }
  if (sum_r == 0.0) {
    result.odds_ratio = 0.0;
    result.ci_low = 0.0;
    result.ci_high = 0.0;
    result.verdict = Verdict::kLess;
    result.degenerate = true;
    return result;
  }

  result.odds_ratio = sum_r / sum_s;
  const double var_log = t1 / (2.0 * sum_r * sum_r) +
                         t2 / (2.0 * sum_r * sum_s) +
                         t3 / (2.0 * sum_s * sum_s);
  const double se = std::sqrt(var_log);
  const double log_or = std::log(result.odds_ratio);
  result.ci_low = std::exp(log_or - kZ95 * se);
  result.ci_high = std::exp(log_or + kZ95 * se);
  result.verdict = verdict_from_ci(result.ci_low, result.ci_high);
  return result;
}

VerdictGrid verdict_grid(std::span<const dedup::PlagiarizedPair> pairs,
                         Axis axis) {
  VerdictGrid grid;
  grid.axis = axis;
  const std::vector<double> bins = axis_bins(axis);
  if (axis == Axis::kMirrored) {
    for (double v : bins) {
      const auto strata = strata_for_bin_pair(pairs, axis, -v, v);
      auto& cell = grid.cells[{-v, v}];
      if (!strata.empty()) cell = mh_odds_ratio(strata);
    }
    return grid;
  }
  // Upper triangle: i closer to zero than j; |j| capped at 3.5 by axis_bins.
  for (std::size_t x = 0; x < bins.size(); ++x) {
    for (std::size_t y = x + 1; y < bins.size(); ++y) {
      const double i = bins[x], j = bins[y];
      const auto strata = strata_for_bin_pair(pairs, axis, i, j);
      auto& cell = grid.cells[{i, j}];
      if (!strata.empty()) cell = mh_odds_ratio(strata);
    }
  }
  return grid;
}

double permutation_test(std::span<const Stratum2x2> strata,
                        int n_permutations, std::uint64_t seed) {
  if (strata.empty())
    throw std::invalid_argument("permutation_test: no strata");
  auto pooled_diff = [](std::span<const Stratum2x2> s,
                        const std::vector<bool>* flips) {
    std::int64_t hi = 0, ti = 0, hj = 0, tj = 0;
    for (std::size_t k = 0; k < s.size(); ++k) {
      const Stratum2x2& st = s[k];
      const bool flip = flips && (*flips)[k];
      const std::int64_t a = flip ? st.c : st.a;
      const std::int64_t b = flip ? st.d : st.b;
      const std::int64_t c = flip ? st.a : st.c;
      const std::int64_t d = flip ? st.b : st.d;
      hi += a;
      ti += a + b;
      hj += c;
      tj += c + d;
    }
    return static_cast<double>(hi) / static_cast<double>(ti) -
           static_cast<double>(hj) / static_cast<double>(tj);
  };

  const double observed = std::fabs(pooled_diff(strata, nullptr));
  SplitMix64 rng(seed);
  std::vector<bool> flips(strata.size());
  int at_least_as_extreme = 0;
  for (int it = 0; it < n_permutations; ++it) {
    for (std::size_t k = 0; k < strata.size(); ++k)
      flips[k] = (rng.next() & 1ULL) != 0;
    if (std::fabs(pooled_diff(strata, &flips)) >= observed)
      ++at_least_as_extreme;
  }
  return static_cast<double>(at_least_as_extreme + 1) /
         static_cast<double>(n_permutations + 1);
}

}  // namespace reviewlab::mh
