#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "reviewlab/dedup.hpp"

namespace reviewlab::mh {

/// One 2x2 table: row one is the copy in role i (helpful / unhelpful),
/// row two the copy in role j. Unhelpful = total - helpful.
struct Stratum2x2 {
  std::int64_t a = 0;  // helpful, role i
  std::int64_t b = 0;  // unhelpful, role i
  std::int64_t c = 0;  // helpful, role j
  std::int64_t d = 0;  // unhelpful, role j

  std::int64_t n() const { return a + b + c + d; }
  bool operator==(const Stratum2x2&) const = default;
};

enum class Verdict { kGreater, kLess, kNone };

struct MHResult {
  double odds_ratio = 0.0;  // Mantel-Haenszel common odds-ratio estimate
  double ci_low = 0.0;      // 95% CI (Robins-Breslow-Greenland variance)
  double ci_high = 0.0;
  Verdict verdict = Verdict::kNone;
  int n_strata = 0;
  bool degenerate = false;  // one of the MH sums was zero
};

enum class Axis { kAbsolute, kSignedNegative, kSignedPositive, kMirrored };

/// Upper-triangle grid of verdicts over deviation-bin pairs (i, j); j is
/// capped at 3.5 in absolute value. Unpopulated cells are EMPTY (nullopt).
struct VerdictGrid {
  Axis axis = Axis::kAbsolute;
  std::map<std::pair<double, double>, std::optional<MHResult>> cells;
};

/// Deviation bin values admissible on an axis, in the axis's order
/// (closest-to-zero first).
std::vector<double> axis_bins(Axis axis);

/// Emits one stratum per pair whose two copies fall in bins i and j (one
/// each) on the given axis, with the i-copy in the (a,b) row. Pairs with
/// both copies in the same bin, or in other bins, are excluded. On the
/// mirrored axis the bins are (-i, +i).
std::vector<Stratum2x2> strata_for_bin_pair(
    std::span<const dedup::PlagiarizedPair> pairs, Axis axis, double i,
    double j);

/// Verdict from a confidence interval per the [0.995,1.005]-overlap rule:
/// GREATER iff ci_low > 1 and the CI does not overlap [0.995,1.005];
/// LESS symmetrically with ci_high < 1; otherwise NONE.
Verdict verdict_from_ci(double ci_low, double ci_high);

/// Mantel-Haenszel common odds ratio with a 95% RBG confidence interval.
/// Requires >= 1 stratum and at least one stratum with a*d > 0 or b*c > 0
/// (throws std::invalid_argument otherwise). A zero denominator sum yields
/// an infinite estimate with the degenerate flag set (symmetrically zero for
/// a zero numerator sum).
MHResult mh_odds_ratio(std::span<const Stratum2x2> strata);

/// Populates every admissible (i, j) cell of the axis with mh_odds_ratio
/// over its strata; cells without strata stay EMPTY.
VerdictGrid verdict_grid(std::span<const dedup::PlagiarizedPair> pairs,
                         Axis axis);

/// Cross-check: within each stratum swap the two copies' tallies with
/// probability 1/2, recompute the pooled helpfulness-ratio difference, and
/// return the two-sided p-value over n_permutations draws. Not used in
/// verdicts.
double permutation_test(std::span<const Stratum2x2> strata,
                        int n_permutations = 10000,
                        std::uint64_t seed = 0);

}  // namespace reviewlab::mh
