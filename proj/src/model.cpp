#include "reviewlab/model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "reviewlab/parallel.hpp"

namespace reviewlab::model {
namespace {

constexpr double kPlateauEps = 1e-12;

double gaussian_density(double u, double sigma) {
  const double z = u / sigma;
  return std::exp(-0.5 * z * z) /
         (sigma * std::numbers::sqrt2 * std::sqrt(std::numbers::pi));
}

// One standard normal via Box-Muller. Two uniforms per draw keeps the
// stream position independent of any caching.
double standard_normal(SplitMix64& rng) {
  const double u1 = 1.0 - rng.next_double();  // (0, 1]
  const double u2 = rng.next_double();
  return std::sqrt(-2.0 * std::log(u1)) *
         std::cos(2.0 * std::numbers::pi * u2);
}

double golden_section_max(const MixtureModel& model, double a, double b,
                          double tol) {
  constexpr double kInvPhi = 0.6180339887498949;
  double x1 = b - kInvPhi * (b - a);
  double x2 = a + kInvPhi * (b - a);
  double f1 = mixture_density(model, x1);
  double f2 = mixture_density(model, x2);
  while (b - a > tol) {
    if (f1 < f2) {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + kInvPhi * (b - a);
      f2 = mixture_density(model, x2);
    } else {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - kInvPhi * (b - a);
      f1 = mixture_density(model, x1);
    }
  }
  return 0.5 * (a + b);
}

double golden_section_min(const MixtureModel& model, double a, double b,
                          double tol) {
  constexpr double kInvPhi = 0.6180339887498949;
  double x1 = b - kInvPhi * (b - a);
  double x2 = a + kInvPhi * (b - a);
  double f1 = mixture_density(model, x1);
  double f2 = mixture_density(model, x2);
  while (b - a > tol) {
    if (f1 > f2) {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + kInvPhi * (b - a);
      f2 = mixture_density(model, x2);
    } else {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - kInvPhi * (b - a);
      f1 = mixture_density(model, x1);
    }
  }
  return 0.5 * (a + b);
}

bool plateau_equal(double a, double b) {
  // Relative comparison: densities span many orders of magnitude, and only
  // genuine flatness (not a deep, slowly-varying valley) should count.
  return std::fabs(a - b) <= kPlateauEps * std::max(std::fabs(a),
                                                    std::fabs(b));
}

// Rejects flat-topped extrema: a run of >2 grid cells equal within
// kPlateauEps (relative) that sits strictly above (or below) its
// neighbors. Exact-zero valleys are legitimate for compactly supported
// kernels and are handled by the caller, not flagged here.
void check_plateaus(const std::vector<double>& ys) {
  std::size_t run_start = 0;
  for (std::size_t i = 1; i <= ys.size(); ++i) {
    const bool continues = i < ys.size() && plateau_equal(ys[i], ys[i - 1]);
    if (continues) continue;
    const std::size_t run_len = i - run_start;
    if (run_len > 2 && run_start > 0 && i < ys.size()) {
      const double level = ys[run_start];
      const bool max_plateau = ys[run_start - 1] < level && ys[i] < level;
      const bool min_plateau =
          level != 0.0 && ys[run_start - 1] > level && ys[i] > level;
      if (max_plateau || min_plateau)
        throw PlateauError(
            "degenerate plateau: density is flat at an extremum");
    }
    run_start = i;
  }
}

MixtureModel translate_model(double p, const Kernel& kernel, double mu,
                             double alpha) {
  MixtureModel m;
  m.p = p;
  m.alpha = alpha;
  m.mu = mu;
  m.kernel_f = kernel;
  m.kernel_g = kernel;
  return m;
}

Regime classify_regime(double p, const Kernel& kernel, double mu,
                       double alpha) {
  if (alpha == 0.0) return Regime::kUnimodal;
  const MixtureModel m = translate_model(p, kernel, mu, alpha);
  try {
    // Transition-adjacent modes sit close together near the center, so the
    // classification scan is much finer than the default mode search.
    return find_modes(m, 5.0 * kernel.scale, 1e-3 * kernel.scale, 1e-9)
        .regime;
  } catch (const PlateauError&) {
    // A flat top means alpha is at the crossing itself; count it with the
    // unimodal side so the boundary is its supremum.
    return Regime::kUnimodal;
  }
}

std::string format_check(double value) {
  std::ostringstream os;
  os.precision(9);
  os << value;
  return os.str();
}

}  // namespace

double Kernel::density(double u) const {
  switch (family) {
    case KernelFamily::kGaussian:
      return gaussian_density(u, scale);
    case KernelFamily::kTriangular: {
      const double a = std::fabs(u);
      if (a >= scale) return 0.0;
      return (1.0 - a / scale) / scale;
    }
    case KernelFamily::kCustomTabulated: {
      if (std::fabs(u) > scale) return 0.0;
      const double pos = (u + scale) / (2.0 * scale) *
                         static_cast<double>(table.size() - 1);
      const auto lo = std::min(static_cast<std::size_t>(pos), table.size() - 2);
      const double frac = pos - static_cast<double>(lo);
      return table[lo] + frac * (table[lo + 1] - table[lo]);
    }
  }
  return 0.0;
}

double Kernel::sample(SplitMix64& rng) const {
  switch (family) {
    case KernelFamily::kGaussian:
      return scale * standard_normal(rng);
    case KernelFamily::kTriangular: {
      const double u = rng.next_double();
      if (u < 0.5) return scale * (std::sqrt(2.0 * u) - 1.0);
      return scale * (1.0 - std::sqrt(2.0 * (1.0 - u)));
    }
    case KernelFamily::kCustomTabulated: {
      const double u = rng.next_double() * cdf.back();
      const auto it = std::lower_bound(cdf.begin(), cdf.end(), u);
      const std::size_t hi =
          std::max<std::size_t>(1, static_cast<std::size_t>(it - cdf.begin()));
      const double seg = cdf[hi] - cdf[hi - 1];
      const double frac = seg > 0.0 ? (u - cdf[hi - 1]) / seg : 0.5;
      const double step =
          2.0 * scale / static_cast<double>(table.size() - 1);
      return -scale + (static_cast<double>(hi - 1) + frac) * step;
    }
  }
  return 0.0;
}

Kernel make_gaussian(double sigma) {
  if (sigma <= 0.0) throw std::invalid_argument("make_gaussian: sigma > 0");
  Kernel k;
  k.family = KernelFamily::kGaussian;
  k.scale = sigma;
  return k;
}

Kernel make_triangular(double half_width) {
  if (half_width <= 0.0)
    throw std::invalid_argument("make_triangular: half_width > 0");
  Kernel k;
  k.family = KernelFamily::kTriangular;
  k.scale = half_width;
  return k;
}

Kernel make_tabulated(std::vector<double> values, double support) {
  if (values.size() < 3)
    throw std::invalid_argument("make_tabulated: need >= 3 samples");
  if (support <= 0.0)
    throw std::invalid_argument("make_tabulated: support > 0");
  const std::size_t n = values.size();
  for (std::size_t i = 0; i < n; ++i) {
    if (values[i] < 0.0)
      throw std::invalid_argument("make_tabulated: negative density value");
    if (std::fabs(values[i] - values[n - 1 - i]) > 1e-9)
      throw std::invalid_argument("make_tabulated: table must be symmetric");
  }
  // Trapezoid mass, then rescale to unit mass.
  const double step = 2.0 * support / static_cast<double>(n - 1);
  double mass = 0.0;
  for (std::size_t i = 0; i + 1 < n; ++i)
    mass += 0.5 * (values[i] + values[i + 1]) * step;
  if (mass <= 0.0)
    throw std::invalid_argument("make_tabulated: zero total mass");
  for (double& v : values) v /= mass;

  Kernel k;
  k.family = KernelFamily::kCustomTabulated;
  k.scale = support;
  k.cdf.resize(n, 0.0);
  for (std::size_t i = 1; i < n; ++i)
    k.cdf[i] = k.cdf[i - 1] + 0.5 * (values[i - 1] + values[i]) * step;
  k.table = std::move(values);
  return k;
}

double kernel_mass(const Kernel& kernel, int n_points) {
  const double half = 12.0 * kernel.scale;
  const double step = 2.0 * half / static_cast<double>(n_points - 1);
  double mass = 0.0;
  double prev = kernel.density(-half);
  for (int i = 1; i < n_points; ++i) {
    const double cur = kernel.density(-half + step * static_cast<double>(i));
    mass += 0.5 * (prev + cur) * step;
    prev = cur;
  }
  return mass;
}

double mixture_density(const MixtureModel& model, double x) {
  return model.p * model.kernel_f.density(x - model.mu_f()) +
         model.q() * model.kernel_g.density(x - model.mu_g());
}

RegimeReport find_modes(const MixtureModel& model, double search_halfwidth,
                        double grid_step, double refine_tol) {
  const double scale = std::max(model.kernel_f.scale, model.kernel_g.scale);
  const double min_scale =
      std::min(model.kernel_f.scale, model.kernel_g.scale);
  if (grid_step > min_scale / 10.0)
    throw std::invalid_argument("find_modes: grid_step must be <= scale/10");
  if (search_halfwidth < 5.0 * scale)
    throw std::invalid_argument(
        "find_modes: search window must cover 5 scales past the means");
  if (refine_tol <= 0.0)
    throw std::invalid_argument("find_modes: refine_tol > 0");

  const double lo = model.mu_g() - search_halfwidth;
  const double hi = model.mu_f() + search_halfwidth;
  const auto n = static_cast<std::size_t>(std::ceil((hi - lo) / grid_step)) + 1;
  std::vector<double> xs(n), ys(n);
  for (std::size_t i = 0; i < n; ++i) {
    xs[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
    ys[i] = mixture_density(model, xs[i]);
  }
  check_plateaus(ys);

  // Extrema scan over runs of equal-valued cells. A symmetric peak can land
  // exactly between two grid points, leaving a two-cell tie at the top, so
  // single-cell strictness is not enough. Runs longer than two cells were
  // already rejected by check_plateaus.
  std::vector<double> maxima, minima;
  std::vector<std::size_t> max_cells;
  std::size_t run_start = 1;
  for (std::size_t i = 1; i + 1 < n; ++i) {
    if (!plateau_equal(ys[i], ys[run_start])) run_start = i;
    if (plateau_equal(ys[i + 1], ys[i])) continue;  // run continues
    if (run_start == 0 || plateau_equal(ys[run_start - 1], ys[run_start]))
      continue;
    if (ys[run_start - 1] < ys[run_start] && ys[i + 1] < ys[i]) {
      maxima.push_back(
          golden_section_max(model, xs[run_start - 1], xs[i + 1], refine_tol));
      max_cells.push_back(run_start);
    } else if (ys[run_start - 1] > ys[run_start] && ys[i + 1] > ys[i]) {
      minima.push_back(
          golden_section_min(model, xs[run_start - 1], xs[i + 1], refine_tol));
    }
  }

  RegimeReport report;
  if (maxima.empty())
    throw std::runtime_error("find_modes: no interior maximum in the window");
  std::sort(maxima.begin(), maxima.end());
  report.maxima = maxima;
  if (maxima.size() == 1) {
    report.regime = Regime::kUnimodal;
    report.argmax = maxima.front();
  } else if (maxima.size() == 2) {
    report.regime = Regime::kBimodal;
    // The separating minimum lies between the two maxima.
    for (double m : minima) {
      if (m > maxima.front() && m < maxima.back()) {
        report.local_min = m;
        break;
      }
    }
    if (!report.local_min) {
      // Flat valley (e.g. compact kernels whose supports no longer touch):
      // no strict grid minimum exists, so take the middle of the lowest run.
      std::size_t lo_cell = max_cells.front(), hi_cell = max_cells.back();
      std::size_t arg_lo = lo_cell, arg_hi = lo_cell;
      double best = ys[lo_cell];
      for (std::size_t i = lo_cell + 1; i < hi_cell; ++i) {
        if (ys[i] < best) {
          best = ys[i];
          arg_lo = arg_hi = i;
        } else if (ys[i] == best) {
          arg_hi = i;
        }
      }
      report.local_min = 0.5 * (xs[arg_lo] + xs[arg_hi]);
    }
    report.argmax = mixture_density(model, maxima.front()) >=
                            mixture_density(model, maxima.back())
                        ? maxima.front()
                        : maxima.back();
  } else {
    throw std::runtime_error("find_modes: more than two maxima detected");
  }

  if (std::fabs(report.argmax - model.mu) <= refine_tol)
    report.argmax_position = ArgmaxPosition::kAtMu;
  else if (report.argmax > model.mu && report.argmax < model.mu_f())
    report.argmax_position = ArgmaxPosition::kBetweenMuAndMuF;
  else if (report.argmax > model.mu_g() && report.argmax < model.mu)
    report.argmax_position = ArgmaxPosition::kBetweenMuGAndMu;
  else
    report.argmax_position = ArgmaxPosition::kOther;
  return report;
}

std::pair<double, double> estimate_transition_alphas(double p,
                                                     const Kernel& kernel,
                                                     double mu,
                                                     double alpha_max,
                                                     double tol) {
  if (kernel.family != KernelFamily::kGaussian)
    throw std::invalid_argument(
        "estimate_transition_alphas: gaussian kernels only");
  if (p <= 0.0 || p >= 1.0)
    throw std::invalid_argument("estimate_transition_alphas: p in (0,1)");
  if (tol <= 0.0 || alpha_max <= 0.0)
    throw std::invalid_argument(
        "estimate_transition_alphas: tol and alpha_max must be positive");

  // Monotonicity scan: the regime sequence must be a block of UNIMODAL
  // followed by a block of BIMODAL before bisection is meaningful.
  constexpr int kScanPoints = 64;
  double last_unimodal = 0.0;
  double first_bimodal = -1.0;
  for (int i = 1; i <= kScanPoints; ++i) {
    const double alpha =
        alpha_max * static_cast<double>(i) / static_cast<double>(kScanPoints);
    const Regime regime = classify_regime(p, kernel, mu, alpha);
    if (regime == Regime::kUnimodal) {
      if (first_bimodal >= 0.0)
        throw std::runtime_error(
            "estimate_transition_alphas: regime is not monotone in alpha");
      last_unimodal = alpha;
    } else if (first_bimodal < 0.0) {
      first_bimodal = alpha;
    }
  }
  if (first_bimodal < 0.0)
    throw std::runtime_error(
        "estimate_transition_alphas: no regime change below alpha_max; "
        "increase alpha_max");

  double lo = last_unimodal, hi = first_bimodal;
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    if (classify_regime(p, kernel, mu, mid) == Regime::kUnimodal)
      lo = mid;
    else
      hi = mid;
  }
  const double boundary = 0.5 * (lo + hi);
  return {boundary, boundary};
}

bool TheoremReport::all_pass() const {
  return std::all_of(checks.begin(), checks.end(), [](const TheoremCheck& c) {
    return c.pass || c.boundary;
  });
}

TheoremReport verify_unimodal_bimodal_transition(
    double p, const Kernel& kernel, double mu,
    const std::vector<double>& alpha_samples, double refine_tol,
    double margin) {
  if (kernel.family != KernelFamily::kGaussian)
    throw std::invalid_argument(
        "verify_unimodal_bimodal_transition: gaussian kernels only");
  double max_alpha = 0.0;
  for (double a : alpha_samples) max_alpha = std::max(max_alpha, a);
  const double alpha_max =
      std::max(1.5 * max_alpha, 8.0 * kernel.scale / std::min(p, 1.0 - p));
  const auto [transition, transition_hi] =
      estimate_transition_alphas(p, kernel, mu, alpha_max, 1e-4);

  TheoremReport report;
  for (double alpha : alpha_samples) {
    TheoremCheck check;
    check.alpha = alpha;
    if (alpha == 0.0) {
      // Means coincide; "strictly between" only holds in the limit.
      check.boundary = true;
      check.detail = "alpha = 0: argmax at mu (boundary case)";
      report.checks.push_back(check);
      continue;
    }
    if (std::fabs(alpha - transition) <= 1e-3) {
      check.boundary = true;
      check.detail = "alpha at the regime transition (boundary case)";
      report.checks.push_back(check);
      continue;
    }
    const MixtureModel m = translate_model(p, kernel, mu, alpha);
    const RegimeReport modes =
        find_modes(m, 5.0 * kernel.scale, kernel.scale / 100.0, refine_tol);
    const double mu_f = m.mu_f(), mu_g = m.mu_g();
    if (alpha < transition) {
      const bool unimodal = modes.regime == Regime::kUnimodal;
      const bool inside = modes.argmax > mu_g + margin &&
                          modes.argmax < mu_f - margin;
      check.pass = unimodal && inside;
      check.detail = unimodal
                         ? "unimodal, argmax " + format_check(modes.argmax)
                         : "expected unimodal, found bimodal";
      if (unimodal && !inside)
        check.detail += " not strictly inside (mu_g, mu_f)";
    } else {
      const bool bimodal =
          modes.regime == Regime::kBimodal && modes.local_min.has_value();
      const bool inside = bimodal && *modes.local_min > mu_g + margin &&
                          *modes.local_min < mu_f - margin;
      check.pass = bimodal && inside;
      check.detail = bimodal ? "bimodal, local min " +
                                   format_check(*modes.local_min)
                             : "expected bimodal, found unimodal";
      if (bimodal && !inside)
        check.detail += " not strictly inside (mu_g, mu_f)";
    }
    report.checks.push_back(check);
  }
  return report;
}

TheoremReport verify_argmax_side(double p, const Kernel& kernel, double mu,
                                 const std::vector<double>& alpha_samples,
                                 double refine_tol, double margin) {
  if (p == 0.5)
    throw std::invalid_argument(
        "verify_argmax_side: requires an unbalanced mixture (p != 1/2)");
  if (kernel.family != KernelFamily::kGaussian)
    throw std::invalid_argument("verify_argmax_side: gaussian kernels only");
  double max_alpha = 0.0;
  for (double a : alpha_samples) max_alpha = std::max(max_alpha, a);
  const double alpha_max =
      std::max(1.5 * std::max(max_alpha, kernel.scale),
               8.0 * kernel.scale / std::min(p, 1.0 - p));
  const auto [transition, transition_hi] =
      estimate_transition_alphas(p, kernel, mu, alpha_max, 1e-4);

  TheoremReport report;
  for (double alpha : alpha_samples) {
    TheoremCheck check;
    check.alpha = alpha;
    if (alpha == 0.0) {
      check.boundary = true;
      check.detail = "alpha = 0: argmax = mu exactly (boundary case)";
      report.checks.push_back(check);
      continue;
    }
    if (alpha >= transition) {
      check.pass = false;
      check.detail = "alpha above the regime transition; statement "
                     "applies below it";
      report.checks.push_back(check);
      continue;
    }
    const MixtureModel m = translate_model(p, kernel, mu, alpha);
    const RegimeReport modes =
        find_modes(m, 5.0 * kernel.scale, kernel.scale / 100.0, refine_tol);
    bool inside;
    if (p > 0.5)
      inside = modes.argmax > mu + margin && modes.argmax < m.mu_f() - margin;
    else
      inside = modes.argmax > m.mu_g() + margin &&
               modes.argmax < mu - margin;
    check.pass = modes.regime == Regime::kUnimodal && inside;
    check.detail = "argmax " + format_check(modes.argmax);
    if (!check.pass) check.detail += " outside the expected open interval";
    report.checks.push_back(check);
  }
  return report;
}

Corpus simulate_helpfulness(const MixtureModel& model,
                            const SimulationConfig& config, int n_threads) {
  if (config.tolerance <= 0.0)
    throw std::invalid_argument("simulate_helpfulness: tolerance > 0");
  if (config.n_evaluators_per_review < 1)
    throw std::invalid_argument(
        "simulate_helpfulness: n_evaluators_per_review >= 1");
  if (config.n_reviews_per_score < 1)
    throw std::invalid_argument(
        "simulate_helpfulness: n_reviews_per_score >= 1");
  if (config.review_scores.empty())
    throw std::invalid_argument("simulate_helpfulness: empty score grid");
  for (double s : config.review_scores) {
    if (s != std::floor(s) || s < 1.0 || s > 5.0)
      throw std::invalid_argument(
          "simulate_helpfulness: review scores must be whole stars in [1,5]");
  }

  const std::size_t n_scores = config.review_scores.size();
  const std::size_t n_reviews =
      n_scores * static_cast<std::size_t>(config.n_reviews_per_score);
  std::vector<int> helpful(n_reviews, 0);

  parallel_for(n_reviews, n_threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t r = begin; r < end; ++r) {
      // Per-review substream, so results do not depend on the schedule.
      SplitMix64 rng(derive_stream(config.seed, r));
      const double score = config.review_scores[r % n_scores];
      int count = 0;
      for (int e = 0; e < config.n_evaluators_per_review; ++e) {
        const bool positive = rng.next_double() < model.p;
        const double opinion =
            positive ? model.mu_f() + model.kernel_f.sample(rng)
                     : model.mu_g() + model.kernel_g.sample(rng);
        if (std::fabs(opinion - score) <= config.tolerance) ++count;
      }
      helpful[r] = count;
    }
  });

  Corpus corpus;
  corpus.label = "simulated";
  corpus.reviews.reserve(n_reviews);
  for (std::size_t r = 0; r < n_reviews; ++r) {
    const std::size_t product = r / n_scores;
    const int star = static_cast<int>(config.review_scores[r % n_scores]);
    Review review;
    review.product_id = "sim-p" + std::to_string(product);
    review.review_id = review.product_id + "-s" + std::to_string(star);
    review.star_rating = star;
    review.helpful_votes = helpful[r];
    review.total_votes = config.n_evaluators_per_review;
    corpus.reviews.push_back(std::move(review));
  }
  return corpus;
}

}  // namespace reviewlab::model
