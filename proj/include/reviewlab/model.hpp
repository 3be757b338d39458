#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "reviewlab/corpus.hpp"
#include "reviewlab/rng.hpp"

namespace reviewlab::model {

enum class KernelFamily { kGaussian, kTriangular, kCustomTabulated };

/// Unimodal, centrally symmetric density centered at 0. Gaussian kernels
/// are C^2 and are the family used by the theorem verifiers. The tabulated
/// family linearly interpolates a symmetric table over [-support, support].
struct Kernel {
  KernelFamily family = KernelFamily::kGaussian;
  double scale = 1.0;  // gaussian: std deviation; triangular: half-width

  // Custom-tabulated only: density values on a uniform grid over
  // [-scale, scale], normalized at construction via make_tabulated(), plus
  // the matching cumulative table used for inverse-CDF sampling.
  std::vector<double> table;
  std::vector<double> cdf;

  double density(double u) const;
  double sample(SplitMix64& rng) const;

  bool operator==(const Kernel&) const = default;
};

Kernel make_gaussian(double sigma);
Kernel make_triangular(double half_width);
/// Builds a tabulated kernel from symmetric, unimodal samples over
/// [-support, support]; rescales the table so the density integrates to 1.
Kernel make_tabulated(std::vector<double> values, double support);

/// Trapezoid integral of the kernel density over [-12*scale, 12*scale];
/// used by the unit-mass check.
double kernel_mass(const Kernel& kernel, int n_points = 200001);

/// Two-population opinion model: a p fraction of positive evaluators with
/// density f centered at mu + (1-p)*alpha and a 1-p fraction of negative
/// evaluators with density g centered at mu - p*alpha. The mixture
/// h = p f + (1-p) g has mean mu for every alpha.
struct MixtureModel {
  double p = 0.5;       // balance, in (0,1)
  double alpha = 0.0;   // controversy level, >= 0
  double mu = 0.0;      // population mean
  Kernel kernel_f;
  Kernel kernel_g;

  double q() const { return 1.0 - p; }
  double mu_f() const { return mu + q() * alpha; }
  double mu_g() const { return mu - p * alpha; }
};

double mixture_density(const MixtureModel& model, double x);

enum class Regime { kUnimodal, kBimodal };

enum class ArgmaxPosition {
  kBetweenMuAndMuF,
  kBetweenMuGAndMu,
  kAtMu,
  kOther
};

struct RegimeReport {
  Regime regime = Regime::kUnimodal;
  std::vector<double> maxima;      // ascending
  std::optional<double> local_min;
  double argmax = 0.0;             // location of the global maximum
  ArgmaxPosition argmax_position = ArgmaxPosition::kOther;
  std::optional<double> alpha_low_est;   // regime-transition estimates
  std::optional<double> alpha_high_est;
};

/// Raised when the density is flat (>2 adjacent grid cells equal within
/// 1e-12) at a would-be extremum; the scan refuses to guess.
class PlateauError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Locates all strict local extrema of the mixture density by grid scan
/// over [mu_g - search_halfwidth, mu_f + search_halfwidth] followed by
/// golden-section refinement to refine_tol. Requires grid_step <= scale/10
/// and search_halfwidth >= 5*scale.
RegimeReport find_modes(const MixtureModel& model, double search_halfwidth,
                        double grid_step, double refine_tol);

/// Bisects on alpha for the unimodal-to-bimodal boundary over
/// [0, alpha_max], after a monotonicity scan confirms a single crossing.
/// Returns the boundary bracketed to width <= tol (both components equal
/// when a single crossing is found). Throws std::runtime_error when no
/// regime change occurs below alpha_max.
std::pair<double, double> estimate_transition_alphas(double p,
                                                     const Kernel& kernel,
                                                     double mu,
                                                     double alpha_max,
                                                     double tol);

struct TheoremCheck {
  double alpha = 0.0;
  bool pass = false;
  bool boundary = false;  // degenerate sample (e.g. alpha == 0), not a failure
  std::string detail;
};

struct TheoremReport {
  std::vector<TheoremCheck> checks;
  bool all_pass() const;
};

/// Checks numerically that below the estimated transition the mixture is
/// unimodal with argmax strictly inside (mu_g, mu_f), and above it has a
/// local minimum strictly inside (mu_g, mu_f). `margin` is the strictness
/// slack on the open-interval assertions.
TheoremReport verify_unimodal_bimodal_transition(
    double p, const Kernel& kernel, double mu,
    const std::vector<double>& alpha_samples, double refine_tol = 1e-6,
    double margin = 1e-4);

/// Translate-kernel refinement: for p > 1/2 the argmax lies strictly in
/// (mu, mu_f); for p < 1/2 strictly in (mu_g, mu). All alphas must be below
/// the transition. Throws std::invalid_argument for p == 1/2.
TheoremReport verify_argmax_side(double p, const Kernel& kernel, double mu,
                                 const std::vector<double>& alpha_samples,
                                 double refine_tol = 1e-6,
                                 double margin = 1e-4);

struct SimulationConfig {
  double tolerance = 0.55;  // evaluator agreement window (tau)
  int n_evaluators_per_review = 1000;
  std::vector<double> review_scores = {1, 2, 3, 4, 5};
  int n_reviews_per_score = 1;  // one synthetic product per replication
  std::uint64_t seed = 0;
};

/// Draws evaluator opinions i.i.d. from the mixture and counts a review as
/// helpful when |opinion - score| <= tolerance. Each synthetic product
/// carries one review of every score in review_scores, so the downstream
/// deviation and variance statistics are well-defined. Output is
/// bit-identical for a fixed seed regardless of n_threads.
Corpus simulate_helpfulness(const MixtureModel& model,
                            const SimulationConfig& config, int n_threads = 0);

}  // namespace reviewlab::model
