// End-to-end acceptance gate. Each numbered check prints one PASS/FAIL line;
// the process exits nonzero if any check fails. Check 7 drives the installed
// CLI binary, whose path is argv[1].

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "reviewlab/corpus.hpp"
#include "reviewlab/dedup.hpp"
#include "reviewlab/mh.hpp"
#include "reviewlab/model.hpp"
#include "reviewlab/rng.hpp"
#include "reviewlab/stats.hpp"

namespace {

using namespace reviewlab;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

int g_failures = 0;

void report(int number, const char* title, bool pass,
            const std::string& detail = {}) {
  std::printf("%d. %s: %s%s%s\n", number, title, pass ? "PASS" : "FAIL",
              detail.empty() ? "" : " - ", detail.c_str());
  std::fflush(stdout);
  if (!pass) ++g_failures;
}

// ------------------------------------------------------------- check 1

void check_mode_structure() {
  const auto start = Clock::now();
  const auto kernel = model::make_gaussian(1.0);
  bool ok = true;
  std::string detail;
  for (double p : {0.3, 0.5, 0.7}) {
    for (double alpha : {0.5, 1.0, 4.0, 6.0}) {
      model::MixtureModel m;
      m.p = p;
      m.alpha = alpha;
      m.kernel_f = kernel;
      m.kernel_g = kernel;
      const auto r = model::find_modes(m, 6.0, 1e-3, 1e-6);
      const double lo = m.mu_g() + 1e-4, hi = m.mu_f() - 1e-4;
      bool this_ok;
      if (alpha <= 1.0) {
        this_ok = r.regime == model::Regime::kUnimodal &&
                  r.argmax > lo && r.argmax < hi;
      } else {
        this_ok = r.regime == model::Regime::kBimodal &&
                  r.local_min.has_value() && *r.local_min > lo &&
                  *r.local_min < hi;
      }
      if (!this_ok && detail.empty()) {
        std::ostringstream os;
        os << "p=" << p << " alpha=" << alpha << " misclassified";
        detail = os.str();
      }
      ok = ok && this_ok;
    }
  }
  const double elapsed = seconds_since(start);
  if (elapsed >= 5.0) {
    ok = false;
    detail = "exceeded the 5 s budget";
  }
  std::ostringstream os;
  os.precision(2);
  os << std::fixed << elapsed << " s";
  report(1, "mode structure on both sides of the transition", ok,
         detail.empty() ? os.str() : detail);
}

// ------------------------------------------------------------- check 2

void check_argmax_side_and_transition() {
  const auto k1 = model::make_gaussian(1.0);
  bool ok = true;
  std::string detail;

  for (double p : {0.7, 0.3}) {
    const auto report_side = model::verify_argmax_side(p, k1, 0.0, {0.2, 0.4});
    if (!report_side.all_pass()) {
      ok = false;
      detail = "argmax side check failed at p=" + std::to_string(p);
    }
  }
  for (double sigma : {1.0, 2.0}) {
    const auto [lo, hi] = model::estimate_transition_alphas(
        0.5, model::make_gaussian(sigma), 0.0, 8.0 * sigma, 1e-4);
    if (std::fabs(lo - 2.0 * sigma) > 1e-3) {
      ok = false;
      std::ostringstream os;
      os << "transition at sigma=" << sigma << " was " << lo;
      detail = os.str();
    }
  }
  report(2, "argmax side and balanced transition location", ok, detail);
}

// ------------------------------------------------------------- check 3

std::map<double, double> signed_medians(const Corpus& corpus) {
  const auto curve = stats::deviation_curve(corpus, stats::CurveMode::kSigned);
  std::map<double, double> medians;
  for (const auto& [bin, bs] : curve.bins) medians[bin] = bs.median;
  return medians;
}

void check_synthetic_curve_shapes() {
  const auto start = Clock::now();
  model::MixtureModel m;
  m.p = 0.72;
  m.mu = 3.5;
  m.kernel_f = model::make_gaussian(0.6);
  m.kernel_g = m.kernel_f;

  model::SimulationConfig config;
  config.tolerance = 0.55;
  config.n_evaluators_per_review = 10000;
  config.n_reviews_per_score = 200;

  int seeds_ok = 0, low_ok = 0, mid_ok = 0, high_ok = 0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    config.seed = seed;

    m.alpha = 0.3;
    auto med = signed_medians(model::simulate_helpfulness(m, config));
    double best_bin = med.begin()->first;
    for (const auto& [bin, v] : med)
      if (v > med.at(best_bin)) best_bin = bin;
    const bool low = best_bin == 0.0;

    m.alpha = 1.2;
    med = signed_medians(model::simulate_helpfulness(m, config));
    best_bin = med.begin()->first;
    for (const auto& [bin, v] : med)
      if (v > med.at(best_bin)) best_bin = bin;
    const bool mid = best_bin > 0.0;

    m.alpha = 3.0;
    med = signed_medians(model::simulate_helpfulness(m, config));
    const bool high = med.count(0.0) && med.count(-1.0) && med.count(1.0) &&
                      med.at(0.0) < med.at(-1.0) && med.at(0.0) < med.at(1.0);

    low_ok += low;
    mid_ok += mid;
    high_ok += high;
    seeds_ok += (low && mid && high);
  }
  const double elapsed = seconds_since(start);
  bool ok = seeds_ok >= 18;
  std::ostringstream os;
  os.precision(1);
  os << seeds_ok << "/20 seeds (low-alpha peak at 0: " << low_ok
     << ", mid-alpha peak right of 0: " << mid_ok
     << ", high-alpha dip at 0: " << high_ok << "); " << std::fixed << elapsed
     << " s";
  if (elapsed >= 60.0) ok = false;
  report(3, "synthetic curve shapes across controversy levels", ok, os.str());
}

// ------------------------------------------------------------- check 4

void check_stratified_odds_ratio() {
  using mh::Stratum2x2;
  bool ok = true;
  std::string detail;
  auto expect = [&](bool cond, const char* what) {
    if (!cond && ok) {
      ok = false;
      detail = what;
    }
  };

  // Hand-computed: single stratum (8,2,2,8) has odds ratio (8*8)/(2*2) = 16.
  {
    const std::vector<Stratum2x2> s = {{8, 2, 2, 8}};
    expect(std::fabs(mh::mh_odds_ratio(s).odds_ratio - 16.0) < 1e-9,
           "single stratum estimate");
  }
  // Hand-computed: balanced strata pool to exactly 1.
  {
    const std::vector<Stratum2x2> s(10, Stratum2x2{5, 5, 5, 5});
    expect(std::fabs(mh::mh_odds_ratio(s).odds_ratio - 1.0) < 1e-9,
           "balanced estimate");
  }
  // Reference fixtures computed independently with statsmodels'
  // StratifiedTable before this module was written; relative 1e-6.
  struct Fixture {
    std::vector<Stratum2x2> strata;
    double odds_ratio, ci_low, ci_high;
  };
  const Fixture fixtures[] = {
      {{{12, 5, 7, 9}, {20, 10, 15, 18}, {3, 8, 6, 2}},
       1.558813423434, 0.757695684325, 3.206959389297},
      {{{8, 2, 2, 8}}, 16.0, 1.788330263454, 143.150292332226},
      {{{5, 5, 5, 5}, {5, 5, 5, 5}, {5, 5, 5, 5}, {5, 5, 5, 5}, {5, 5, 5, 5},
        {5, 5, 5, 5}, {5, 5, 5, 5}, {5, 5, 5, 5}, {5, 5, 5, 5}, {5, 5, 5, 5}},
       1.0, 0.574438906296, 1.740829162231},
      {{{30, 4, 22, 11}, {14, 6, 9, 13}, {40, 25, 31, 38}, {7, 1, 2, 5},
        {18, 12, 16, 14}},
       2.316078740635, 1.453515195501, 3.690515757541},
      {{{2, 13, 9, 4}, {5, 20, 11, 7}, {1, 9, 8, 3}, {4, 16, 10, 6}},
       0.111207271906, 0.048824199511, 0.253297697633},
  };
  auto rel = [](double got, double want) {
    return std::fabs(got - want) / std::fabs(want);
  };
  for (const Fixture& fx : fixtures) {
    const auto r = mh::mh_odds_ratio(fx.strata);
    expect(rel(r.odds_ratio, fx.odds_ratio) < 1e-6, "fixture estimate");
    expect(rel(r.ci_low, fx.ci_low) < 1e-6, "fixture lower bound");
    expect(rel(r.ci_high, fx.ci_high) < 1e-6, "fixture upper bound");
  }

  // Verdict rule on randomized intervals.
  SplitMix64 rng(424242);
  for (int i = 0; i < 1000; ++i) {
    const double lo = rng.next_double() * 2.0;
    const double hi = lo + rng.next_double() * 2.0;
    const bool overlap = lo <= 1.005 && hi >= 0.995;
    mh::Verdict want = mh::Verdict::kNone;
    if (lo > 1.0 && !overlap) want = mh::Verdict::kGreater;
    if (hi < 1.0 && !overlap) want = mh::Verdict::kLess;
    expect(mh::verdict_from_ci(lo, hi) == want, "verdict rule mismatch");
  }
  report(4, "stratified odds ratio against reference values", ok, detail);
}

// ------------------------------------------------------------- check 5

// Reviews made of globally unique sentences; planted pairs share at least
// 70% of their sentences verbatim.
Corpus planted_corpus(std::uint64_t seed, int n_reviews, int n_pairs,
                      long* sentence_counter) {
  SplitMix64 rng(seed);
  auto fresh_sentence = [&] {
    std::string s = "sentence";
    s += std::to_string((*sentence_counter)++);
    for (int w = 0; w < 7; ++w)
      s += " word" + std::to_string(rng.next() % 5000);
    s += ".";
    return s;
  };
  auto fresh_review = [&](std::string id, std::string prod) {
    Review r;
    r.review_id = std::move(id);
    r.product_id = std::move(prod);
    r.star_rating = 1 + static_cast<int>(rng.next() % 5);
    r.total_votes = 10 + static_cast<int>(rng.next() % 50);
    r.helpful_votes = static_cast<int>(
        rng.next() % static_cast<std::uint64_t>(r.total_votes + 1));
    return r;
  };

  Corpus corpus;
  const int n_plain = n_reviews - 2 * n_pairs;
  for (int i = 0; i < n_plain; ++i) {
    Review r = fresh_review("plain-" + std::to_string(i),
                            "prod-" + std::to_string(i % (n_plain / 2 + 1)));
    const int n_sentences = 6 + static_cast<int>(rng.next() % 7);
    for (int s = 0; s < n_sentences; ++s) r.text += fresh_sentence() + " ";
    corpus.reviews.push_back(std::move(r));
  }
  for (int i = 0; i < n_pairs; ++i) {
    const int n_sentences = 10;
    std::vector<std::string> sentences(n_sentences);
    for (auto& s : sentences) s = fresh_sentence();
    Review a = fresh_review("pair-" + std::to_string(i) + "-a",
                            "dupprod-" + std::to_string(i) + "-a");
    Review b = fresh_review("pair-" + std::to_string(i) + "-b",
                            "dupprod-" + std::to_string(i) + "-b");
    for (int s = 0; s < n_sentences; ++s) {
      a.text += sentences[s] + " ";
      // Rewrite up to 30% of the copy's sentences.
      const bool rewrite = s < 3 && (rng.next() & 1);
      b.text += (rewrite ? fresh_sentence() : sentences[s]) + " ";
    }
    corpus.reviews.push_back(std::move(a));
    corpus.reviews.push_back(std::move(b));
  }
  return corpus;
}

// The O(n^2) oracle, restricted (like the index) to pairs sharing a
// verbatim sentence.
std::vector<std::pair<std::string, std::string>> brute_pairs(
    const Corpus& corpus, double threshold) {
  std::vector<dedup::SentenceSet> sets;
  for (const auto& r : corpus.reviews)
    sets.push_back(dedup::make_sentence_set(r));
  std::vector<std::pair<std::string, std::string>> out;
  for (std::size_t i = 0; i < sets.size(); ++i)
    for (std::size_t j = i + 1; j < sets.size(); ++j) {
      if (corpus.reviews[i].product_id == corpus.reviews[j].product_id)
        continue;
      bool shared = false;
      for (auto fa : sets[i].fingerprints) {
        for (auto fb : sets[j].fingerprints)
          if (fa == fb) {
            shared = true;
            break;
          }
        if (shared) break;
      }
      if (!shared) continue;
      if (dedup::pair_similarity(sets[i], sets[j]) < threshold) continue;
      auto a = corpus.reviews[i].review_id, b = corpus.reviews[j].review_id;
      if (b < a) std::swap(a, b);
      out.emplace_back(a, b);
    }
  std::sort(out.begin(), out.end());
  return out;
}

void check_near_duplicate_detection() {
  bool ok = true;
  std::string detail;
  long counter = 0;

  // Recall and precision on 1,000 reviews with 50 planted pairs.
  {
    const Corpus corpus = planted_corpus(2024, 1000, 50, &counter);
    const auto found = dedup::find_plagiarized_pairs(corpus, 0.70);
    int planted = 0, false_pairs = 0;
    for (const auto& p : found) {
      const bool is_planted =
          p.review_a.rfind("pair-", 0) == 0 && p.review_b.rfind("pair-", 0) == 0 &&
          p.review_a.substr(0, p.review_a.size() - 2) ==
              p.review_b.substr(0, p.review_b.size() - 2);
      if (is_planted)
        ++planted;
      else
        ++false_pairs;
    }
    if (planted != 50 || false_pairs != 0) {
      ok = false;
      detail = "recall " + std::to_string(planted) + "/50, " +
               std::to_string(false_pairs) + " false pairs";
    }
    std::vector<std::pair<std::string, std::string>> found_ids;
    for (const auto& p : found) found_ids.emplace_back(p.review_a, p.review_b);
    if (found_ids != brute_pairs(corpus, 0.70)) {
      ok = false;
      detail = "index result differs from the quadratic oracle";
    }
  }

  // Throughput and growth at three sizes.
  double times[3] = {0, 0, 0};
  const int sizes[3] = {12500, 25000, 50000};
  for (int k = 0; k < 3; ++k) {
    counter = 0;
    const Corpus corpus =
        planted_corpus(7000 + k, sizes[k], sizes[k] / 100, &counter);
    const auto start = Clock::now();
    const auto found = dedup::find_plagiarized_pairs(corpus, 0.70);
    times[k] = seconds_since(start);
    if (static_cast<int>(found.size()) < sizes[k] / 100) ok = false;
  }
  std::ostringstream os;
  os.precision(2);
  os << std::fixed << "12.5k/25k/50k reviews in " << times[0] << "/"
     << times[1] << "/" << times[2] << " s";
  if (times[2] >= 60.0) {
    ok = false;
    detail = "50k corpus exceeded the 60 s budget";
  }
  // Quadratic growth would give a 16x step across a 4x size increase.
  if (times[2] > 10.0 * std::max(times[0], 0.01)) {
    ok = false;
    detail = "superlinear growth between sizes";
  }
  report(5, "near-duplicate recall, precision and throughput", ok,
         detail.empty() ? os.str() : detail + "; " + os.str());
}

// ------------------------------------------------------------- check 6

void check_stats_oracle_equivalence() {
  bool ok = true;
  std::string detail;
  auto expect = [&](bool cond, const char* what) {
    if (!cond && ok) {
      ok = false;
      detail = what;
    }
  };

  SplitMix64 seeder(606060);
  for (int trial = 0; trial < 100; ++trial) {
    // Random corpus.
    SplitMix64 rng(seeder.next());
    Corpus corpus;
    const int n_products = 2 + static_cast<int>(rng.next() % 12);
    int id = 0;
    for (int p = 0; p < n_products; ++p) {
      const int n_reviews = 1 + static_cast<int>(rng.next() % 9);
      for (int r = 0; r < n_reviews; ++r) {
        Review review;
        review.product_id = "p" + std::to_string(p);
        review.review_id = "r" + std::to_string(id++);
        review.star_rating = 1 + static_cast<int>(rng.next() % 5);
        review.total_votes = 10 + static_cast<int>(rng.next() % 40);
        review.helpful_votes = static_cast<int>(
            rng.next() % static_cast<std::uint64_t>(review.total_votes + 1));
        corpus.reviews.push_back(std::move(review));
      }
    }

    // Brute-force recomputation.
    const auto got = stats::product_stats(corpus);
    for (const auto& [prod, ps] : got) {
      double sum = 0.0;
      long count = 0;
      for (const auto& r : corpus.reviews)
        if (r.product_id == prod) {
          sum += r.star_rating;
          ++count;
        }
      const double mean = sum / count;
      double var = 0.0;
      for (const auto& r : corpus.reviews)
        if (r.product_id == prod)
          var += (r.star_rating - mean) * (r.star_rating - mean);
      var /= count;
      expect(ps.review_count == count, "review count");
      expect(std::fabs(ps.computed_star_average - mean) < 1e-12, "mean");
      expect(std::fabs(ps.star_variance - var) < 1e-12, "variance");
    }

    // Deviation rounding and per-bin quantiles.
    for (auto mode : {stats::CurveMode::kSigned, stats::CurveMode::kAbsolute}) {
      const auto curve = stats::deviation_curve(corpus, mode);
      std::map<double, std::vector<double>> bins;
      for (const auto& r : corpus.reviews) {
        double dev = r.star_rating - got.at(r.product_id).computed_star_average;
        if (mode == stats::CurveMode::kAbsolute) dev = std::fabs(dev);
        const double bin = std::round(dev * 2.0) / 2.0;
        bins[bin].push_back(static_cast<double>(r.helpful_votes) /
                            static_cast<double>(r.total_votes));
      }
      expect(curve.bins.size() == bins.size(), "bin keys");
      for (auto& [bin, ratios] : bins) {
        std::sort(ratios.begin(), ratios.end());
        const auto& bs = curve.bins.at(bin);
        expect(bs.count == static_cast<std::int64_t>(ratios.size()),
               "bin count");
        for (auto [q, want] :
             {std::pair{0.25, bs.q25}, {0.50, bs.median}, {0.75, bs.q75}}) {
          const double pos = q * static_cast<double>(ratios.size() - 1);
          const auto lo = static_cast<std::size_t>(pos);
          const double frac = pos - static_cast<double>(lo);
          const double oracle =
              lo + 1 < ratios.size()
                  ? ratios[lo] + frac * (ratios[lo + 1] - ratios[lo])
                  : ratios.back();
          expect(std::fabs(want - oracle) < 1e-12, "bin quantile");
        }
      }

      // Absolute count at v equals signed counts at +v and -v combined.
      if (mode == stats::CurveMode::kAbsolute) {
        const auto signed_curve =
            stats::deviation_curve(corpus, stats::CurveMode::kSigned);
        for (const auto& [bin, bs] : curve.bins) {
          std::int64_t want = 0;
          if (auto it = signed_curve.bins.find(bin);
              it != signed_curve.bins.end())
            want += it->second.count;
          if (bin != 0.0)
            if (auto it = signed_curve.bins.find(-bin);
                it != signed_curve.bins.end())
              want += it->second.count;
          expect(bs.count == want, "mirror bin count");
        }
      }
    }

    // Variance partition: disjoint cover with correctly rounded keys.
    const auto parts = stats::variance_partition(corpus);
    std::size_t covered = 0;
    for (const auto& [bin, part] : parts) {
      covered += part.reviews.size();
      for (const auto& r : part.reviews) {
        const double v = got.at(r.product_id).star_variance;
        expect(std::floor(v * 2.0 + 0.5) / 2.0 == bin, "variance bin key");
      }
    }
    expect(covered == corpus.reviews.size(), "partition cover");
  }
  report(6, "statistics match brute-force recomputation", ok, detail);
}

// ------------------------------------------------------------- check 7

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void check_cli_pipeline(const std::string& cli) {
  bool ok = true;
  std::string detail;
  const fs::path dir =
      fs::temp_directory_path() / ("acceptance-" + std::to_string(::getpid()));
  fs::create_directories(dir);

  auto run = [&](const std::string& args) {
    const std::string cmd = cli + " " + args + " 2>" + (dir / "err").string();
    const int rc = std::system(cmd.c_str());
    if (rc != 0 && ok) {
      ok = false;
      detail = "command failed: " + args + " (" + slurp(dir / "err") + ")";
    }
    return rc == 0;
  };

  for (int threads : {1, 4}) {
    const std::string t = std::to_string(threads);
    const std::string suffix = "-t" + t;
    const fs::path sim = dir / ("sim" + suffix + ".jsonl");
    const fs::path corpus = dir / ("corpus" + suffix + ".jsonl");
    run("--seed 7 --threads " + t +
        " model simulate --p 0.72 --alpha 1.2 --mu 3.5 --scale 0.6"
        " --tol 0.55 --evaluators 1000 --reviews-per-score 40 --out " +
        sim.string());
    run("--threads " + t + " ingest " + sim.string() + " --min-votes 10 --out " +
        corpus.string());
    run("--threads " + t + " stats --input " + corpus.string() +
        " --mode signed --out " + (dir / ("signed" + suffix + ".csv")).string());
    run("--threads " + t + " stats --input " + corpus.string() +
        " --mode absolute --out " + (dir / ("abs" + suffix + ".csv")).string());
    run("--threads " + t + " summarize --input " + corpus.string() +
        " --out " + (dir / ("summary" + suffix + ".json")).string());
    run("--threads " + t + " dedup --input " + corpus.string() +
        " --threshold 0.7 --out " + (dir / ("pairs" + suffix + ".csv")).string());
  }

  const std::pair<const char*, const char*> outputs[] = {
      {"sim", ".jsonl"},   {"corpus", ".jsonl"}, {"signed", ".csv"},
      {"abs", ".csv"},     {"summary", ".json"}, {"pairs", ".csv"}};
  for (const auto& [stem, ext] : outputs) {
    const auto a = slurp(dir / (std::string(stem) + "-t1" + ext));
    const auto b = slurp(dir / (std::string(stem) + "-t4" + ext));
    if (a.empty() || a != b) {
      ok = false;
      detail = std::string(stem) + ext + " differs across thread counts";
    }
  }

  // Round trip: the normalized corpus must reload and re-save identically.
  {
    std::ifstream in(dir / "corpus-t1.jsonl", std::ios::binary);
    const Corpus reloaded = load_reviews(in, SourceFormat::kJsonl);
    std::ostringstream out;
    save_jsonl(reloaded, out);
    if (out.str() != slurp(dir / "corpus-t1.jsonl")) {
      ok = false;
      detail = "round trip is not byte-identical";
    }
    if (reloaded.reviews.empty()) {
      ok = false;
      detail = "pipeline produced an empty corpus";
    }
  }
  fs::remove_all(dir);
  report(7, "CLI pipeline round trip and thread determinism", ok, detail);
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    std::fprintf(stderr, "usage: acceptance <path-to-cli>\n");
    return 2;
  }
  check_mode_structure();
  check_argmax_side_and_transition();
  check_synthetic_curve_shapes();
  check_stratified_odds_ratio();
  check_near_duplicate_detection();
  check_stats_oracle_equivalence();
  check_cli_pipeline(argv[1]);
  if (g_failures > 0) {
    std::printf("%d of 7 checks failed\n", g_failures);
    return 1;
  }
  std::printf("all 7 checks passed\n");
  return 0;
}
