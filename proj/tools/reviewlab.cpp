// Command-line front end: ingest -> stats/summarize -> dedup -> mh, plus
// model verify/simulate/density. Data goes to files, diagnostics to stderr.

#include <charconv>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "reviewlab/corpus.hpp"
#include "reviewlab/dedup.hpp"
#include "reviewlab/mh.hpp"
#include "reviewlab/model.hpp"
#include "reviewlab/stats.hpp"

namespace {

using namespace reviewlab;
using nlohmann::json;

// Shortest round-trip decimal form; keeps outputs byte-identical across runs.
std::string fmt_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

std::string csv_quote(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += "\"\"";
    else out += c;
  }
  out += '"';
  return out;
}

Corpus load_corpus_file(const std::string& path, SourceFormat format,
                        const std::string& label = {}) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open input file: " + path);
  return load_reviews(in, format, label);
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open output file: " + path);
  out << content;
}

// ---------------------------------------------------------------- ingest

struct IngestOptions {
  std::string input, out, label;
  std::string format = "jsonl";
  int min_votes = 10;
  bool collapse_versions = true;
};

int run_ingest(const IngestOptions& opt) {
  const SourceFormat fmt =
      opt.format == "csv" ? SourceFormat::kCsv : SourceFormat::kJsonl;
  Corpus corpus = load_corpus_file(opt.input, fmt, opt.label);
  if (opt.collapse_versions) corpus = dedup_mechanical(corpus);
  corpus = filter_min_votes(corpus, opt.min_votes);
  std::ostringstream os;
  save_jsonl(corpus, os);
  write_file(opt.out, os.str());
  return 0;
}

// ------------------------------------------------------------ stats/summarize

std::string curve_to_csv(const stats::BinnedCurve& curve) {
  std::string out = "bin,count,q25,median,q75,low_data\n";
  for (const auto& [bin, bs] : curve.bins) {
    out += fmt_double(bin) + ',' + std::to_string(bs.count) + ',' +
           fmt_double(bs.q25) + ',' + fmt_double(bs.median) + ',' +
           fmt_double(bs.q75) + ',' + (bs.low_data ? "true" : "false") + '\n';
  }
  return out;
}

int run_stats(const std::string& input, const std::string& mode,
              std::optional<double> variance_bin, const std::string& out) {
  const Corpus corpus = load_corpus_file(input, SourceFormat::kJsonl);
  const auto curve_mode = mode == "absolute" ? stats::CurveMode::kAbsolute
                                             : stats::CurveMode::kSigned;
  const auto curve = stats::deviation_curve(corpus, curve_mode, variance_bin);
  write_file(out, curve_to_csv(curve));
  return 0;
}

int run_summarize(const std::string& input, const std::string& out) {
  const Corpus corpus = load_corpus_file(input, SourceFormat::kJsonl);
  const auto summary = stats::summarize_corpus(corpus);
  json obj{{"label", summary.label},
           {"total_reviews", summary.total_reviews},
           {"avg_helpfulness_ratio", nullptr},
           {"avg_star_variance", nullptr}};
  if (summary.avg_helpfulness_ratio)
    obj["avg_helpfulness_ratio"] = *summary.avg_helpfulness_ratio;
  if (summary.avg_star_variance)
    obj["avg_star_variance"] = *summary.avg_star_variance;
  write_file(out, obj.dump(2) + "\n");
  return 0;
}

// ----------------------------------------------------------------- dedup

std::string pairs_to_csv(const std::vector<dedup::PlagiarizedPair>& pairs) {
  std::string out =
      "review_a,review_b,similarity,signed_dev_a,signed_dev_b,ratio_a,"
      "ratio_b,helpful_a,total_a,helpful_b,total_b\n";
  for (const auto& p : pairs) {
    out += csv_quote(p.review_a) + ',' + csv_quote(p.review_b) + ',' +
           fmt_double(p.similarity) + ',' + fmt_double(p.signed_dev_a) + ',' +
           fmt_double(p.signed_dev_b) + ',' + fmt_double(p.ratio_a) + ',' +
           fmt_double(p.ratio_b) + ',' + std::to_string(p.helpful_a) + ',' +
           std::to_string(p.total_a) + ',' + std::to_string(p.helpful_b) +
           ',' + std::to_string(p.total_b) + '\n';
  }
  return out;
}

int run_dedup(const std::string& input, double threshold,
              const std::string& out, int threads) {
  const Corpus corpus = load_corpus_file(input, SourceFormat::kJsonl);
  const auto pairs = dedup::find_plagiarized_pairs(corpus, threshold, threads);
  write_file(out, pairs_to_csv(pairs));
  return 0;
}

// -------------------------------------------------------------------- mh

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        field += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        field += c;
      }
    } else if (c == '"' && field.empty()) {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(field));
      field.clear();
    } else {
      field += c;
    }
  }
  fields.push_back(std::move(field));
  return fields;
}

std::vector<dedup::PlagiarizedPair> load_pairs_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open pairs file: " + path);
  std::string line;
  if (!std::getline(in, line))
    throw std::runtime_error("empty pairs file: " + path);
  std::vector<dedup::PlagiarizedPair> pairs;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() != 11)
      throw std::runtime_error("pairs file line " + std::to_string(line_no) +
                               ": expected 11 columns");
    dedup::PlagiarizedPair p;
    p.review_a = f[0];
    p.review_b = f[1];
    p.similarity = std::stod(f[2]);
    p.signed_dev_a = std::stod(f[3]);
    p.signed_dev_b = std::stod(f[4]);
    p.abs_dev_a = std::fabs(p.signed_dev_a);
    p.abs_dev_b = std::fabs(p.signed_dev_b);
    p.ratio_a = std::stod(f[5]);
    p.ratio_b = std::stod(f[6]);
    p.helpful_a = std::stoi(f[7]);
    p.total_a = std::stoi(f[8]);
    p.helpful_b = std::stoi(f[9]);
    p.total_b = std::stoi(f[10]);
    pairs.push_back(std::move(p));
  }
  return pairs;
}

const char* verdict_symbol(mh::Verdict v) {
  switch (v) {
    case mh::Verdict::kGreater: return "≻";  // ≻
    case mh::Verdict::kLess: return "≺";     // ≺
    case mh::Verdict::kNone: return " ";
  }
  return " ";
}

const char* verdict_name(mh::Verdict v) {
  switch (v) {
    case mh::Verdict::kGreater: return "GREATER";
    case mh::Verdict::kLess: return "LESS";
    case mh::Verdict::kNone: return "NONE";
  }
  return "NONE";
}

std::string grid_to_text(const mh::VerdictGrid& grid) {
  std::ostringstream os;
  auto cell_symbol = [&](double i, double j) -> std::string {
    auto it = grid.cells.find({i, j});
    if (it == grid.cells.end() || !it->second) return " ";
    return verdict_symbol(it->second->verdict);
  };
  const auto bins = mh::axis_bins(grid.axis);
  if (grid.axis == mh::Axis::kMirrored) {
    os << "-i \\ i";
    for (double v : bins) os << '\t' << fmt_double(v);
    os << '\n' << "      ";
    for (double v : bins) os << '\t' << cell_symbol(-v, v);
    os << '\n';
    return os.str();
  }
  os << "i \\ j";
  for (std::size_t y = 1; y < bins.size(); ++y) os << '\t' << fmt_double(bins[y]);
  os << '\n';
  for (std::size_t x = 0; x + 1 < bins.size(); ++x) {
    os << fmt_double(bins[x]);
    for (std::size_t y = 1; y < bins.size(); ++y) {
      os << '\t';
      if (y > x) os << cell_symbol(bins[x], bins[y]);
    }
    os << '\n';
  }
  return os.str();
}

std::string grid_to_json(const mh::VerdictGrid& grid) {
  const char* axis_name = "abs";
  switch (grid.axis) {
    case mh::Axis::kAbsolute: axis_name = "abs"; break;
    case mh::Axis::kSignedNegative: axis_name = "signed-neg"; break;
    case mh::Axis::kSignedPositive: axis_name = "signed-pos"; break;
    case mh::Axis::kMirrored: axis_name = "mirror"; break;
  }
  json cells = json::array();
  for (const auto& [key, result] : grid.cells) {
    json cell{{"i", key.first}, {"j", key.second}};
    if (result) {
      cell["empty"] = false;
      cell["odds_ratio"] = result->odds_ratio;
      cell["ci_low"] = result->ci_low;
      cell["ci_high"] = result->ci_high;
      cell["verdict"] = verdict_name(result->verdict);
      cell["n_strata"] = result->n_strata;
      cell["degenerate"] = result->degenerate;
    } else {
      cell["empty"] = true;
    }
    cells.push_back(std::move(cell));
  }
  return json{{"axis", axis_name}, {"cells", std::move(cells)}}.dump(2) + "\n";
}

int run_mh(const std::string& pairs_path, const std::string& axis_name,
           const std::string& out) {
  mh::Axis axis = mh::Axis::kAbsolute;
  if (axis_name == "signed-neg") axis = mh::Axis::kSignedNegative;
  else if (axis_name == "signed-pos") axis = mh::Axis::kSignedPositive;
  else if (axis_name == "mirror") axis = mh::Axis::kMirrored;
  const auto pairs = load_pairs_csv(pairs_path);
  const auto grid = mh::verdict_grid(pairs, axis);
  write_file(out, grid_to_text(grid));
  write_file(out + ".json", grid_to_json(grid));
  return 0;
}

// ------------------------------------------------------------------ model

model::Kernel make_kernel(const std::string& family, double scale) {
  if (family == "triangular") return model::make_triangular(scale);
  return model::make_gaussian(scale);
}

model::MixtureModel make_model(double p, double alpha, double mu,
                               const model::Kernel& kernel) {
  model::MixtureModel m;
  m.p = p;
  m.alpha = alpha;
  m.mu = mu;
  m.kernel_f = kernel;
  m.kernel_g = kernel;
  return m;
}

std::vector<double> parse_double_list(const std::string& list) {
  std::vector<double> values;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) values.push_back(std::stod(item));
  }
  return values;
}

int run_model_verify(double p, const std::string& alpha_list,
                     const std::string& kernel_family, double scale,
                     double mu, bool quiet) {
  const auto alphas = parse_double_list(alpha_list);
  if (alphas.empty()) {
    std::cerr << "model verify: --alpha-list must name at least one alpha\n";
    return 1;
  }
  const model::Kernel kernel = make_kernel(kernel_family, scale);
  const auto report =
      model::verify_unimodal_bimodal_transition(p, kernel, mu, alphas);
  bool ok = report.all_pass();
  auto print = [&](const model::TheoremReport& rep, const char* title) {
    if (!quiet) std::cerr << title << '\n';
    for (const auto& c : rep.checks) {
      if (!quiet)
        std::cerr << "  alpha=" << fmt_double(c.alpha) << ": "
                  << (c.boundary ? "BOUNDARY" : (c.pass ? "PASS" : "FAIL"))
                  << " (" << c.detail << ")\n";
    }
  };
  print(report, "unimodal/bimodal transition checks:");
  if (p != 0.5) {
    // Translate-kernel argmax-side refinement, on the below-transition
    // samples only.
    const auto [transition, ignored] = model::estimate_transition_alphas(
        p, kernel, mu, std::max(8.0 * scale / std::min(p, 1.0 - p),
                                1.5 * *std::max_element(alphas.begin(),
                                                        alphas.end())),
        1e-4);
    std::vector<double> below;
    for (double a : alphas)
      if (a < transition) below.push_back(a);
    if (!below.empty()) {
      const auto side = model::verify_argmax_side(p, kernel, mu, below);
      print(side, "argmax-side checks (below transition):");
      ok = ok && side.all_pass();
    }
  }
  if (!quiet)
    std::cerr << (ok ? "all checks passed\n" : "some checks FAILED\n");
  return ok ? 0 : 2;
}

int run_model_simulate(double p, double alpha, double mu,
                       const std::string& kernel_family, double scale,
                       double tolerance, int evaluators, int reviews_per_score,
                       std::uint64_t seed, const std::string& out,
                       int threads) {
  const auto m = make_model(p, alpha, mu, make_kernel(kernel_family, scale));
  model::SimulationConfig config;
  config.tolerance = tolerance;
  config.n_evaluators_per_review = evaluators;
  config.n_reviews_per_score = reviews_per_score;
  config.seed = seed;
  const Corpus corpus = model::simulate_helpfulness(m, config, threads);
  std::ostringstream os;
  save_jsonl(corpus, os);
  write_file(out, os.str());
  return 0;
}

int run_model_density(double p, double alpha, double mu,
                      const std::string& kernel_family, double scale,
                      double xmin, double xmax, double step,
                      const std::string& out) {
  const auto m = make_model(p, alpha, mu, make_kernel(kernel_family, scale));
  std::string csv = "x,f,g,h\n";
  for (double x = xmin; x <= xmax + 1e-12; x += step) {
    const double f = m.kernel_f.density(x - m.mu_f());
    const double g = m.kernel_g.density(x - m.mu_g());
    csv += fmt_double(x) + ',' + fmt_double(f) + ',' + fmt_double(g) + ',' +
           fmt_double(m.p * f + m.q() * g) + '\n';
  }
  write_file(out, csv);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"review helpfulness analysis toolkit"};
  app.require_subcommand(1);

  int threads = 0;
  std::uint64_t seed = 0;
  bool quiet = false;
  app.add_option("--threads", threads, "worker threads (0 = auto)");
  app.add_option("--seed", seed, "random seed");
  app.add_flag("--quiet", quiet, "suppress progress reports");

  // ingest
  IngestOptions ingest;
  auto* cmd_ingest = app.add_subcommand("ingest", "load, validate and filter a corpus");
  cmd_ingest->add_option("input", ingest.input, "input file")->required();
  cmd_ingest->add_option("--format", ingest.format, "jsonl or csv")
      ->check(CLI::IsMember({"jsonl", "csv"}));
  cmd_ingest->add_option("--min-votes", ingest.min_votes, "minimum total votes");
  cmd_ingest->add_option("--label", ingest.label, "corpus label");
  cmd_ingest->add_flag("--collapse-versions,!--no-collapse-versions",
                       ingest.collapse_versions,
                       "collapse mechanical cross-postings");
  cmd_ingest->add_option("--out", ingest.out, "normalized JSONL output")
      ->required();

  // stats
  std::string stats_input, stats_mode = "signed", stats_out;
  double stats_variance_bin = 0.0;
  auto* cmd_stats = app.add_subcommand("stats", "deviation/helpfulness curve");
  cmd_stats->add_option("--input", stats_input, "corpus JSONL")->required();
  cmd_stats->add_option("--mode", stats_mode, "signed or absolute")
      ->check(CLI::IsMember({"signed", "absolute"}));
  auto* vb_opt = cmd_stats->add_option("--variance-bin", stats_variance_bin,
                                       "restrict to one variance bin");
  cmd_stats->add_option("--out", stats_out, "curve CSV output")->required();

  // summarize
  std::string summarize_input, summarize_out;
  auto* cmd_summarize = app.add_subcommand("summarize", "corpus summary");
  cmd_summarize->add_option("--input", summarize_input, "corpus JSONL")
      ->required();
  cmd_summarize->add_option("--out", summarize_out, "summary JSON output")
      ->required();

  // dedup
  std::string dedup_input, dedup_out;
  double dedup_threshold = 0.70;
  auto* cmd_dedup = app.add_subcommand("dedup", "find near-duplicate review pairs");
  cmd_dedup->add_option("--input", dedup_input, "corpus JSONL")->required();
  cmd_dedup->add_option("--threshold", dedup_threshold,
                        "pair similarity threshold");
  cmd_dedup->add_option("--out", dedup_out, "pairs CSV output")->required();

  // mh
  std::string mh_pairs, mh_axis = "abs", mh_out;
  auto* cmd_mh = app.add_subcommand("mh", "stratified odds-ratio verdict grid");
  cmd_mh->add_option("--pairs", mh_pairs, "pairs CSV")->required();
  cmd_mh->add_option("--axis", mh_axis, "abs, signed-neg, signed-pos or mirror")
      ->check(CLI::IsMember({"abs", "signed-neg", "signed-pos", "mirror"}));
  cmd_mh->add_option("--out", mh_out, "grid text output (+ .json sidecar)")
      ->required();

  // model
  auto* cmd_model = app.add_subcommand("model", "mixture model tools");
  cmd_model->require_subcommand(1);
  double m_p = 0.5, m_alpha = 0.0, m_mu = 0.0, m_scale = 1.0;
  double m_tol = 0.55, m_xmin = -6.0, m_xmax = 6.0, m_step = 0.01;
  int m_evaluators = 1000, m_reviews = 1;
  std::string m_kernel = "gaussian", m_alpha_list, m_out;

  auto* cmd_verify = cmd_model->add_subcommand(
      "verify", "numerically check the mixture's mode structure");
  cmd_verify->add_option("--p", m_p, "balance")->required();
  cmd_verify->add_option("--alpha-list", m_alpha_list, "comma-separated alphas")
      ->required();
  cmd_verify->add_option("--kernel", m_kernel, "kernel family")
      ->check(CLI::IsMember({"gaussian"}));
  cmd_verify->add_option("--scale", m_scale, "kernel scale");
  cmd_verify->add_option("--mu", m_mu, "population mean");

  auto* cmd_simulate =
      cmd_model->add_subcommand("simulate", "generate a synthetic corpus");
  cmd_simulate->add_option("--p", m_p, "balance")->required();
  cmd_simulate->add_option("--alpha", m_alpha, "controversy level")->required();
  cmd_simulate->add_option("--mu", m_mu, "population mean");
  cmd_simulate->add_option("--kernel", m_kernel, "kernel family")
      ->check(CLI::IsMember({"gaussian", "triangular"}));
  cmd_simulate->add_option("--scale", m_scale, "kernel scale");
  cmd_simulate->add_option("--tol", m_tol, "evaluator tolerance");
  cmd_simulate->add_option("--evaluators", m_evaluators,
                           "evaluators per review");
  cmd_simulate->add_option("--reviews-per-score", m_reviews,
                           "synthetic products per score grid");
  cmd_simulate->add_option("--out", m_out, "corpus JSONL output")->required();

  auto* cmd_density =
      cmd_model->add_subcommand("density", "tabulate f, g and the mixture");
  cmd_density->add_option("--p", m_p, "balance")->required();
  cmd_density->add_option("--alpha", m_alpha, "controversy level")->required();
  cmd_density->add_option("--mu", m_mu, "population mean");
  cmd_density->add_option("--kernel", m_kernel, "kernel family")
      ->check(CLI::IsMember({"gaussian", "triangular"}));
  cmd_density->add_option("--scale", m_scale, "kernel scale");
  cmd_density->add_option("--xmin", m_xmin, "grid start");
  cmd_density->add_option("--xmax", m_xmax, "grid end");
  cmd_density->add_option("--step", m_step, "grid step");
  cmd_density->add_option("--out", m_out, "density CSV output")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*cmd_ingest) return run_ingest(ingest);
    if (*cmd_stats)
      return run_stats(stats_input, stats_mode,
                       vb_opt->count() ? std::optional<double>(stats_variance_bin)
                                       : std::nullopt,
                       stats_out);
    if (*cmd_summarize) return run_summarize(summarize_input, summarize_out);
    if (*cmd_dedup)
      return run_dedup(dedup_input, dedup_threshold, dedup_out, threads);
    if (*cmd_mh) return run_mh(mh_pairs, mh_axis, mh_out);
    if (*cmd_model) {
      if (*cmd_verify)
        return run_model_verify(m_p, m_alpha_list, m_kernel, m_scale, m_mu,
                                quiet);
      if (*cmd_simulate)
        return run_model_simulate(m_p, m_alpha, m_mu, m_kernel, m_scale,
                                  m_tol, m_evaluators, m_reviews, seed, m_out,
                                  threads);
      if (*cmd_density)
        return run_model_density(m_p, m_alpha, m_mu, m_kernel, m_scale,
                                 m_xmin, m_xmax, m_step, m_out);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  std::cerr << "error: no subcommand selected\n";
  return 1;
}
