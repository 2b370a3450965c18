// mmgc: command-line driver for the semi-supervised experiments.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "mmgc/bounds.hpp"
#include "mmgc/error.hpp"
#include "mmgc/graph.hpp"
#include "mmgc/harmonic.hpp"
#include "mmgc/harness.hpp"

namespace {

struct Options {
  std::vector<std::string> kernels;
  std::vector<double> gamma_g;
  std::vector<double> epsilon;
  std::vector<double> fractions;
  std::size_t reps = 5;
  std::uint64_t seed = 0;
  std::string out;
  std::string format = "json";

  // Experiment knobs beyond the common flags.
  std::vector<std::string> algorithms;
  double gamma = 0.1;
  std::string label_column = "-1";
  bool header = false;
  std::string scheme = "one-vs-one";
  std::size_t max_tasks = 0;
  std::size_t max_points = 600;
  std::size_t knn_k = 5;
  std::size_t threads = 0;
  bool no_standardize = false;
  bool timing = false;

  // harmonic
  std::vector<std::string> labels;

  // bounds
  std::size_t h = 3, n = 100, n_l = 10, n_eps = 0;
  double eta = 0.05, delta = 0.05, c_u = 0.01, lambda_max = 2.0;
  std::string graph;
  double risk_induced = 0.0, risk_thresholded = 0.0, risk_soft = 0.0;
};

mmgc::ReportFormat parse_format(const std::string& f) {
  if (f == "json") return mmgc::ReportFormat::json;
  if (f == "csv") return mmgc::ReportFormat::csv;
  throw mmgc::InvalidArgument("unknown format '" + f + "' (expected csv or json)");
}

mmgc::LabelColumn parse_label_column(const std::string& s) {
  if (s.empty() || s == "none") return std::monostate{};
  try {
    std::size_t used = 0;
    const long v = std::stol(s, &used);
    if (used == s.size()) return v;
  } catch (const std::exception&) {
  }
  return s;
}

mmgc::ExperimentConfig experiment_config(const Options& o, const std::string& source) {
  mmgc::ExperimentConfig cfg;
  cfg.source = source;
  cfg.label_column = parse_label_column(o.label_column);
  cfg.header = o.header;
  if (o.scheme == "one-vs-one") cfg.scheme = mmgc::TaskScheme::one_vs_one;
  else if (o.scheme == "consecutive") cfg.scheme = mmgc::TaskScheme::consecutive_pairs;
  else throw mmgc::InvalidArgument("unknown task scheme '" + o.scheme + "'");
  cfg.max_tasks = o.max_tasks;
  cfg.max_points_per_task = o.max_points;
  cfg.standardize = !o.no_standardize;
  if (!o.algorithms.empty()) cfg.algorithms = o.algorithms;
  if (!o.kernels.empty()) cfg.kernels = o.kernels;
  if (!o.fractions.empty()) cfg.labeled_fractions = o.fractions;
  if (o.epsilon.size() == 1) cfg.epsilon = o.epsilon.front();
  cfg.knn_k = o.knn_k;
  cfg.repetitions = o.reps;
  cfg.seed = o.seed;
  cfg.record_timing = o.timing;
  cfg.threads = o.threads;
  return cfg;
}

std::string out_dir(const Options& o) { return o.out.empty() ? std::string(".") : o.out; }

void print_written(const std::vector<std::string>& paths) {
  for (const auto& p : paths) std::cout << p << '\n';
}

int run_synthetic(const Options& o) {
  const std::vector<double> gamma_g = o.gamma_g.empty() ? mmgc::log_grid(1e-4, 1e4, 9) : o.gamma_g;
  const std::vector<std::string> kernels =
      o.kernels.empty() ? std::vector<std::string>{"linear", "cubic", "rbf"} : o.kernels;
  const double eps = o.epsilon.empty() ? 0.01 : o.epsilon.front();
  const auto study = mmgc::run_synthetic_study(gamma_g, kernels, o.gamma, eps);
  const auto dir = out_dir(o);
  print_written(mmgc::emit_reports(study.table, parse_format(o.format), dir, true));
  const auto probe_dir = std::filesystem::path(dir) / "probes";
  std::filesystem::create_directories(probe_dir);
  for (const auto& p : study.probes) {
    std::ostringstream name;
    name << p.algorithm << '_' << p.kernel << "_gg" << std::setprecision(6) << p.gamma_g << ".csv";
    mmgc::write_probe_csv(p, (probe_dir / name.str()).string());
  }
  std::cout << probe_dir.string() << " (" << study.probes.size() << " probe grids)\n";
  return 0;
}

int run_uci(const Options& o, const std::string& csv) {
  if (!o.gamma_g.empty()) std::cerr << "note: --gamma-g is ignored by uci; gamma_g = gamma / gamma_u\n";
  if (o.epsilon.size() > 1) throw mmgc::InvalidArgument("uci takes a single --epsilon");
  const auto cfg = experiment_config(o, csv);
  const auto table = mmgc::run_uci_protocol(cfg);
  print_written(mmgc::emit_reports(table, parse_format(o.format), out_dir(o)));
  return 0;
}

int run_threshold(const Options& o, const std::string& csv) {
  auto cfg = experiment_config(o, csv);
  if (o.fractions.empty()) cfg.labeled_fractions = {0.01};
  const std::vector<double> eps = o.epsilon.empty() ? std::vector<double>{0.0, 1e-6, 1e-3} : o.epsilon;
  const std::vector<double> gamma_g = o.gamma_g.empty() ? mmgc::log_grid(1e-2, 1e5, 8) : o.gamma_g;
  const auto table = mmgc::run_threshold_study(cfg, eps, gamma_g);
  print_written(mmgc::emit_reports(table, parse_format(o.format), out_dir(o), true));
  return 0;
}

std::vector<mmgc::LabeledVertex> parse_labels(const std::vector<std::string>& specs) {
  std::vector<mmgc::LabeledVertex> out;
  for (const auto& s : specs) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw mmgc::InvalidArgument("label '" + s + "' is not of the form index=+1|-1");
    try {
      const long idx = std::stol(s.substr(0, eq));
      const int y = std::stoi(s.substr(eq + 1));
      if (idx < 0) throw mmgc::InvalidArgument("negative vertex index in label '" + s + "'");
      out.push_back({static_cast<std::size_t>(idx), y});
    } catch (const std::logic_error&) {
      throw mmgc::InvalidArgument("label '" + s + "' is not of the form index=+1|-1");
    }
  }
  return out;
}

int run_harmonic(const Options& o, const std::string& edges) {
  if (o.labels.empty()) throw mmgc::InvalidArgument("harmonic needs at least one --label index=+1|-1");
  const auto g = mmgc::load_edge_list(edges);
  const auto labels = parse_labels(o.labels);
  mmgc::HarmonicConfig cfg;
  cfg.gamma_g = o.gamma_g.empty() ? 0.0 : o.gamma_g.front();
  const double eps = o.epsilon.empty() ? 0.0 : o.epsilon.front();
  const auto sol = mmgc::solve_hard(mmgc::laplacian(g), labels, cfg);
  for (const auto& w : sol.warnings) std::cerr << "warning: " << w << '\n';
  if (o.out.empty()) {
    mmgc::write_solution_csv(sol, eps, std::cout);
  } else {
    std::ofstream f(o.out);
    if (!f) throw mmgc::InvalidArgument("cannot write " + o.out);
    mmgc::write_solution_csv(sol, eps, f);
    std::cout << o.out << '\n';
  }
  return 0;
}

int run_bounds(const Options& o) {
  if (o.format != "json") throw mmgc::InvalidArgument("bounds reports are JSON only");
  mmgc::BoundInputs in;
  in.h = o.h;
  in.n = o.n;
  in.n_l = o.n_l;
  in.eta = o.eta;
  in.delta = o.delta;
  in.gamma_g = o.gamma_g.empty() ? 1.0 : o.gamma_g.front();
  in.c_u = o.c_u;
  in.lambda_max = o.lambda_max;
  if (!o.graph.empty()) in.lambda_max = mmgc::largest_laplacian_eigenvalue(mmgc::laplacian(mmgc::load_edge_list(o.graph)));
  in.epsilon = o.epsilon.empty() ? 1e-6 : o.epsilon.front();
  in.n_eps = o.n_eps;
  mmgc::EmpiricalRisks risks;
  risks.induced = o.risk_induced;
  risks.thresholded = o.risk_thresholded;
  risks.soft_label_labeled = o.risk_soft;
  risks.n_eps = o.n_eps;
  const std::string text = mmgc::bound_report_json(mmgc::make_bound_report(in, risks)) + "\n";
  if (o.out.empty()) {
    std::cout << text;
  } else {
    std::ofstream f(o.out);
    if (!f) throw mmgc::InvalidArgument("cannot write " + o.out);
    f << text;
    std::cout << o.out << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Semi-supervised learning with max-margin graph cuts"};
  app.set_config("--config", "", "key=value config file; command-line flags override it");
  app.fallthrough();
  app.require_subcommand(1, 1);

  Options o;
  app.add_option("--kernel", o.kernels, "Kernel families: linear, cubic, rbf (comma separated)")->delimiter(',');
  app.add_option("--gamma-g", o.gamma_g, "Graph regularizer value(s)")->delimiter(',');
  app.add_option("--epsilon", o.epsilon, "Confidence threshold(s)")->delimiter(',');
  app.add_option("--fractions", o.fractions, "Labeled fractions in (0, 1]")->delimiter(',');
  app.add_option("--reps", o.reps, "Repetitions per task and fraction");
  app.add_option("--seed", o.seed, "Random seed");
  app.add_option("--out", o.out, "Output directory (reports) or file (harmonic, bounds)");
  app.add_option("--format", o.format, "Report format: json or csv");

  app.add_option("--algorithms", o.algorithms, "Subset of svm, mr, gc")->delimiter(',');
  app.add_option("--gamma", o.gamma, "Kernel regularizer of the synthetic study");
  app.add_option("--label-column", o.label_column, "CSV label column: index (negative from end), name or none");
  app.add_flag("--header", o.header, "CSV has a header row");
  app.add_option("--scheme", o.scheme, "Task decomposition: one-vs-one or consecutive");
  app.add_option("--max-tasks", o.max_tasks, "Keep only the first N binary tasks (0 = all)");
  app.add_option("--max-points", o.max_points, "Subsample each task to at most N points (0 = all)");
  app.add_option("--knn", o.knn_k, "Neighbors of the k-NN graph");
  app.add_option("--threads", o.threads, "Worker threads (0 = hardware)");
  app.add_flag("--no-standardize", o.no_standardize, "Use raw features");
  app.add_flag("--timing", o.timing, "Record wall time per cell (makes reports nondeterministic)");
  app.add_option("--label", o.labels, "Labeled vertex index=+1|-1 (repeatable)")->delimiter(',');
  app.add_option("--vc-dim", o.h, "VC dimension h");
  app.add_option("--n", o.n, "Number of points");
  app.add_option("--n-l", o.n_l, "Number of labeled points");
  app.add_option("--n-eps", o.n_eps, "Points below the confidence threshold");
  app.add_option("--eta", o.eta, "Inductive confidence parameter");
  app.add_option("--delta", o.delta, "Transductive confidence parameter");
  app.add_option("--c-u", o.c_u, "Unlabeled constraint weight");
  app.add_option("--lambda-max", o.lambda_max, "Largest Laplacian eigenvalue");
  app.add_option("--graph", o.graph, "Edge list to take lambda_max from");
  app.add_option("--risk-induced", o.risk_induced, "Empirical risk against the induced labels");
  app.add_option("--risk-thresholded", o.risk_thresholded, "Thresholded empirical risk (with slack)");
  app.add_option("--risk-soft", o.risk_soft, "Soft-label risk on the labeled points");

  std::string path;
  auto* synthetic = app.add_subcommand("synthetic", "Sweep gamma_g on the two-ribbon problem");
  auto* uci = app.add_subcommand("uci", "Train/validation/test protocol on a labeled CSV");
  uci->add_option("csv", path, "Dataset CSV")->required();
  auto* threshold = app.add_subcommand("threshold", "Confidence-threshold study on a CSV (or 'synthetic')");
  threshold->add_option("csv", path, "Dataset CSV or 'synthetic'")->required();
  auto* harmonic = app.add_subcommand("harmonic", "Harmonic solution on an edge list");
  harmonic->add_option("edge-list", path, "Edge list file")->required();
  auto* bounds = app.add_subcommand("bounds", "Evaluate the generalization bounds");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*synthetic) return run_synthetic(o);
    if (*uci) return run_uci(o, path);
    if (*threshold) return run_threshold(o, path);
    if (*harmonic) return run_harmonic(o, path);
    if (*bounds) return run_bounds(o);
  } catch (const std::exception& e) {
    std::cerr << "mmgc: error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}
