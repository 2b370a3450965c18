#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "mmgc/dataset.hpp"
#include "mmgc/graph.hpp"
#include "mmgc/harmonic.hpp"
#include "mmgc/svm.hpp"

namespace mmgc {

// ---------------------------------------------------------------------------
// Synthetic two-ribbon problem
// ---------------------------------------------------------------------------

/// Two 9x2 ribbons of integer grid points, {-4..4} x {-2,-1} (class +1) and
/// {-4..4} x {1,2} (class -1), joined by a radius-1 Gaussian graph with
/// bandwidth 2. (-4,-2) is labeled +1 and (4,2) is labeled -1.
struct SyntheticProblem {
  Dataset data;                        // class ids "bottom" / "top"
  SimilarityGraph graph;
  std::vector<LabeledVertex> labels;
  std::vector<int> truth;              // ribbon label of every point
};

SyntheticProblem generate_synthetic();

/// Kernel used on the synthetic problem for a family name (linear, cubic, rbf).
KernelSpec synthetic_kernel(const std::string& family);
/// The linear kernel is fit without a bias on the synthetic problem.
bool synthetic_uses_bias(const KernelSpec& kernel);

// ---------------------------------------------------------------------------
// Result tables
// ---------------------------------------------------------------------------

struct ResultRow {
  std::string dataset;
  std::string task;
  std::string algorithm;  // svm, mr, gc
  std::string kernel;     // family name
  double fraction = 0.0;
  int repetition = 0;
  double gamma = 0.0;
  double gamma_u = 0.0;
  double gamma_g = 0.0;
  double epsilon = 0.0;
  double val_error = 0.0;
  double test_error = 0.0;
  std::size_t induced_size = 0;
  double seconds = 0.0;
  std::string failure;                   // nonempty when the cell failed
  std::map<std::string, double> extras;  // study-specific columns
};

struct ResultTable {
  std::vector<ResultRow> rows;  // one per (dataset, task, algorithm, kernel, fraction, repetition)
  std::vector<ResultRow> grid;  // every evaluated parameter cell
  std::vector<std::string> extra_columns;

  void sort_rows();
};

/// Mean over tasks and repetitions of every numeric column, grouped by
/// (dataset, algorithm, kernel, fraction, gamma_g / epsilon when swept).
struct SummaryRow {
  std::string dataset;
  std::string algorithm;
  std::string kernel;
  double fraction = 0.0;
  double gamma_g = 0.0;
  double epsilon = 0.0;
  std::size_t count = 0;
  double val_error = 0.0;
  double test_error = 0.0;
  double induced_size = 0.0;
  std::map<std::string, double> extras;
};

/// Groups by (dataset, algorithm, kernel, fraction), and additionally by
/// (gamma_g, epsilon) when `by_parameters` is set. Failed rows are skipped.
std::vector<SummaryRow> summarize(const ResultTable& table, bool by_parameters = false);

enum class ReportFormat { csv, json };

extern const char* const kResultCsvHeader;

/// Writes <dir>/summary.<ext> and <dir>/cells.<ext>. Grid cells go to
/// grid.csv in CSV and into cells.json (under "grid") in JSON. CSV floats
/// carry 6 significant digits, JSON keeps full precision. Returns the written
/// paths.
std::vector<std::string> emit_reports(const ResultTable& table, ReportFormat format, const std::string& dir,
                                      bool summary_by_parameters = false);

std::string table_to_json(const ResultTable& table, bool summary_by_parameters = false);
ResultTable table_from_json(const std::string& text);
std::string table_to_csv(const std::vector<ResultRow>& rows, const std::vector<std::string>& extra_columns);

// ---------------------------------------------------------------------------
// Studies
// ---------------------------------------------------------------------------

/// Scores of a trained model on a uniform grid over the data's bounding box
/// inflated by one unit.
struct ProbeDump {
  std::string algorithm;
  std::string kernel;
  double gamma_g = 0.0;
  Eigen::VectorXd xs;
  Eigen::VectorXd ys;
  Eigen::MatrixXd scores;  // scores(iy, ix)
};

struct SyntheticStudy {
  ResultTable table;  // extras: train_error
  std::vector<ProbeDump> probes;
};

SyntheticStudy run_synthetic_study(const std::vector<double>& gamma_g_values, const std::vector<std::string>& kernels,
                                   double gamma = 0.1, double epsilon = 0.01, std::size_t probe_resolution = 100);

void write_probe_csv(const ProbeDump& probe, const std::string& path);

struct ExperimentConfig {
  std::string source = "synthetic";  // "synthetic" or a CSV path
  std::string dataset_name;          // defaults to the file stem
  LabelColumn label_column = -1L;
  bool header = false;
  TaskScheme scheme = TaskScheme::one_vs_one;
  std::size_t max_tasks = 0;            // 0 keeps every task
  std::size_t max_points_per_task = 600;
  bool standardize = true;

  std::vector<std::string> algorithms{"svm", "mr", "gc"};
  std::vector<std::string> kernels{"linear", "cubic", "rbf"};
  std::vector<double> labeled_fractions{0.01, 0.1};

  // gamma in [gamma_lo, gamma_hi] * n_l, gamma_u in [gamma_u_lo, gamma_u_hi] * gamma.
  double gamma_lo = 0.01, gamma_hi = 0.1;
  std::size_t gamma_points = 5;
  double gamma_u_lo = 1e-3, gamma_u_hi = 1e3;
  std::size_t gamma_u_points = 7;
  bool link_gamma_g = true;  // gamma_g = gamma / gamma_u

  double epsilon = 1e-6;
  std::size_t knn_k = 5;
  std::size_t repetitions = 5;
  std::uint64_t seed = 0;
  bool record_timing = false;
  std::size_t threads = 0;  // 0 = hardware concurrency

  // Threshold study: gamma = threshold_gamma_factor * n_l, first kernel in `kernels`.
  double threshold_gamma_factor = 0.1;

  double svm_tol = 1e-3;
};

/// Log-spaced grid of `points` values from lo to hi inclusive.
std::vector<double> log_grid(double lo, double hi, std::size_t points);

/// Loads cfg.source (CSV or the synthetic problem) as a labeled dataset and
/// returns its binary tasks after the max_tasks / max_points_per_task caps.
struct PreparedData {
  std::string name;
  Dataset data;
  std::vector<BinaryTask> tasks;
};
PreparedData prepare_data(const ExperimentConfig& cfg);

ResultTable run_uci_protocol(const ExperimentConfig& cfg);
ResultTable run_uci_protocol(const ExperimentConfig& cfg, const PreparedData& data);

/// extras: thresholded_risk, induced_risk, train_error, kept_fraction, n_eps, n_labeled.
ResultTable run_threshold_study(const ExperimentConfig& cfg, const std::vector<double>& epsilons,
                                const std::vector<double>& gamma_g_values);
ResultTable run_threshold_study(const ExperimentConfig& cfg, const PreparedData& data,
                                const std::vector<double>& epsilons, const std::vector<double>& gamma_g_values);

}  // namespace mmgc
