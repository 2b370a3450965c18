#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Core>

namespace mmgc {

/// Points stored row-wise: features(i, m) is coordinate m of point i.
struct Dataset {
  Eigen::MatrixXd features;
  std::optional<std::vector<std::string>> class_labels;

  std::size_t size() const { return static_cast<std::size_t>(features.rows()); }
  std::size_t dimension() const { return static_cast<std::size_t>(features.cols()); }

  /// Throws InvalidArgument when the invariants (n, K >= 1, finite values,
  /// label count == n) do not hold.
  void validate() const;

  /// Copy of the selected rows (and their class labels).
  Dataset subset(std::span<const std::size_t> rows) const;
};

/// A two-class view of a dataset. signed_labels[k] is the label of row
/// point_indices[k]; positive_class maps to +1.
struct BinaryTask {
  std::string positive_class;
  std::string negative_class;
  std::vector<std::size_t> point_indices;
  std::vector<int> signed_labels;

  std::size_t size() const { return point_indices.size(); }
};

/// Fold assignment for one task. Every index is a position into the task
/// (0 .. task.size()-1), not a dataset row.
struct SplitSpec {
  std::vector<std::size_t> train;
  std::vector<std::size_t> validation;
  std::vector<std::size_t> test;
  std::vector<std::size_t> labeled;    // subset of train
  std::vector<std::size_t> unlabeled;  // train \ labeled
  std::uint64_t seed = 0;
  // Set when the requested fraction had to be raised to cover both classes.
  bool labeled_count_promoted = false;
};

struct StandardizationStats {
  Eigen::VectorXd mean;
  Eigen::VectorXd stddev;  // population (divide-by-n)
  double sigma_bar = 0.0;  // mean of stddev
};

/// Which CSV column holds the class label. A negative index counts from the
/// end (-1 is the last column).
using LabelColumn = std::variant<std::monostate, long, std::string>;

Dataset load_csv_dataset(const std::string& path, const LabelColumn& label_column, bool header);
Dataset parse_csv_dataset(const std::string& text, const LabelColumn& label_column, bool header);

void write_csv_dataset(const Dataset& d, const std::string& path);

StandardizationStats compute_standardization(const Dataset& d, std::span<const std::size_t> over);

/// Applies (x - mean) / std; zero-variance features are only centered.
Dataset apply_standardization(const Dataset& d, const StandardizationStats& stats);

enum class TaskScheme { one_vs_one, consecutive_pairs };

/// Distinct class ids in canonical order: numeric order when every id parses
/// as a number, lexicographic otherwise.
std::vector<std::string> ordered_classes(const Dataset& d);

std::vector<BinaryTask> decompose_binary_tasks(const Dataset& d, TaskScheme scheme);

/// Thirds for train/validation/test, stratified per class, plus a labeled
/// subset of train holding at least one point of each class. Deterministic in
/// (task, labeled_fraction, seed).
SplitSpec make_split(const BinaryTask& task, double labeled_fraction, std::uint64_t seed);

/// Deterministic subsample of at most max_points, keeping class proportions
/// roughly intact. Returns the task unchanged when it is already small enough.
BinaryTask subsample_task(const BinaryTask& task, std::size_t max_points, std::uint64_t seed);

}  // namespace mmgc
