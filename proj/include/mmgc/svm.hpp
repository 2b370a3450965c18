#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>

#include <Eigen/Core>

namespace mmgc {

/// k(x, x') for one of three kernel families:
///   linear      <x, x'>
///   polynomial  (scale <x, x'> + offset)^degree
///   rbf         exp(-|x - x'|^2 / (2 width^2))
struct KernelSpec {
  enum class Kind { linear, polynomial, rbf };

  Kind kind = Kind::linear;
  int degree = 3;
  double offset = 1.0;
  double scale = 1.0;
  double width = 1.0;

  static KernelSpec linear() { return {}; }
  static KernelSpec polynomial(int degree, double offset = 1.0, double scale = 1.0);
  static KernelSpec cubic(double scale = 1.0) { return polynomial(3, 1.0, scale); }
  static KernelSpec rbf(double width);

  double operator()(const Eigen::Ref<const Eigen::VectorXd>& a, const Eigen::Ref<const Eigen::VectorXd>& b) const;

  /// "linear", "poly:<degree>:<offset>:<scale>" or "rbf:<width>".
  std::string descriptor() const;
  static KernelSpec parse(const std::string& descriptor);
  /// Short family name used in reports: linear, cubic, poly<d>, rbf.
  std::string family() const;
};

/// Weights of the objective sum_i hinge(y_i f(x_i)) + gamma |f|_K^2.
struct SvmConfig {
  double gamma = 1.0;
  bool bias = true;
  double tol = 1e-6;
  std::size_t max_passes = 10000;
};

struct SvmModel {
  Eigen::MatrixXd train_points;   // one row per expansion point
  Eigen::VectorXd coefficients;   // alpha_i
  Eigen::VectorXd dual;           // lambda_i in [0, box]
  Eigen::VectorXd labels;         // y_i of the training points (+-1)
  double bias = 0.0;
  double box = 0.0;               // 1 / (2 gamma)
  KernelSpec kernel;
  double objective_value = 0.0;   // primal
  double dual_value = 0.0;        // in the same units as the primal
  double duality_gap = 0.0;
  std::size_t iterations = 0;

  /// sum_i alpha_i k(x_i, x) + b. Throws InvalidArgument on a dimension mismatch.
  double predict(const Eigen::Ref<const Eigen::VectorXd>& x) const;
  Eigen::VectorXd predict_rows(const Eigen::MatrixXd& points) const;
};

/// Solution of the box-constrained hinge dual
///   min 1/2 l^T Q l - sum l,  Q_ij = y_i y_j K_ij,  0 <= l <= box
/// (plus sum y_i l_i = 0 when a bias is fitted).
struct HingeDual {
  Eigen::VectorXd lambda;
  Eigen::VectorXd gradient;  // Q l - 1
  double bias = 0.0;
  double max_violation = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
};

/// SMO dual coordinate descent. With a bias it updates the maximal violating
/// pair, otherwise the single most violating coordinate; ties go to the
/// smaller index. Warm-started from `start` when it is nonempty.
HingeDual solve_hinge_dual(const Eigen::MatrixXd& gram, const Eigen::VectorXd& y, double box, bool bias, double eps,
                           std::size_t max_iter, const Eigen::VectorXd& start = {});

Eigen::MatrixXd gram_matrix(const KernelSpec& kernel, const Eigen::MatrixXd& points);
Eigen::MatrixXd cross_gram(const KernelSpec& kernel, const Eigen::MatrixXd& rows, const Eigen::MatrixXd& cols);

/// Smallest eigenvalue of a symmetric matrix is at least -jitter.
bool is_positive_semidefinite(const Eigen::MatrixXd& gram, double jitter = 1e-8);

double hinge_loss(double score, int y);

/// Exact minimizer over b of sum_i hinge(y_i (g_i + b)); `start` is returned
/// unless some breakpoint does strictly better.
double optimal_hinge_bias(const Eigen::VectorXd& g, const Eigen::VectorXd& y, double start);

/// w = sum_i alpha_i x_i of a linear-kernel model. Throws for other kernels.
Eigen::VectorXd linear_weights(const SvmModel& model);

/// Trains on rows of `points` with labels +-1. Throws InvalidArgument for a
/// single-class input and ConvergenceError (carrying the gap) at max_passes.
SvmModel train_svm(const Eigen::MatrixXd& points, std::span<const int> labels, const KernelSpec& kernel,
                   const SvmConfig& cfg);

/// Primal objective sum hinge + gamma alpha^T K alpha of a model on its own training set.
double svm_primal_objective(const SvmModel& model, double gamma);

/// Model CSV: "kernel,<descriptor>", "bias,<b>", then "index,alpha" rows for
/// every nonzero coefficient.
void write_model_csv(const SvmModel& model, std::ostream& out);

}  // namespace mmgc
