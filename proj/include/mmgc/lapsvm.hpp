#pragma once

#include <span>

#include <Eigen/Core>

#include "mmgc/graph.hpp"
#include "mmgc/harmonic.hpp"
#include "mmgc/svm.hpp"

namespace mmgc {

/// Manifold-regularized SVM:
///   sum_{i in l} hinge(y_i f(x_i)) + gamma |f|_K^2 + gamma_u f^T L f
/// with f = sum_j alpha_j k(x_j, .) + b over all graph vertices.
struct LapSvmConfig {
  double gamma = 0.1;
  double gamma_u = 1.0;
  KernelSpec kernel;
  bool bias = true;
  double tol = 1e-6;
  std::size_t max_passes = 10000;
  // gamma_u == 0 reduces to a plain SVM on the labeled points; allowed only on request.
  bool allow_zero_gamma_u = false;
  // Skip the dual reduction and run the primal subgradient method.
  bool force_subgradient = false;
  std::size_t subgradient_iterations = 10000;
  double subgradient_step = 1.0;
};

struct LapSvmResult {
  SvmModel model;  // expansion over all n vertices
  bool used_subgradient = false;
  bool zero_gamma_u = false;
};

LapSvmResult train_lapsvm(const Eigen::MatrixXd& points, const GraphLaplacian& L, std::span<const LabeledVertex> labels,
                          const LapSvmConfig& cfg);

/// The regularized objective above for an arbitrary expansion (alpha, b).
double lapsvm_objective(const Eigen::MatrixXd& gram, const GraphLaplacian& L, std::span<const LabeledVertex> labels,
                        const Eigen::VectorXd& alpha, double bias, double gamma, double gamma_u);

/// Delta_m = sum over ordered vertex pairs of w_ij (x_im - x_jm)^2. Every edge
/// must differ in exactly one coordinate; otherwise InvalidArgument names it.
Eigen::VectorXd axis_aligned_deltas(const SimilarityGraph& g, const Eigen::MatrixXd& points);

/// f^T L f.
double manifold_quadratic_form(const GraphLaplacian& L, const Eigen::VectorXd& f);

/// 1/2 sum_{i,j} w_ij (f_i - f_j)^2, evaluated edge by edge.
double pairwise_smoothness(const SimilarityGraph& g, const Eigen::VectorXd& f);

}  // namespace mmgc
