#pragma once

#include <span>

#include <Eigen/Core>

#include "mmgc/graph.hpp"
#include "mmgc/harmonic.hpp"
#include "mmgc/svm.hpp"

namespace mmgc {

struct GraphCutConfig {
  double gamma_g = 0.0;
  double epsilon = 1e-6;
  KernelSpec kernel;
  double gamma = 0.1;
  bool bias = true;
  double svm_tol = 1e-6;
  std::size_t svm_max_passes = 10000;
  // Soft-constrained harmonic stage with these weights instead of the hard one.
  bool soft_mode = false;
  double c_l = 1.0;
  double c_u = 0.01;
};

struct GraphCutResult {
  SvmModel model;
  HarmonicSolution harmonic;
  InducedSet induced;
  // The induced set held one class only; the model was trained on the labeled points.
  bool fell_back_to_labeled = false;
};

/// Max-margin graph cut: harmonic solution on the graph, epsilon threshold,
/// then a hinge-loss kernel machine on the kept points labeled sgn(ell).
/// `points` are the graph's vertices, row i is vertex i.
GraphCutResult train_graph_cut(const Eigen::MatrixXd& points, const SimilarityGraph& g,
                               std::span<const LabeledVertex> labels, const GraphCutConfig& cfg);

/// Same, reusing a precomputed harmonic solution.
GraphCutResult train_graph_cut(const Eigen::MatrixXd& points, const HarmonicSolution& harmonic,
                               std::span<const LabeledVertex> labels, const GraphCutConfig& cfg);

/// Mean zero-one loss of sgn(score) against truth; a score of exactly 0 counts as +1.
double misclassification_rate(const SvmModel& model, const Eigen::MatrixXd& points, std::span<const int> truth);
double misclassification_rate(const Eigen::VectorXd& scores, std::span<const int> truth);

}  // namespace mmgc
