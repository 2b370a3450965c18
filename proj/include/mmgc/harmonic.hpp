#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "mmgc/graph.hpp"

namespace mmgc {

/// A clamped vertex: index into the graph and its label (+1 or -1).
struct LabeledVertex {
  std::size_t index;
  int label;
};

struct HarmonicConfig {
  double gamma_g = 0.0;
  double solver_tol = 1e-10;
  std::size_t max_iter = 10000;
};

struct SoftHarmonicConfig {
  double c_l = 1.0;
  double c_u = 0.01;
  double gamma_g = 0.0;

  /// The regime the stability bound assumes: c_l = 1 and 0 < c_u < c_l.
  bool bound_compatible() const { return c_l == 1.0 && c_u > 0.0 && c_u < c_l; }
};

struct HarmonicSolution {
  Eigen::VectorXd values;     // ell, one entry per vertex
  std::vector<bool> labeled;  // membership in the labeled set
  double gamma_g = 0.0;
  double residual = 0.0;      // |A x - b| of the solved system
  std::vector<std::string> warnings;

  std::size_t size() const { return static_cast<std::size_t>(values.size()); }
  double confidence(std::size_t i) const;
};

/// Random-walk view of the solution on the unlabeled vertices: probability
/// of absorption at a +1 vertex, at a -1 vertex, or at the sink.
struct AbsorptionDecomposition {
  std::vector<std::size_t> unlabeled;  // vertex of each entry below
  Eigen::VectorXd p_plus;
  Eigen::VectorXd p_minus;
  Eigen::VectorXd sink_mass;
};

/// Points whose confidence reaches epsilon, with sgn(ell) as their label.
struct InducedSet {
  std::vector<std::size_t> indices;
  std::vector<int> labels;
  std::size_t n_eps = 0;        // excluded count
  bool zero_sign_mapped = false; // some ell_i == 0 was kept as +1 (epsilon == 0)
};

/// Hard-constrained solution: ell_l = y_l, (L_uu + gamma_g I) ell_u = W_ul ell_l.
/// Throws SingularSystem when gamma_g == 0 and a component has no label.
HarmonicSolution solve_hard(const GraphLaplacian& L, std::span<const LabeledVertex> labels, const HarmonicConfig& cfg = {});

/// Soft-constrained solution ell = (C + L + gamma_g I)^-1 C y with C_ii = c_l
/// on labeled vertices and c_u elsewhere; y is the label on l and 0 off l.
HarmonicSolution solve_soft(const GraphLaplacian& L, std::span<const LabeledVertex> labels, const SoftHarmonicConfig& cfg);

AbsorptionDecomposition absorption_decomposition(const SimilarityGraph& g, std::span<const LabeledVertex> labels,
                                                 double gamma_g);

InducedSet threshold_labels(const HarmonicSolution& h, double epsilon);

/// CSV with header "index,ell,confidence,kept".
void write_solution_csv(const HarmonicSolution& h, double epsilon, std::ostream& out);

}  // namespace mmgc
