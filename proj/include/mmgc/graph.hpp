#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "mmgc/dataset.hpp"

namespace mmgc {

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::ColMajor, Eigen::Index>;

/// Gaussian edge weights w_ij = exp(-|x_i - x_j|^2 / bandwidth).
struct WeightSpec {
  double bandwidth = 2.0;

  double weight(double squared_distance) const;
};

/// Symmetric, zero-diagonal, nonnegative weights. Only nonzeros are stored.
struct SimilarityGraph {
  std::size_t n = 0;
  SparseMatrix weights;

  std::size_t edge_count() const;  // undirected edges
};

struct GraphLaplacian {
  SparseMatrix laplacian;   // D - W
  SparseMatrix weights;     // W, kept for the harmonic right-hand side
  Eigen::VectorXd degrees;  // d_i = sum_j w_ij

  std::size_t size() const { return static_cast<std::size_t>(degrees.size()); }
};

/// Random-walk transitions w_ij / (d_i + gamma_g). Without a sink the rows of
/// vertices with positive degree sum to one.
struct TransitionMatrix {
  SparseMatrix probs;
  std::optional<double> sink_gamma;
  std::vector<std::size_t> zero_rows;  // isolated vertices with no sink
};

/// k-NN graph with union symmetrization, brute-force search, ties broken by
/// the smaller vertex index.
SimilarityGraph build_knn_graph(const Eigen::MatrixXd& points, std::size_t k, const WeightSpec& w);
inline SimilarityGraph build_knn_graph(const Dataset& d, std::size_t k, const WeightSpec& w) {
  return build_knn_graph(d.features, k, w);
}

/// Edge iff 0 < |x_i - x_j| <= radius.
SimilarityGraph build_radius_graph(const Eigen::MatrixXd& points, double radius, const WeightSpec& w);
inline SimilarityGraph build_radius_graph(const Dataset& d, double radius, const WeightSpec& w) {
  return build_radius_graph(d.features, radius, w);
}

/// Builds a graph from explicit undirected edges (i, j, w); duplicates are summed.
SimilarityGraph graph_from_edges(std::size_t n, const std::vector<std::tuple<std::size_t, std::size_t, double>>& edges);

GraphLaplacian laplacian(const SimilarityGraph& g);

TransitionMatrix transition_matrix(const SimilarityGraph& g, double gamma_g);

/// Largest eigenvalue of L by power iteration from a fixed start vector.
/// Throws ConvergenceError (with the last estimate) after max_iter steps.
double largest_laplacian_eigenvalue(const GraphLaplacian& L, double tol = 1e-8, std::size_t max_iter = 10000);

/// Connected components; component[i] is the 0-based id of vertex i.
std::vector<std::size_t> connected_components(const SparseMatrix& weights);

/// Edge list "i j w", one undirected edge per line with i < j, 17 significant
/// digits. A leading "# n <count>" line records the vertex count.
void write_edge_list(const SimilarityGraph& g, std::ostream& out);
SimilarityGraph read_edge_list(std::istream& in);
SimilarityGraph load_edge_list(const std::string& path);

}  // namespace mmgc
