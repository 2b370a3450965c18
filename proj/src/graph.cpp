#include "mmgc/graph.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>
#include <tuple>

#include "mmgc/error.hpp"

namespace mmgc {

namespace {

using Triplet = Eigen::Triplet<double, Eigen::Index>;

SparseMatrix symmetric_from_upper(std::size_t n, const std::vector<Triplet>& upper) {
  std::vector<Triplet> all;
  all.reserve(upper.size() * 2);
  for (const auto& t : upper) {
    all.push_back(t);
    all.emplace_back(t.col(), t.row(), t.value());
  }
  SparseMatrix w(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  w.setFromTriplets(all.begin(), all.end());
  w.makeCompressed();
  return w;
}

Eigen::MatrixXd squared_distances(const Eigen::MatrixXd& points) {
  const Eigen::Index n = points.rows();
  Eigen::MatrixXd d2(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    d2(i, i) = 0.0;
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double v = (points.row(i) - points.row(j)).squaredNorm();
      d2(i, j) = v;
      d2(j, i) = v;
    }
  }
  return d2;
}

}  // namespace

double WeightSpec::weight(double squared_distance) const { return std::exp(-squared_distance / bandwidth); }

std::size_t SimilarityGraph::edge_count() const {
  std::size_t count = 0;
  for (Eigen::Index c = 0; c < weights.outerSize(); ++c)
    for (SparseMatrix::InnerIterator it(weights, c); it; ++it)
      if (it.row() < it.col()) ++count;
  return count;
}

SimilarityGraph build_knn_graph(const Eigen::MatrixXd& points, std::size_t k, const WeightSpec& w) {
  const auto n = static_cast<std::size_t>(points.rows());
  if (k == 0) throw InvalidArgument("k must be positive");
  if (k >= n) throw InvalidArgument("k-NN graph needs k < n (k = " + std::to_string(k) + ", n = " + std::to_string(n) + ")");
  if (!(w.bandwidth > 0.0)) throw InvalidArgument("bandwidth must be positive");

  const Eigen::MatrixXd d2 = squared_distances(points);
  // selected(i, j) != 0 when i picks j or j picks i.
  std::vector<std::vector<std::size_t>> picks(n);
  std::vector<std::size_t> order(n - 1);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t m = 0;
    for (std::size_t j = 0; j < n; ++j)
      if (j != i) order[m++] = j;
    auto closer = [&](std::size_t a, std::size_t b) {
      const double da = d2(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(a));
      const double db = d2(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(b));
      return da < db || (da == db && a < b);
    };
    std::partial_sort(order.begin(), order.begin() + static_cast<long>(k), order.end(), closer);
    picks[i].assign(order.begin(), order.begin() + static_cast<long>(k));
  }

  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t i = 0; i < n; ++i)
    for (auto j : picks[i]) pairs.emplace_back(std::min(i, j), std::max(i, j));
  std::sort(pairs.begin(), pairs.end());
  pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());

  std::vector<Triplet> upper;
  upper.reserve(pairs.size());
  for (auto [i, j] : pairs)
    upper.emplace_back(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j),
                       w.weight(d2(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j))));
  return SimilarityGraph{n, symmetric_from_upper(n, upper)};
}

SimilarityGraph build_radius_graph(const Eigen::MatrixXd& points, double radius, const WeightSpec& w) {
  if (!(radius > 0.0)) throw InvalidArgument("radius must be positive");
  if (!(w.bandwidth > 0.0)) throw InvalidArgument("bandwidth must be positive");
  const auto n = static_cast<std::size_t>(points.rows());
  const double r2 = radius * radius;
  std::vector<Triplet> upper;
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    for (Eigen::Index j = i + 1; j < points.rows(); ++j) {
      const double d2 = (points.row(i) - points.row(j)).squaredNorm();
      if (d2 > 0.0 && d2 <= r2) upper.emplace_back(i, j, w.weight(d2));
    }
  }
  return SimilarityGraph{n, symmetric_from_upper(n, upper)};
}

SimilarityGraph graph_from_edges(std::size_t n, const std::vector<std::tuple<std::size_t, std::size_t, double>>& edges) {
  std::vector<Triplet> upper;
  upper.reserve(edges.size());
  for (const auto& [i, j, w] : edges) {
    if (i >= n || j >= n) throw InvalidArgument("edge endpoint out of range");
    if (i == j) throw InvalidArgument("self loops are not allowed");
    if (!(w >= 0.0) || !std::isfinite(w)) throw InvalidArgument("edge weights must be finite and nonnegative");
    upper.emplace_back(static_cast<Eigen::Index>(std::min(i, j)), static_cast<Eigen::Index>(std::max(i, j)), w);
  }
  return SimilarityGraph{n, symmetric_from_upper(n, upper)};
}

GraphLaplacian laplacian(const SimilarityGraph& g) {
  const auto n = static_cast<Eigen::Index>(g.n);
  GraphLaplacian out;
  out.weights = g.weights;
  out.degrees = Eigen::VectorXd::Zero(n);
  for (Eigen::Index c = 0; c < g.weights.outerSize(); ++c)
    for (SparseMatrix::InnerIterator it(g.weights, c); it; ++it) out.degrees(it.row()) += it.value();

  std::vector<Triplet> entries;
  entries.reserve(static_cast<std::size_t>(g.weights.nonZeros() + n));
  for (Eigen::Index i = 0; i < n; ++i) entries.emplace_back(i, i, out.degrees(i));
  for (Eigen::Index c = 0; c < g.weights.outerSize(); ++c)
    for (SparseMatrix::InnerIterator it(g.weights, c); it; ++it) entries.emplace_back(it.row(), it.col(), -it.value());
  out.laplacian.resize(n, n);
  out.laplacian.setFromTriplets(entries.begin(), entries.end());
  out.laplacian.makeCompressed();
  return out;
}

TransitionMatrix transition_matrix(const SimilarityGraph& g, double gamma_g) {
  if (!(gamma_g >= 0.0)) throw InvalidArgument("gamma_g must be nonnegative");
  const auto n = static_cast<Eigen::Index>(g.n);
  Eigen::VectorXd degrees = Eigen::VectorXd::Zero(n);
  for (Eigen::Index c = 0; c < g.weights.outerSize(); ++c)
    for (SparseMatrix::InnerIterator it(g.weights, c); it; ++it) degrees(it.row()) += it.value();

  TransitionMatrix out;
  if (gamma_g > 0.0) out.sink_gamma = gamma_g;
  std::vector<Triplet> entries;
  for (Eigen::Index c = 0; c < g.weights.outerSize(); ++c)
    for (SparseMatrix::InnerIterator it(g.weights, c); it; ++it) {
      const double denom = degrees(it.row()) + gamma_g;
      if (denom > 0.0) entries.emplace_back(it.row(), it.col(), it.value() / denom);
    }
  for (Eigen::Index i = 0; i < n; ++i)
    if (degrees(i) + gamma_g == 0.0) out.zero_rows.push_back(static_cast<std::size_t>(i));
  out.probs.resize(n, n);
  out.probs.setFromTriplets(entries.begin(), entries.end());
  out.probs.makeCompressed();
  return out;
}

double largest_laplacian_eigenvalue(const GraphLaplacian& L, double tol, std::size_t max_iter) {
  if (!(tol > 0.0)) throw InvalidArgument("tolerance must be positive");
  const Eigen::Index n = L.laplacian.rows();
  if (n == 0) return 0.0;

  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = 1.0 + 1e-2 * std::sin(0.7 * static_cast<double>(i + 1));
  v.normalize();

  double lambda = 0.0;
  for (std::size_t iter = 0; iter < max_iter; ++iter) {
    Eigen::VectorXd lv = L.laplacian * v;
    const double norm = lv.norm();
    if (norm == 0.0) return 0.0;
    v = lv / norm;
    const double next = v.dot(L.laplacian * v);
    if (iter > 0 && std::abs(next - lambda) <= tol * std::abs(next)) return next;
    lambda = next;
  }
  throw ConvergenceError("power iteration did not converge in " + std::to_string(max_iter) + " iterations", lambda);
}

std::vector<std::size_t> connected_components(const SparseMatrix& weights) {
  const auto n = static_cast<std::size_t>(weights.rows());
  constexpr auto unset = static_cast<std::size_t>(-1);
  std::vector<std::size_t> comp(n, unset);
  std::vector<std::size_t> stack;
  std::size_t next_id = 0;
  for (std::size_t s = 0; s < n; ++s) {
    if (comp[s] != unset) continue;
    comp[s] = next_id;
    stack.push_back(s);
    while (!stack.empty()) {
      const auto v = stack.back();
      stack.pop_back();
      // Column v lists the neighbours of v (the matrix is symmetric).
      for (SparseMatrix::InnerIterator it(weights, static_cast<Eigen::Index>(v)); it; ++it) {
        const auto u = static_cast<std::size_t>(it.row());
        if (it.value() != 0.0 && comp[u] == unset) {
          comp[u] = next_id;
          stack.push_back(u);
        }
      }
    }
    ++next_id;
  }
  return comp;
}

void write_edge_list(const SimilarityGraph& g, std::ostream& out) {
  std::vector<std::tuple<Eigen::Index, Eigen::Index, double>> edges;
  for (Eigen::Index c = 0; c < g.weights.outerSize(); ++c)
    for (SparseMatrix::InnerIterator it(g.weights, c); it; ++it)
      if (it.row() < it.col()) edges.emplace_back(it.row(), it.col(), it.value());
  std::sort(edges.begin(), edges.end());
  out << "# n " << g.n << '\n';
  out << std::setprecision(17);
  for (const auto& [i, j, w] : edges) out << i << ' ' << j << ' ' << w << '\n';
}

SimilarityGraph read_edge_list(std::istream& in) {
  std::vector<std::tuple<std::size_t, std::size_t, double>> edges;
  std::size_t n = 0;
  bool n_declared = false;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream ls(line);
    std::string first;
    if (!(ls >> first)) continue;
    if (first[0] == '#') {
      std::string key;
      if (ls >> key && key == "n") {
        long long count = -1;
        if (!(ls >> count) || count < 0) throw ParseError("bad vertex count comment", line_no);
        n = static_cast<std::size_t>(count);
        n_declared = true;
      }
      continue;
    }
    long long i = -1, j = -1;
    double w = 0.0;
    std::istringstream row(line);
    std::string extra;
    if (!(row >> i >> j >> w) || (row >> extra)) throw ParseError("expected 'i j w'", line_no);
    if (i < 0 || j < 0) throw ParseError("negative vertex index", line_no);
    if (i == j) throw ParseError("self loop", line_no);
    if (!std::isfinite(w) || w < 0.0) throw ParseError("weight must be finite and nonnegative", line_no);
    edges.emplace_back(static_cast<std::size_t>(i), static_cast<std::size_t>(j), w);
  }
  std::size_t max_index = 0;
  for (const auto& [i, j, w] : edges) max_index = std::max({max_index, i + 1, j + 1});
  if (!n_declared) n = max_index;
  if (max_index > n) throw ParseError("edge endpoint exceeds declared vertex count");
  if (n == 0) throw ParseError("empty edge list");
  return graph_from_edges(n, edges);
}

SimilarityGraph load_edge_list(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open '" + path + "'");
  return read_edge_list(in);
}

}  // namespace mmgc
