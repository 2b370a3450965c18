#include "mmgc/harmonic.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <iomanip>

#include <Eigen/Cholesky>
#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCholesky>

#include "mmgc/error.hpp"

namespace mmgc {

namespace {

using Triplet = Eigen::Triplet<double, Eigen::Index>;

constexpr Eigen::Index kDenseLimit = 500;

struct LinearSolve {
  Eigen::VectorXd x;
  double residual = 0.0;
};

// Solves an SPD system. Small systems use a dense Cholesky factorization;
// larger ones use Jacobi-preconditioned CG and fall back to sparse LDL^T.
LinearSolve solve_spd(const SparseMatrix& a, const Eigen::VectorXd& b, double tol, std::size_t max_iter) {
  LinearSolve out;
  const Eigen::Index n = a.rows();
  if (n <= kDenseLimit) {
    Eigen::MatrixXd dense(a);
    Eigen::LLT<Eigen::MatrixXd> llt(dense);
    if (llt.info() != Eigen::Success) throw SingularSystem("system matrix is not positive definite");
    out.x = llt.solve(b);
  } else {
    Eigen::ConjugateGradient<SparseMatrix, Eigen::Lower | Eigen::Upper, Eigen::DiagonalPreconditioner<double>> cg;
    cg.setTolerance(tol);
    cg.setMaxIterations(static_cast<Eigen::Index>(max_iter));
    cg.compute(a);
    out.x = cg.solve(b);
    if (cg.info() != Eigen::Success) {
      Eigen::SimplicialLDLT<SparseMatrix> ldlt(a);
      if (ldlt.info() != Eigen::Success) throw SingularSystem("system matrix is not positive definite");
      out.x = ldlt.solve(b);
    }
  }
  out.residual = (a * out.x - b).norm();
  const double bound = tol * b.norm();
  if (out.residual > std::max(bound, 1e-14 * static_cast<double>(n)))
    throw ConvergenceError("linear solve residual " + std::to_string(out.residual) + " exceeds tolerance", out.residual);
  return out;
}

void check_labels(const GraphLaplacian& L, std::span<const LabeledVertex> labels, std::vector<bool>& mask) {
  mask.assign(L.size(), false);
  for (const auto& lv : labels) {
    if (lv.index >= L.size()) throw InvalidArgument("labeled vertex " + std::to_string(lv.index) + " out of range");
    if (lv.label != 1 && lv.label != -1) throw InvalidArgument("labels must be +1 or -1");
    if (mask[lv.index]) throw InvalidArgument("vertex " + std::to_string(lv.index) + " labeled twice");
    mask[lv.index] = true;
  }
}

void require_label_per_component(const GraphLaplacian& L, const std::vector<bool>& mask) {
  const auto comp = connected_components(L.weights);
  const std::size_t n_comp = comp.empty() ? 0 : *std::max_element(comp.begin(), comp.end()) + 1;
  std::vector<bool> has_label(n_comp, false);
  for (std::size_t i = 0; i < comp.size(); ++i)
    if (mask[i]) has_label[comp[i]] = true;
  for (std::size_t c = 0; c < n_comp; ++c) {
    if (has_label[c]) continue;
    std::size_t first = 0, count = 0;
    for (std::size_t i = comp.size(); i-- > 0;)
      if (comp[i] == c) {
        first = i;
        ++count;
      }
    throw SingularSystem("singular harmonic system: connected component " + std::to_string(c) + " (" +
                         std::to_string(count) + " vertices, first vertex " + std::to_string(first) +
                         ") contains no labeled vertex and gamma_g = 0");
  }
}

// Clamps `boundary` vertices to `values` and solves for the rest of the graph.
LinearSolve solve_clamped(const GraphLaplacian& L, const std::vector<bool>& mask, const Eigen::VectorXd& clamped,
                          double gamma_g, double tol, std::size_t max_iter, std::vector<Eigen::Index>& unlabeled) {
  const auto n = static_cast<Eigen::Index>(L.size());
  std::vector<Eigen::Index> pos(static_cast<std::size_t>(n), -1);
  unlabeled.clear();
  for (Eigen::Index i = 0; i < n; ++i)
    if (!mask[static_cast<std::size_t>(i)]) {
      pos[static_cast<std::size_t>(i)] = static_cast<Eigen::Index>(unlabeled.size());
      unlabeled.push_back(i);
    }
  const auto nu = static_cast<Eigen::Index>(unlabeled.size());
  if (nu == 0) return {};

  std::vector<Triplet> entries;
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(nu);
  for (Eigen::Index c = 0; c < L.laplacian.outerSize(); ++c) {
    const auto pc = pos[static_cast<std::size_t>(c)];
    for (SparseMatrix::InnerIterator it(L.laplacian, c); it; ++it) {
      const auto pr = pos[static_cast<std::size_t>(it.row())];
      if (pr < 0) continue;
      if (pc >= 0)
        entries.emplace_back(pr, pc, it.value());
      else
        rhs(pr) -= it.value() * clamped(c);  // -L_ul = W_ul
    }
  }
  for (Eigen::Index k = 0; k < nu; ++k) entries.emplace_back(k, k, gamma_g);
  SparseMatrix a(nu, nu);
  a.setFromTriplets(entries.begin(), entries.end());
  return solve_spd(a, rhs, tol, max_iter);
}

}  // namespace

double HarmonicSolution::confidence(std::size_t i) const { return std::abs(values(static_cast<Eigen::Index>(i))); }

HarmonicSolution solve_hard(const GraphLaplacian& L, std::span<const LabeledVertex> labels, const HarmonicConfig& cfg) {
  if (!(cfg.gamma_g >= 0.0)) throw InvalidArgument("gamma_g must be nonnegative");
  if (!(cfg.solver_tol > 0.0)) throw InvalidArgument("solver tolerance must be positive");
  if (labels.empty()) throw InvalidArgument("hard-constrained solve needs at least one labeled vertex");

  HarmonicSolution h;
  check_labels(L, labels, h.labeled);
  if (cfg.gamma_g == 0.0) require_label_per_component(L, h.labeled);

  h.gamma_g = cfg.gamma_g;
  h.values = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(L.size()));
  for (const auto& lv : labels) h.values(static_cast<Eigen::Index>(lv.index)) = lv.label;

  std::vector<Eigen::Index> unlabeled;
  auto solved = solve_clamped(L, h.labeled, h.values, cfg.gamma_g, cfg.solver_tol, cfg.max_iter, unlabeled);
  for (std::size_t k = 0; k < unlabeled.size(); ++k) h.values(unlabeled[k]) = solved.x(static_cast<Eigen::Index>(k));
  h.residual = solved.residual;
  return h;
}

HarmonicSolution solve_soft(const GraphLaplacian& L, std::span<const LabeledVertex> labels, const SoftHarmonicConfig& cfg) {
  if (!(cfg.c_l >= 0.0 && cfg.c_u >= 0.0 && cfg.gamma_g >= 0.0))
    throw InvalidArgument("c_l, c_u and gamma_g must be nonnegative");
  if (!((cfg.c_l > 0.0 && cfg.c_u > 0.0) || cfg.gamma_g > 0.0))
    throw SingularSystem("C + L + gamma_g I is singular: need c_l, c_u > 0 or gamma_g > 0");

  HarmonicSolution h;
  check_labels(L, labels, h.labeled);
  h.gamma_g = cfg.gamma_g;
  if (!cfg.bound_compatible()) h.warnings.push_back("c_l = 1 and 0 < c_u < c_l do not hold; the stability bound does not apply");

  const auto n = static_cast<Eigen::Index>(L.size());
  Eigen::VectorXd y = Eigen::VectorXd::Zero(n);
  for (const auto& lv : labels) y(static_cast<Eigen::Index>(lv.index)) = lv.label;

  std::vector<Triplet> entries;
  entries.reserve(static_cast<std::size_t>(L.laplacian.nonZeros() + n));
  Eigen::VectorXd rhs(n);
  for (Eigen::Index c = 0; c < L.laplacian.outerSize(); ++c)
    for (SparseMatrix::InnerIterator it(L.laplacian, c); it; ++it) entries.emplace_back(it.row(), it.col(), it.value());
  for (Eigen::Index i = 0; i < n; ++i) {
    const double c = h.labeled[static_cast<std::size_t>(i)] ? cfg.c_l : cfg.c_u;
    entries.emplace_back(i, i, c + cfg.gamma_g);
    rhs(i) = c * y(i);
  }
  SparseMatrix a(n, n);
  a.setFromTriplets(entries.begin(), entries.end());

  auto solved = solve_spd(a, rhs, 1e-12, 10000);
  h.values = std::move(solved.x);
  h.residual = solved.residual;

  // With |y_i| <= 1 the system is an M-matrix and every |ell_i| <= 1.
  for (Eigen::Index i = 0; i < n; ++i)
    if (std::abs(h.values(i)) > 1.0 + 1e-9)
      throw std::logic_error("soft harmonic value exceeds 1 in magnitude at vertex " + std::to_string(i));
  return h;
}

AbsorptionDecomposition absorption_decomposition(const SimilarityGraph& g, std::span<const LabeledVertex> labels,
                                                 double gamma_g) {
  if (!(gamma_g >= 0.0)) throw InvalidArgument("gamma_g must be nonnegative");
  if (labels.empty()) throw InvalidArgument("absorption needs at least one labeled vertex");
  const auto L = laplacian(g);
  std::vector<bool> mask;
  check_labels(L, labels, mask);
  if (gamma_g == 0.0) require_label_per_component(L, mask);

  const auto n = static_cast<Eigen::Index>(g.n);
  Eigen::VectorXd plus_boundary = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd minus_boundary = Eigen::VectorXd::Zero(n);
  for (const auto& lv : labels) (lv.label > 0 ? plus_boundary : minus_boundary)(static_cast<Eigen::Index>(lv.index)) = 1.0;

  std::vector<Eigen::Index> unlabeled;
  auto plus = solve_clamped(L, mask, plus_boundary, gamma_g, 1e-12, 10000, unlabeled);
  auto minus = solve_clamped(L, mask, minus_boundary, gamma_g, 1e-12, 10000, unlabeled);

  AbsorptionDecomposition out;
  out.unlabeled.assign(unlabeled.begin(), unlabeled.end());
  const auto nu = static_cast<Eigen::Index>(unlabeled.size());
  out.p_plus = nu ? plus.x : Eigen::VectorXd();
  out.p_minus = nu ? minus.x : Eigen::VectorXd();
  out.sink_mass = (Eigen::VectorXd::Ones(nu) - out.p_plus - out.p_minus).cwiseMax(0.0);
  return out;
}

InducedSet threshold_labels(const HarmonicSolution& h, double epsilon) {
  if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw InvalidArgument("epsilon must lie in [0, 1]");
  InducedSet out;
  for (std::size_t i = 0; i < h.size(); ++i) {
    const double v = h.values(static_cast<Eigen::Index>(i));
    if (std::abs(v) >= epsilon && !(v == 0.0 && epsilon > 0.0)) {
      out.indices.push_back(i);
      if (v == 0.0) out.zero_sign_mapped = true;
      out.labels.push_back(v >= 0.0 ? 1 : -1);
    } else {
      ++out.n_eps;
    }
  }
  return out;
}

void write_solution_csv(const HarmonicSolution& h, double epsilon, std::ostream& out) {
  const auto induced = threshold_labels(h, epsilon);
  std::vector<char> kept(h.size(), 0);
  for (auto i : induced.indices) kept[i] = 1;
  out << "index,ell,confidence,kept\n" << std::setprecision(17);
  for (std::size_t i = 0; i < h.size(); ++i)
    out << i << ',' << h.values(static_cast<Eigen::Index>(i)) << ',' << h.confidence(i) << ','
        << static_cast<int>(kept[i]) << '\n';
}

}  // namespace mmgc
