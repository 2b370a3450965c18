#include "mmgc/lapsvm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include <Eigen/LU>

#include "mmgc/error.hpp"

namespace mmgc {

namespace {

constexpr double kMinRcond = 1e-13;

struct LabelView {
  std::vector<Eigen::Index> rows;
  Eigen::VectorXd y;
};

LabelView label_view(std::span<const LabeledVertex> labels, std::size_t n) {
  std::vector<LabeledVertex> sorted(labels.begin(), labels.end());
  std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) { return a.index < b.index; });
  LabelView v;
  v.y.resize(static_cast<Eigen::Index>(sorted.size()));
  bool has_pos = false, has_neg = false;
  for (std::size_t k = 0; k < sorted.size(); ++k) {
    if (sorted[k].index >= n) throw InvalidArgument("labeled vertex out of range");
    if (k > 0 && sorted[k].index == sorted[k - 1].index) throw InvalidArgument("vertex labeled twice");
    if (sorted[k].label != 1 && sorted[k].label != -1) throw InvalidArgument("labels must be +1 or -1");
    v.rows.push_back(static_cast<Eigen::Index>(sorted[k].index));
    v.y(static_cast<Eigen::Index>(k)) = sorted[k].label;
    (sorted[k].label > 0 ? has_pos : has_neg) = true;
  }
  if (!(has_pos && has_neg)) throw InvalidArgument("manifold regularization needs labeled points of both classes");
  return v;
}

SvmModel make_model(const Eigen::MatrixXd& points, const KernelSpec& kernel, const LabelView& lv,
                    const Eigen::VectorXd& alpha, double bias) {
  SvmModel m;
  m.train_points = points;
  m.kernel = kernel;
  m.coefficients = alpha;
  m.bias = bias;
  m.labels = Eigen::VectorXd::Zero(points.rows());
  for (std::size_t k = 0; k < lv.rows.size(); ++k) m.labels(lv.rows[k]) = lv.y(static_cast<Eigen::Index>(k));
  m.dual = Eigen::VectorXd::Zero(points.rows());
  m.box = 1.0;
  return m;
}

LapSvmResult subgradient_fallback(const Eigen::MatrixXd& points, const Eigen::MatrixXd& k, const GraphLaplacian& L,
                                  std::span<const LabeledVertex> labels, const LabelView& lv, const LapSvmConfig& cfg) {
  const Eigen::Index n = k.rows();
  const Eigen::MatrixXd lk = L.laplacian * k;
  // Gradient of gamma a^T K a + gamma_u a^T K L K a is H a.
  const Eigen::MatrixXd h = 2.0 * cfg.gamma * k + 2.0 * cfg.gamma_u * k * lk;

  Eigen::VectorXd alpha = Eigen::VectorXd::Zero(n);
  double b = 0.0;
  Eigen::VectorXd best_alpha = alpha;
  double best_b = 0.0;
  double best = lapsvm_objective(k, L, labels, alpha, b, cfg.gamma, cfg.gamma_u);

  for (std::size_t t = 1; t <= cfg.subgradient_iterations; ++t) {
    Eigen::VectorXd g_alpha = h * alpha;
    double g_b = 0.0;
    for (std::size_t r = 0; r < lv.rows.size(); ++r) {
      const auto i = lv.rows[r];
      const double yi = lv.y(static_cast<Eigen::Index>(r));
      if (yi * (k.row(i).dot(alpha) + b) < 1.0) {
        g_alpha -= yi * k.col(i);
        if (cfg.bias) g_b -= yi;
      }
    }
    const double norm = std::sqrt(g_alpha.squaredNorm() + g_b * g_b);
    if (norm == 0.0) break;
    const double step = cfg.subgradient_step / (std::sqrt(static_cast<double>(t)) * norm);
    alpha -= step * g_alpha;
    b -= step * g_b;
    const double obj = lapsvm_objective(k, L, labels, alpha, b, cfg.gamma, cfg.gamma_u);
    if (obj < best) {
      best = obj;
      best_alpha = alpha;
      best_b = b;
    }
  }
  if (!best_alpha.allFinite() || !std::isfinite(best))
    throw InvalidArgument("manifold regularization is ill-conditioned; try a larger gamma");

  LapSvmResult out;
  out.used_subgradient = true;
  out.model = make_model(points, cfg.kernel, lv, best_alpha, best_b);
  out.model.objective_value = best;
  out.model.dual_value = std::numeric_limits<double>::quiet_NaN();
  out.model.duality_gap = std::numeric_limits<double>::quiet_NaN();
  out.model.iterations = cfg.subgradient_iterations;
  return out;
}

}  // namespace

double lapsvm_objective(const Eigen::MatrixXd& gram, const GraphLaplacian& L, std::span<const LabeledVertex> labels,
                        const Eigen::VectorXd& alpha, double bias, double gamma, double gamma_u) {
  const Eigen::VectorXd f = gram * alpha;
  double loss = 0.0;
  for (const auto& lv : labels) loss += hinge_loss(f(static_cast<Eigen::Index>(lv.index)) + bias, lv.label);
  return loss + gamma * alpha.dot(f) + gamma_u * manifold_quadratic_form(L, f);
}

LapSvmResult train_lapsvm(const Eigen::MatrixXd& points, const GraphLaplacian& L, std::span<const LabeledVertex> labels,
                          const LapSvmConfig& cfg) {
  const auto n = points.rows();
  if (static_cast<std::size_t>(n) != L.size()) throw InvalidArgument("graph and points differ in size");
  if (!(cfg.gamma > 0.0)) throw InvalidArgument("gamma must be positive");
  if (cfg.gamma_u < 0.0 || (cfg.gamma_u == 0.0 && !cfg.allow_zero_gamma_u))
    throw InvalidArgument("gamma_u must be positive");
  const LabelView lv = label_view(labels, static_cast<std::size_t>(n));
  const auto nl = static_cast<Eigen::Index>(lv.rows.size());

  const Eigen::MatrixXd k = gram_matrix(cfg.kernel, points);
  if (cfg.force_subgradient) return subgradient_fallback(points, k, L, labels, lv, cfg);

  // alpha = (2 gamma I + 2 gamma_u L K)^-1 J^T Y beta, and the labeled rows of
  // K (2 gamma I + 2 gamma_u L K)^-1 J^T form the effective kernel of the dual.
  const Eigen::MatrixXd system =
      2.0 * cfg.gamma * Eigen::MatrixXd::Identity(n, n) + 2.0 * cfg.gamma_u * (L.laplacian * k);
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(system);
  if (!(lu.rcond() >= kMinRcond)) return subgradient_fallback(points, k, L, labels, lv, cfg);

  Eigen::MatrixXd selector = Eigen::MatrixXd::Zero(n, nl);
  for (Eigen::Index c = 0; c < nl; ++c) selector(lv.rows[static_cast<std::size_t>(c)], c) = 1.0;
  const Eigen::MatrixXd expansion = lu.solve(selector);  // n x n_l
  Eigen::MatrixXd effective(nl, nl);
  for (Eigen::Index r = 0; r < nl; ++r) effective.row(r) = k.row(lv.rows[static_cast<std::size_t>(r)]) * expansion;
  effective = 0.5 * (effective + effective.transpose()).eval();

  LapSvmResult out;
  out.zero_gamma_u = cfg.gamma_u == 0.0;
  const std::size_t max_iter = cfg.max_passes * static_cast<std::size_t>(std::max<Eigen::Index>(nl, 1));
  double eps = cfg.tol;
  HingeDual dual;
  std::size_t used = 0;
  for (int round = 0; round < 10; ++round) {
    dual = solve_hinge_dual(effective, lv.y, 1.0, cfg.bias, eps, max_iter - std::min(max_iter, used), dual.lambda);
    used += dual.iterations;

    const Eigen::VectorXd alpha = expansion * lv.y.cwiseProduct(dual.lambda);
    const Eigen::VectorXd f = k * alpha;
    Eigen::VectorXd f_labeled(nl);
    for (Eigen::Index r = 0; r < nl; ++r) f_labeled(r) = f(lv.rows[static_cast<std::size_t>(r)]);
    double b = 0.0;
    if (cfg.bias) {
      bool any_free = false;
      for (Eigen::Index r = 0; r < nl; ++r) any_free = any_free || (dual.lambda(r) > 0.0 && dual.lambda(r) < 1.0);
      b = any_free ? dual.bias : optimal_hinge_bias(f_labeled, lv.y, dual.bias);
    }

    out.model = make_model(points, cfg.kernel, lv, alpha, b);
    for (Eigen::Index r = 0; r < nl; ++r) out.model.dual(lv.rows[static_cast<std::size_t>(r)]) = dual.lambda(r);
    out.model.objective_value = lapsvm_objective(k, L, labels, alpha, b, cfg.gamma, cfg.gamma_u);
    const Eigen::VectorXd yl = lv.y.cwiseProduct(dual.lambda);
    out.model.dual_value = dual.lambda.sum() - 0.5 * yl.dot(effective * yl);
    out.model.duality_gap = out.model.objective_value - out.model.dual_value;
    out.model.iterations = used;

    if (out.model.duality_gap <= cfg.tol * (1.0 + std::abs(out.model.objective_value))) return out;
    if (!dual.converged) break;
    eps *= 0.1;
  }
  throw ConvergenceError("manifold-regularized SVM stopped with duality gap " + std::to_string(out.model.duality_gap),
                         out.model.duality_gap);
}

Eigen::VectorXd axis_aligned_deltas(const SimilarityGraph& g, const Eigen::MatrixXd& points) {
  if (static_cast<std::size_t>(points.rows()) != g.n) throw InvalidArgument("graph and points differ in size");
  Eigen::VectorXd delta = Eigen::VectorXd::Zero(points.cols());
  for (Eigen::Index c = 0; c < g.weights.outerSize(); ++c)
    for (SparseMatrix::InnerIterator it(g.weights, c); it; ++it) {
      const Eigen::RowVectorXd diff = points.row(it.row()) - points.row(it.col());
      Eigen::Index axis = -1;
      int differing = 0;
      for (Eigen::Index m = 0; m < diff.size(); ++m)
        if (std::abs(diff(m)) > 1e-12) {
          ++differing;
          axis = m;
        }
      if (differing != 1)
        throw InvalidArgument("edge " + std::to_string(std::min(it.row(), it.col())) + "-" +
                              std::to_string(std::max(it.row(), it.col())) + " is not axis-aligned");
      delta(axis) += it.value() * diff(axis) * diff(axis);
    }
  return delta;
}

double manifold_quadratic_form(const GraphLaplacian& L, const Eigen::VectorXd& f) {
  if (static_cast<std::size_t>(f.size()) != L.size()) throw InvalidArgument("vector and Laplacian differ in size");
  return f.dot(L.laplacian * f);
}

double pairwise_smoothness(const SimilarityGraph& g, const Eigen::VectorXd& f) {
  double s = 0.0;
  for (Eigen::Index c = 0; c < g.weights.outerSize(); ++c)
    for (SparseMatrix::InnerIterator it(g.weights, c); it; ++it) {
      const double d = f(it.row()) - f(it.col());
      s += it.value() * d * d;
    }
  return 0.5 * s;
}

}  // namespace mmgc
