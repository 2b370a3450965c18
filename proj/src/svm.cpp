#include "mmgc/svm.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>
#include <vector>

#include <Eigen/Eigenvalues>

#include "mmgc/error.hpp"

namespace mmgc {

namespace {

constexpr double kTau = 1e-12;

}  // namespace

KernelSpec KernelSpec::polynomial(int degree, double offset, double scale) {
  if (degree < 1) throw InvalidArgument("polynomial degree must be at least 1");
  KernelSpec k;
  k.kind = Kind::polynomial;
  k.degree = degree;
  k.offset = offset;
  k.scale = scale;
  return k;
}

KernelSpec KernelSpec::rbf(double width) {
  if (!(width > 0.0)) throw InvalidArgument("rbf width must be positive");
  KernelSpec k;
  k.kind = Kind::rbf;
  k.width = width;
  return k;
}

double KernelSpec::operator()(const Eigen::Ref<const Eigen::VectorXd>& a, const Eigen::Ref<const Eigen::VectorXd>& b) const {
  switch (kind) {
    case Kind::linear:
      return a.dot(b);
    case Kind::polynomial:
      return std::pow(scale * a.dot(b) + offset, degree);
    case Kind::rbf:
      return std::exp(-(a - b).squaredNorm() / (2.0 * width * width));
  }
  return 0.0;
}

std::string KernelSpec::descriptor() const {
  std::ostringstream os;
  os << std::setprecision(17);
  switch (kind) {
    case Kind::linear:
      os << "linear";
      break;
    case Kind::polynomial:
      os << "poly:" << degree << ':' << offset << ':' << scale;
      break;
    case Kind::rbf:
      os << "rbf:" << width;
      break;
  }
  return os.str();
}

std::string KernelSpec::family() const {
  switch (kind) {
    case Kind::linear:
      return "linear";
    case Kind::polynomial:
      return degree == 3 ? "cubic" : "poly" + std::to_string(degree);
    case Kind::rbf:
      return "rbf";
  }
  return "unknown";
}

KernelSpec KernelSpec::parse(const std::string& descriptor) {
  std::vector<std::string> parts;
  std::stringstream ss(descriptor);
  std::string item;
  while (std::getline(ss, item, ':')) parts.push_back(item);
  if (parts.empty()) throw ParseError("empty kernel descriptor");
  auto num = [&](std::size_t i) {
    try {
      std::size_t used = 0;
      double v = std::stod(parts.at(i), &used);
      if (used != parts[i].size()) throw ParseError("bad number in kernel descriptor '" + descriptor + "'");
      return v;
    } catch (const std::logic_error&) {
      throw ParseError("bad kernel descriptor '" + descriptor + "'");
    }
  };
  if (parts[0] == "linear" && parts.size() == 1) return linear();
  if (parts[0] == "cubic") return parts.size() > 1 ? cubic(num(1)) : cubic();
  if (parts[0] == "cubic-homogeneous") return polynomial(3, 0.0, parts.size() > 1 ? num(1) : 1.0);
  if (parts[0] == "poly" && parts.size() >= 2 && parts.size() <= 4)
    return polynomial(static_cast<int>(num(1)), parts.size() > 2 ? num(2) : 1.0, parts.size() > 3 ? num(3) : 1.0);
  if (parts[0] == "rbf" && parts.size() == 2) return rbf(num(1));
  throw ParseError("unknown kernel descriptor '" + descriptor + "'");
}

double SvmModel::predict(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  if (x.size() != train_points.cols())
    throw InvalidArgument("predict: expected " + std::to_string(train_points.cols()) + " features, got " +
                          std::to_string(x.size()));
  double s = bias;
  for (Eigen::Index i = 0; i < coefficients.size(); ++i)
    if (coefficients(i) != 0.0) s += coefficients(i) * kernel(train_points.row(i).transpose(), x);
  return s;
}

Eigen::VectorXd SvmModel::predict_rows(const Eigen::MatrixXd& points) const {
  Eigen::VectorXd out(points.rows());
  for (Eigen::Index r = 0; r < points.rows(); ++r) out(r) = predict(points.row(r).transpose());
  return out;
}

Eigen::MatrixXd gram_matrix(const KernelSpec& kernel, const Eigen::MatrixXd& points) {
  const Eigen::Index m = points.rows();
  Eigen::MatrixXd g(m, m);
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = i; j < m; ++j) {
      const double v = kernel(points.row(i).transpose(), points.row(j).transpose());
      g(i, j) = v;
      g(j, i) = v;
    }
  return g;
}

Eigen::MatrixXd cross_gram(const KernelSpec& kernel, const Eigen::MatrixXd& rows, const Eigen::MatrixXd& cols) {
  Eigen::MatrixXd g(rows.rows(), cols.rows());
  for (Eigen::Index i = 0; i < rows.rows(); ++i)
    for (Eigen::Index j = 0; j < cols.rows(); ++j) g(i, j) = kernel(rows.row(i).transpose(), cols.row(j).transpose());
  return g;
}

bool is_positive_semidefinite(const Eigen::MatrixXd& gram, double jitter) {
  if (gram.size() == 0) return true;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff() >= -jitter;
}

double hinge_loss(double score, int y) { return std::max(1.0 - static_cast<double>(y) * score, 0.0); }

double optimal_hinge_bias(const Eigen::VectorXd& g, const Eigen::VectorXd& y, double start) {
  auto loss = [&](double b) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < g.size(); ++i) s += std::max(0.0, 1.0 - y(i) * (g(i) + b));
    return s;
  };
  double best = start, best_loss = loss(start);
  // Convex and piecewise linear; the minimum sits on a breakpoint b = y_i - g_i.
  for (Eigen::Index i = 0; i < g.size(); ++i) {
    const double b = y(i) - g(i);
    const double l = loss(b);
    if (l < best_loss - 1e-15) {
      best = b;
      best_loss = l;
    }
  }
  return best;
}

Eigen::VectorXd linear_weights(const SvmModel& model) {
  if (model.kernel.kind != KernelSpec::Kind::linear) throw InvalidArgument("linear_weights needs a linear kernel");
  return model.train_points.transpose() * model.coefficients;
}

HingeDual solve_hinge_dual(const Eigen::MatrixXd& gram, const Eigen::VectorXd& y, double box, bool bias, double eps,
                           std::size_t max_iter, const Eigen::VectorXd& start) {
  const Eigen::Index m = gram.rows();
  HingeDual out;
  out.lambda = start.size() == m ? start : Eigen::VectorXd::Zero(m);
  const Eigen::MatrixXd q = y.asDiagonal() * gram * y.asDiagonal();
  out.gradient = q * out.lambda - Eigen::VectorXd::Ones(m);
  auto& lam = out.lambda;
  auto& grad = out.gradient;

  for (out.iterations = 0; out.iterations < max_iter; ++out.iterations) {
    if (bias) {
      // Maximal violating pair: i maximizes -y G over I_up, j maximizes y G over I_low.
      double gmax = -std::numeric_limits<double>::infinity(), gmax2 = gmax;
      Eigen::Index i = -1, j = -1;
      for (Eigen::Index t = 0; t < m; ++t) {
        const bool up = y(t) > 0 ? lam(t) < box : lam(t) > 0.0;
        const bool low = y(t) > 0 ? lam(t) > 0.0 : lam(t) < box;
        if (up && -y(t) * grad(t) > gmax) {
          gmax = -y(t) * grad(t);
          i = t;
        }
        if (low && y(t) * grad(t) > gmax2) {
          gmax2 = y(t) * grad(t);
          j = t;
        }
      }
      out.max_violation = (i < 0 || j < 0) ? 0.0 : gmax + gmax2;
      if (out.max_violation <= eps) {
        out.converged = true;
        break;
      }
      const double old_i = lam(i), old_j = lam(j);
      if (y(i) != y(j)) {
        double quad = q(i, i) + q(j, j) + 2.0 * q(i, j);
        if (quad <= 0.0) quad = kTau;
        const double delta = (-grad(i) - grad(j)) / quad;
        const double diff = lam(i) - lam(j);
        lam(i) += delta;
        lam(j) += delta;
        if (diff > 0.0) {
          if (lam(j) < 0.0) { lam(j) = 0.0; lam(i) = diff; }
        } else if (lam(i) < 0.0) {
          lam(i) = 0.0;
          lam(j) = -diff;
        }
        if (diff > 0.0) {
          if (lam(i) > box) { lam(i) = box; lam(j) = box - diff; }
        } else if (lam(j) > box) {
          lam(j) = box;
          lam(i) = box + diff;
        }
      } else {
        double quad = q(i, i) + q(j, j) - 2.0 * q(i, j);
        if (quad <= 0.0) quad = kTau;
        const double delta = (grad(i) - grad(j)) / quad;
        const double sum = lam(i) + lam(j);
        lam(i) -= delta;
        lam(j) += delta;
        if (sum > box) {
          if (lam(i) > box) { lam(i) = box; lam(j) = sum - box; }
        } else if (lam(j) < 0.0) {
          lam(j) = 0.0;
          lam(i) = sum;
        }
        if (sum > box) {
          if (lam(j) > box) { lam(j) = box; lam(i) = sum - box; }
        } else if (lam(i) < 0.0) {
          lam(i) = 0.0;
          lam(j) = sum;
        }
      }
      const double di = lam(i) - old_i, dj = lam(j) - old_j;
      grad += q.col(i) * di + q.col(j) * dj;
    } else {
      // Single coordinate with the largest projected-gradient violation.
      double vmax = 0.0;
      Eigen::Index t_best = -1;
      for (Eigen::Index t = 0; t < m; ++t) {
        double v = 0.0;
        if (grad(t) < 0.0 && lam(t) < box) v = -grad(t);
        if (grad(t) > 0.0 && lam(t) > 0.0) v = grad(t);
        if (v > vmax) {
          vmax = v;
          t_best = t;
        }
      }
      out.max_violation = vmax;
      if (vmax <= eps) {
        out.converged = true;
        break;
      }
      const Eigen::Index t = t_best;
      const double old = lam(t);
      double next = q(t, t) > 0.0 ? old - grad(t) / q(t, t) : (grad(t) < 0.0 ? box : 0.0);
      next = std::clamp(next, 0.0, box);
      lam(t) = next;
      grad += q.col(t) * (next - old);
    }
  }

  if (bias) {
    double ub = std::numeric_limits<double>::infinity(), lb = -ub, sum = 0.0;
    std::size_t n_free = 0;
    for (Eigen::Index t = 0; t < m; ++t) {
      const double yg = y(t) * grad(t);
      if (lam(t) >= box) {
        if (y(t) < 0) ub = std::min(ub, yg); else lb = std::max(lb, yg);
      } else if (lam(t) <= 0.0) {
        if (y(t) > 0) ub = std::min(ub, yg); else lb = std::max(lb, yg);
      } else {
        ++n_free;
        sum += yg;
      }
    }
    const double rho = n_free > 0 ? sum / static_cast<double>(n_free) : 0.5 * (ub + lb);
    out.bias = -rho;
  }
  return out;
}

double svm_primal_objective(const SvmModel& model, double gamma) {
  const Eigen::MatrixXd k = gram_matrix(model.kernel, model.train_points);
  const Eigen::VectorXd scores = k * model.coefficients + Eigen::VectorXd::Constant(k.rows(), model.bias);
  double loss = 0.0;
  for (Eigen::Index i = 0; i < scores.size(); ++i) loss += hinge_loss(scores(i), model.labels(i) > 0 ? 1 : -1);
  return loss + gamma * model.coefficients.dot(k * model.coefficients);
}

SvmModel train_svm(const Eigen::MatrixXd& points, std::span<const int> labels, const KernelSpec& kernel,
                   const SvmConfig& cfg) {
  const Eigen::Index m = points.rows();
  if (static_cast<std::size_t>(m) != labels.size()) throw InvalidArgument("label count does not match point count");
  if (m < 2) throw InvalidArgument("SVM training needs at least 2 points");
  if (!(cfg.gamma > 0.0)) throw InvalidArgument("gamma must be positive");
  if (!(cfg.tol > 0.0)) throw InvalidArgument("tolerance must be positive");
  bool has_pos = false, has_neg = false;
  Eigen::VectorXd y(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    const int l = labels[static_cast<std::size_t>(i)];
    if (l != 1 && l != -1) throw InvalidArgument("labels must be +1 or -1");
    y(i) = l;
    (l > 0 ? has_pos : has_neg) = true;
  }
  if (!(has_pos && has_neg)) throw InvalidArgument("SVM training needs both classes");

  SvmModel model;
  model.train_points = points;
  model.labels = y;
  model.kernel = kernel;
  model.box = 1.0 / (2.0 * cfg.gamma);

  const Eigen::MatrixXd k = gram_matrix(kernel, points);
  const std::size_t max_iter = cfg.max_passes * static_cast<std::size_t>(m);

  double eps = cfg.tol;
  HingeDual dual;
  for (int round = 0; round < 10; ++round) {
    dual = solve_hinge_dual(k, y, model.box, cfg.bias, eps, max_iter - std::min(max_iter, model.iterations), dual.lambda);
    model.iterations += dual.iterations;

    model.dual = dual.lambda;
    model.coefficients = y.cwiseProduct(dual.lambda);
    const Eigen::VectorXd kalpha = k * model.coefficients;
    model.bias = 0.0;
    if (cfg.bias) {
      bool any_free = false;
      for (Eigen::Index i = 0; i < m; ++i) any_free = any_free || (dual.lambda(i) > 0.0 && dual.lambda(i) < model.box);
      model.bias = any_free ? dual.bias : optimal_hinge_bias(kalpha, y, dual.bias);
    }
    double loss = 0.0;
    for (Eigen::Index i = 0; i < m; ++i) loss += std::max(0.0, 1.0 - y(i) * (kalpha(i) + model.bias));
    const double norm2 = model.coefficients.dot(kalpha);
    model.objective_value = loss + cfg.gamma * norm2;
    model.dual_value = 2.0 * cfg.gamma * dual.lambda.sum() - cfg.gamma * norm2;
    model.duality_gap = model.objective_value - model.dual_value;

    if (model.duality_gap <= cfg.tol * (1.0 + std::abs(model.objective_value))) return model;
    if (!dual.converged) break;
    eps *= 0.1;
  }
  throw ConvergenceError("SVM solver stopped with duality gap " + std::to_string(model.duality_gap), model.duality_gap);
}

void write_model_csv(const SvmModel& model, std::ostream& out) {
  out << std::setprecision(17);
  out << "kernel," << model.kernel.descriptor() << '\n';
  out << "bias," << model.bias << '\n';
  out << "index,alpha\n";
  for (Eigen::Index i = 0; i < model.coefficients.size(); ++i)
    if (model.coefficients(i) != 0.0) out << i << ',' << model.coefficients(i) << '\n';
}

}  // namespace mmgc
