#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "mmgc/error.hpp"
#include "mmgc/svm.hpp"
#include "oracles.hpp"

using namespace mmgc;

namespace {

struct Problem {
  Eigen::MatrixXd x;
  std::vector<int> y;
};

// Two noisy Gaussian clouds, labeled by the side of a random direction.
Problem random_problem(std::mt19937_64& rng, Eigen::Index m, Eigen::Index dim = 2, double noise = 0.6) {
  std::normal_distribution<double> nd;
  Problem p{Eigen::MatrixXd(m, dim), std::vector<int>(static_cast<std::size_t>(m))};
  Eigen::VectorXd dir(dim);
  for (Eigen::Index d = 0; d < dim; ++d) dir(d) = nd(rng);
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index d = 0; d < dim; ++d) p.x(i, d) = nd(rng);
    p.y[static_cast<std::size_t>(i)] = p.x.row(i).dot(dir) + noise * nd(rng) >= 0.0 ? 1 : -1;
  }
  p.y[0] = 1;
  p.y[1] = -1;
  return p;
}

KernelSpec pick_kernel(int which) {
  switch (which % 3) {
    case 0:
      return KernelSpec::linear();
    case 1:
      return KernelSpec::cubic(0.5);
    default:
      return KernelSpec::rbf(1.0);
  }
}

Eigen::VectorXd as_vector(const std::vector<int>& y) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(y.size()));
  for (std::size_t i = 0; i < y.size(); ++i) v(static_cast<Eigen::Index>(i)) = y[i];
  return v;
}

}  // namespace

TEST_SUITE("svm") {
  TEST_CASE("kernel values") {
    Eigen::Vector2d a(1, 2), b(3, 4);
    CHECK(KernelSpec::linear()(a, b) == 11.0);
    CHECK(KernelSpec::cubic()(a, b) == 1728.0);
    CHECK(KernelSpec::polynomial(2, 0.0, 0.5)(a, b) == doctest::Approx(30.25));
    CHECK(KernelSpec::rbf(1.0)(a, b) == doctest::Approx(std::exp(-4.0)));
    CHECK_THROWS_AS(KernelSpec::rbf(0.0), InvalidArgument);
    CHECK_THROWS_AS(KernelSpec::polynomial(0), InvalidArgument);
  }

  TEST_CASE("gram matrices") {
    Eigen::MatrixXd x(2, 2);
    x << 1, 2, 3, 4;
    const Eigen::MatrixXd g = gram_matrix(KernelSpec::linear(), x);
    CHECK(g == (Eigen::Matrix2d() << 5, 11, 11, 25).finished());
    CHECK(cross_gram(KernelSpec::linear(), x, x) == g);
    CHECK(is_positive_semidefinite(g));
    CHECK_FALSE(is_positive_semidefinite((Eigen::Matrix2d() << 0, 1, 1, 0).finished()));
    std::mt19937_64 rng(3);
    const auto p = random_problem(rng, 15, 3);
    for (int k = 0; k < 3; ++k) CHECK(is_positive_semidefinite(gram_matrix(pick_kernel(k), p.x)));
  }

  TEST_CASE("kernel descriptors round trip") {
    for (const auto& k : {KernelSpec::linear(), KernelSpec::cubic(0.25), KernelSpec::polynomial(2, 0.5, 3.0),
                          KernelSpec::rbf(0.1)}) {
      const KernelSpec back = KernelSpec::parse(k.descriptor());
      CHECK(back.descriptor() == k.descriptor());
    }
    CHECK(KernelSpec::parse("cubic").family() == "cubic");
    CHECK(KernelSpec::parse("poly:2").family() == "poly2");
    CHECK(KernelSpec::parse("rbf:2").width == 2.0);
    CHECK_THROWS_AS(KernelSpec::parse("rbf"), ParseError);
    CHECK_THROWS_AS(KernelSpec::parse("rbf:abc"), ParseError);
    CHECK_THROWS_AS(KernelSpec::parse("sigmoid"), ParseError);
    CHECK_THROWS_AS(KernelSpec::parse(""), ParseError);
  }

  TEST_CASE("hinge loss and the optimal bias") {
    CHECK(hinge_loss(2.0, 1) == 0.0);
    CHECK(hinge_loss(0.5, 1) == 0.5);
    CHECK(hinge_loss(0.5, -1) == 1.5);
    CHECK(hinge_loss(0.0, -1) == 1.0);
    // Two positives and one negative at score 0: b = 1 leaves one unit of loss.
    const Eigen::Vector3d g(0, 0, 0), y(1, 1, -1);
    const double b = optimal_hinge_bias(g, y, 0.0);
    CHECK(b == 1.0);
  }

  TEST_CASE("two points on a line") {
    Eigen::MatrixXd x(2, 1);
    x << -1, 1;
    const std::vector<int> y{-1, 1};
    SvmConfig cfg;
    cfg.gamma = 0.5;
    const auto model = train_svm(x, y, KernelSpec::linear(), cfg);
    CHECK(model.box == 1.0);
    CHECK(model.objective_value == doctest::Approx(0.5).epsilon(1e-6));
    CHECK(linear_weights(model)(0) == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(std::abs(model.bias) <= 1e-6);
    CHECK(model.predict(Eigen::VectorXd::Constant(1, 0.5)) == doctest::Approx(0.5).epsilon(1e-6));
    CHECK(model.duality_gap <= 1e-6 * 1.5);
    CHECK_THROWS_AS(model.predict(Eigen::Vector2d(1, 1)), InvalidArgument);
  }

  TEST_CASE("training preconditions") {
    Eigen::MatrixXd x(3, 1);
    x << 0, 1, 2;
    SvmConfig cfg;
    CHECK_THROWS_AS(train_svm(x, std::vector<int>{1, 1, 1}, KernelSpec::linear(), cfg), InvalidArgument);
    CHECK_THROWS_AS(train_svm(x, std::vector<int>{1, -1}, KernelSpec::linear(), cfg), InvalidArgument);
    CHECK_THROWS_AS(train_svm(x, std::vector<int>{1, -1, 0}, KernelSpec::linear(), cfg), InvalidArgument);
    cfg.gamma = 0.0;
    CHECK_THROWS_AS(train_svm(x, std::vector<int>{1, -1, 1}, KernelSpec::linear(), cfg), InvalidArgument);
    SvmConfig ok;
    const auto rbf_model = train_svm(x, std::vector<int>{1, -1, 1}, KernelSpec::rbf(1.0), ok);
    CHECK_THROWS_AS(linear_weights(rbf_model), InvalidArgument);
  }

  TEST_CASE("dual solver optimality conditions") {
    std::mt19937_64 rng(31);
    for (int trial = 0; trial < 30; ++trial) {
      const auto p = random_problem(rng, 5 + static_cast<Eigen::Index>(rng() % 30));
      const bool bias = trial % 2 == 0;
      const double box = 0.1 + static_cast<double>(trial % 5);
      const Eigen::MatrixXd k = gram_matrix(pick_kernel(trial), p.x);
      const Eigen::VectorXd y = as_vector(p.y);
      const auto d = solve_hinge_dual(k, y, box, bias, 1e-9, 10'000'000);
      REQUIRE(d.converged);
      CHECK(d.lambda.minCoeff() >= 0.0);
      CHECK(d.lambda.maxCoeff() <= box);
      if (bias) CHECK(std::abs(y.dot(d.lambda)) <= 1e-9 * (1.0 + box));
      const Eigen::VectorXd grad = y.asDiagonal() * k * y.asDiagonal() * d.lambda - Eigen::VectorXd::Ones(y.size());
      CHECK((grad - d.gradient).cwiseAbs().maxCoeff() <= 1e-8);
      // Projected gradient (shifted by the bias multiplier) vanishes up to eps.
      const double b = bias ? d.bias : 0.0;
      for (Eigen::Index i = 0; i < y.size(); ++i) {
        const double g = grad(i) + y(i) * b;  // = y_i f(x_i) - 1
        if (d.lambda(i) <= 0.0) CHECK(g >= -1e-7);
        else if (d.lambda(i) >= box) CHECK(g <= 1e-7);
        else CHECK(std::abs(g) <= 1e-7);
      }
    }
  }

  TEST_CASE("trained models satisfy the gap and KKT tolerances") {
    std::mt19937_64 rng(41);
    for (int trial = 0; trial < 40; ++trial) {
      const auto p = random_problem(rng, 4 + static_cast<Eigen::Index>(rng() % 36));
      SvmConfig cfg;
      cfg.gamma = std::pow(10.0, -2.0 + 0.1 * trial);
      cfg.bias = trial % 3 != 0;
      const KernelSpec kernel = pick_kernel(trial);
      const auto model = train_svm(p.x, p.y, kernel, cfg);
      const double recomputed = svm_primal_objective(model, cfg.gamma);
      CHECK(std::abs(recomputed - model.objective_value) <= 1e-9 * (1.0 + recomputed));
      const Eigen::MatrixXd k = gram_matrix(kernel, p.x);
      const double dual = 2.0 * cfg.gamma * model.dual.sum() - cfg.gamma * model.coefficients.dot(k * model.coefficients);
      CHECK(recomputed - dual >= -1e-9 * (1.0 + std::abs(recomputed)));
      CHECK(recomputed - dual <= cfg.tol * (1.0 + std::abs(recomputed)) + 1e-12);
      CHECK((model.coefficients - model.labels.cwiseProduct(model.dual)).isZero());
    }
  }

  TEST_CASE("solutions agree with an accelerated projected-gradient oracle") {
    std::mt19937_64 rng(53);
    for (int trial = 0; trial < 24; ++trial) {
      const auto p = random_problem(rng, 3 + static_cast<Eigen::Index>(rng() % 10));
      SvmConfig cfg;
      cfg.gamma = trial % 2 ? 0.05 : 0.5;
      cfg.bias = trial % 4 < 2;
      cfg.tol = 1e-9;
      const KernelSpec kernel = pick_kernel(trial);
      const auto model = train_svm(p.x, p.y, kernel, cfg);
      const Eigen::MatrixXd k = gram_matrix(kernel, p.x);
      const Eigen::VectorXd y = as_vector(p.y);
      const auto qp = oracle::hinge_dual_qp(k, y, 1.0 / (2.0 * cfg.gamma), cfg.bias);
      const Eigen::VectorXd alpha = y.cwiseProduct(qp.lambda);
      const double oracle_dual = 2.0 * cfg.gamma * qp.lambda.sum() - cfg.gamma * alpha.dot(k * alpha);
      CHECK(std::abs(model.objective_value - oracle_dual) <= 1e-6 * (1.0 + std::abs(oracle_dual)));
      // The kernel part of f is unique even when lambda and b are not.
      const Eigen::VectorXd f_model = k * model.coefficients, f_oracle = k * alpha;
      CHECK((f_model - f_oracle).cwiseAbs().maxCoeff() <= 1e-4);
      if (cfg.bias && qp.bias_unique) CHECK(std::abs(model.bias - qp.bias) <= 1e-4);
    }
  }

  TEST_CASE("rescaling a linear problem rescales the regularizer") {
    std::mt19937_64 rng(61);
    const auto p = random_problem(rng, 30);
    SvmConfig cfg;
    cfg.gamma = 0.2;
    cfg.tol = 1e-9;
    const auto a = train_svm(p.x, p.y, KernelSpec::linear(), cfg);
    const double s = 3.0;
    SvmConfig scaled = cfg;
    scaled.gamma = cfg.gamma * s * s;
    const auto b = train_svm(p.x * s, p.y, KernelSpec::linear(), scaled);
    CHECK(a.objective_value == doctest::Approx(b.objective_value).epsilon(1e-6));
    CHECK((a.predict_rows(p.x) - b.predict_rows(p.x * s)).cwiseAbs().maxCoeff() <= 1e-4);
  }

  TEST_CASE("flipping every label keeps the objective") {
    std::mt19937_64 rng(71);
    const auto p = random_problem(rng, 25);
    std::vector<int> flipped = p.y;
    for (auto& v : flipped) v = -v;
    SvmConfig cfg;
    cfg.tol = 1e-9;
    const auto a = train_svm(p.x, p.y, KernelSpec::rbf(1.0), cfg);
    const auto b = train_svm(p.x, flipped, KernelSpec::rbf(1.0), cfg);
    CHECK(a.objective_value == doctest::Approx(b.objective_value).epsilon(1e-6));
  }

  TEST_CASE("model csv") {
    Eigen::MatrixXd x(2, 1);
    x << -1, 1;
    SvmConfig cfg;
    cfg.gamma = 0.5;
    const auto model = train_svm(x, std::vector<int>{-1, 1}, KernelSpec::rbf(2.0), cfg);
    std::ostringstream out;
    write_model_csv(model, out);
    std::istringstream in(out.str());
    std::string line;
    std::getline(in, line);
    CHECK(line == "kernel,rbf:2");
    std::getline(in, line);
    CHECK(line.rfind("bias,", 0) == 0);
    std::getline(in, line);
    CHECK(line == "index,alpha");
    std::size_t rows = 0;
    while (std::getline(in, line)) ++rows;
    CHECK(rows == 2);
  }
}
