#include <doctest.h>

#include <cmath>
#include <random>

#include "mmgc/error.hpp"
#include "mmgc/harness.hpp"
#include "mmgc/lapsvm.hpp"
#include "oracles.hpp"

using namespace mmgc;

namespace {

// Integer grid {-r..r}^2 with unit weights between 4-neighbors; both axes see
// the same number of edges, so the axis deltas agree.
struct Grid {
  Eigen::MatrixXd x;
  SimilarityGraph g;
  Eigen::Index index(int i, int j, int r) const { return (i + r) * (2 * r + 1) + (j + r); }
};

Grid square_grid(int r) {
  Grid grid;
  const int side = 2 * r + 1;
  grid.x.resize(side * side, 2);
  std::vector<std::tuple<std::size_t, std::size_t, double>> e;
  for (int i = -r; i <= r; ++i)
    for (int j = -r; j <= r; ++j) {
      const auto k = grid.index(i, j, r);
      grid.x(k, 0) = i;
      grid.x(k, 1) = j;
      if (i < r) e.emplace_back(k, grid.index(i + 1, j, r), 1.0);
      if (j < r) e.emplace_back(k, grid.index(i, j + 1, r), 1.0);
    }
  grid.g = graph_from_edges(static_cast<std::size_t>(side * side), e);
  return grid;
}

double angle(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  return std::acos(std::clamp(a.normalized().dot(b.normalized()), -1.0, 1.0));
}

struct Cloud {
  Eigen::MatrixXd x;
  SimilarityGraph g;
  std::vector<LabeledVertex> labels;
};

Cloud random_cloud(std::mt19937_64& rng, Eigen::Index n) {
  std::normal_distribution<double> nd;
  Cloud c;
  c.x.resize(n, 2);
  for (Eigen::Index i = 0; i < n; ++i) {
    c.x(i, 0) = nd(rng) + (i % 2 ? 2.0 : -2.0);
    c.x(i, 1) = nd(rng);
  }
  c.g = build_knn_graph(c.x, 4, WeightSpec{2.0});
  c.labels = {{0, -1}, {1, 1}, {2, -1}, {3, 1}, {5, 1}};
  return c;
}

}  // namespace

TEST_SUITE("lapsvm") {
  TEST_CASE("axis deltas") {
    Eigen::MatrixXd x(3, 2);
    x << 0, 0, 1, 0, 1, 2;
    const auto g = graph_from_edges(3, {{0, 1, 1.0}, {1, 2, 0.5}});
    const Eigen::VectorXd d = axis_aligned_deltas(g, x);
    CHECK(d(0) == 2.0);
    CHECK(d(1) == 4.0);
    const auto diag = graph_from_edges(3, {{0, 2, 1.0}});
    CHECK_THROWS_WITH_AS(axis_aligned_deltas(diag, x), "edge 0-2 is not axis-aligned", InvalidArgument);
    const auto grid = square_grid(2);
    const Eigen::VectorXd gd = axis_aligned_deltas(grid.g, grid.x);
    CHECK(gd(0) == 40.0);
    CHECK(gd(1) == 40.0);
  }

  TEST_CASE("the canonical ribbons have unequal axis deltas") {
    const auto p = generate_synthetic();
    const Eigen::VectorXd d = axis_aligned_deltas(p.graph, p.data.features);
    CHECK(d(0) == doctest::Approx(38.8181).epsilon(1e-5));
    CHECK(d(1) == doctest::Approx(21.8352).epsilon(1e-5));
    const auto L = laplacian(p.graph);
    std::mt19937_64 rng(1);
    std::normal_distribution<double> nd;
    for (int trial = 0; trial < 20; ++trial) {
      const Eigen::Vector2d a(nd(rng), nd(rng));
      const Eigen::VectorXd f = p.data.features * a;
      const double expected = 0.5 * (d(0) * a(0) * a(0) + d(1) * a(1) * a(1));
      CHECK(std::abs(manifold_quadratic_form(L, f) - expected) <= 1e-10 * expected);
    }
  }

  TEST_CASE("quadratic form matches the pairwise sum") {
    std::mt19937_64 rng(6);
    std::normal_distribution<double> nd;
    for (int trial = 0; trial < 10; ++trial) {
      const std::size_t n = 5 + rng() % 30;
      const auto g = graph_from_edges(n, oracle::random_connected_graph(n, rng));
      Eigen::VectorXd f(static_cast<Eigen::Index>(n));
      for (Eigen::Index i = 0; i < f.size(); ++i) f(i) = nd(rng);
      const double a = manifold_quadratic_form(laplacian(g), f), b = pairwise_smoothness(g, f);
      CHECK(std::abs(a - b) <= 1e-10 * b);
    }
    const auto g = graph_from_edges(2, {{0, 1, 3.0}});
    CHECK(manifold_quadratic_form(laplacian(g), Eigen::Vector2d(1, -1)) == 12.0);
    CHECK_THROWS_AS(manifold_quadratic_form(laplacian(g), Eigen::Vector3d(1, 1, 1)), InvalidArgument);
  }

  TEST_CASE("zero gamma_u reduces to a plain SVM on the labeled points") {
    std::mt19937_64 rng(12);
    const auto c = random_cloud(rng, 20);
    for (const auto& kernel : {KernelSpec::linear(), KernelSpec::rbf(1.5)}) {
      LapSvmConfig cfg;
      cfg.kernel = kernel;
      cfg.gamma = 0.2;
      cfg.gamma_u = 0.0;
      cfg.tol = 1e-9;
      CHECK_THROWS_AS(train_lapsvm(c.x, laplacian(c.g), c.labels, cfg), InvalidArgument);
      cfg.allow_zero_gamma_u = true;
      const auto r = train_lapsvm(c.x, laplacian(c.g), c.labels, cfg);
      CHECK(r.zero_gamma_u);
      std::vector<LabeledVertex> sorted = c.labels;
      std::sort(sorted.begin(), sorted.end(), [](auto a, auto b) { return a.index < b.index; });
      Eigen::MatrixXd xl(static_cast<Eigen::Index>(sorted.size()), 2);
      std::vector<int> yl;
      for (std::size_t k = 0; k < sorted.size(); ++k) {
        xl.row(static_cast<Eigen::Index>(k)) = c.x.row(static_cast<Eigen::Index>(sorted[k].index));
        yl.push_back(sorted[k].label);
      }
      const auto svm = train_svm(xl, yl, kernel, SvmConfig{cfg.gamma, true, 1e-9});
      CHECK(r.model.objective_value == doctest::Approx(svm.objective_value).epsilon(1e-6));
      CHECK((r.model.predict_rows(c.x) - svm.predict_rows(c.x)).cwiseAbs().maxCoeff() <= 1e-6);
    }
  }

  TEST_CASE("no perturbation improves the objective") {
    std::mt19937_64 rng(19);
    std::normal_distribution<double> nd;
    for (int trial = 0; trial < 4; ++trial) {
      const auto c = random_cloud(rng, 16);
      LapSvmConfig cfg;
      cfg.kernel = trial % 2 ? KernelSpec::rbf(1.0) : KernelSpec::cubic(0.2);
      cfg.gamma = 0.1;
      cfg.gamma_u = 0.05 * (trial + 1);
      cfg.bias = trial < 2;
      cfg.tol = 1e-10;
      const auto L = laplacian(c.g);
      const auto r = train_lapsvm(c.x, L, c.labels, cfg);
      const Eigen::MatrixXd k = gram_matrix(cfg.kernel, c.x);
      const double best = lapsvm_objective(k, L, c.labels, r.model.coefficients, r.model.bias, cfg.gamma, cfg.gamma_u);
      CHECK(best == doctest::Approx(r.model.objective_value));
      CHECK(r.model.duality_gap <= cfg.tol * (1.0 + best));
      for (int p = 0; p < 50; ++p) {
        Eigen::VectorXd da(k.rows());
        for (Eigen::Index i = 0; i < da.size(); ++i) da(i) = nd(rng);
        const double scale = std::pow(10.0, -1.0 - (p % 4));
        const double db = cfg.bias ? scale * nd(rng) : 0.0;
        const double moved =
            lapsvm_objective(k, L, c.labels, r.model.coefficients + scale * da, r.model.bias + db, cfg.gamma, cfg.gamma_u);
        CHECK(moved >= best - 1e-9 * (1.0 + best));
      }
    }
  }

  TEST_CASE("linear model on an isotropic grid equals an SVM with a larger regularizer") {
    const int r = 2;
    const auto grid = square_grid(r);
    const double delta = 40.0;
    const std::vector<LabeledVertex> labels{{static_cast<std::size_t>(grid.index(-2, -1, r)), 1},
                                            {static_cast<std::size_t>(grid.index(1, -2, r)), 1},
                                            {static_cast<std::size_t>(grid.index(2, 1, r)), -1}};
    Eigen::MatrixXd xl(3, 2);
    std::vector<int> yl;
    std::vector<LabeledVertex> sorted = labels;
    std::sort(sorted.begin(), sorted.end(), [](auto a, auto b) { return a.index < b.index; });
    for (std::size_t k = 0; k < 3; ++k) {
      xl.row(static_cast<Eigen::Index>(k)) = grid.x.row(static_cast<Eigen::Index>(sorted[k].index));
      yl.push_back(sorted[k].label);
    }
    for (double gamma_u : {1e-3, 1e-2, 0.1, 1.0, 10.0}) {
      LapSvmConfig cfg;
      cfg.gamma = 0.1;
      cfg.gamma_u = gamma_u;
      cfg.bias = false;
      cfg.tol = 1e-10;
      const auto lap = train_lapsvm(grid.x, laplacian(grid.g), labels, cfg);
      const auto svm = train_svm(xl, yl, KernelSpec::linear(), SvmConfig{cfg.gamma + gamma_u * delta / 2.0, false, 1e-10});
      const Eigen::VectorXd w_lap = linear_weights(lap.model), w_svm = linear_weights(svm);
      CHECK((w_lap - w_svm).norm() <= 1e-6 * (1.0 + w_svm.norm()));
      CHECK(lap.model.objective_value == doctest::Approx(svm.objective_value).epsilon(1e-6));
    }
  }

  TEST_CASE("symmetric labels on an isotropic grid fix the direction") {
    const int r = 2;
    const auto grid = square_grid(r);
    const std::vector<LabeledVertex> labels{{static_cast<std::size_t>(grid.index(-2, -1, r)), 1},
                                            {static_cast<std::size_t>(grid.index(2, 1, r)), -1}};
    const Eigen::Vector2d expected(-2.0, -1.0);
    for (double gamma_u : {1e-3, 1e-1, 10.0, 1e3}) {
      LapSvmConfig cfg;
      cfg.gamma_u = gamma_u;
      cfg.bias = false;
      const auto lap = train_lapsvm(grid.x, laplacian(grid.g), labels, cfg);
      CHECK(angle(linear_weights(lap.model), expected) <= 1e-6);
    }
  }

  TEST_CASE("the subgradient path approaches the dual solution") {
    std::mt19937_64 rng(23);
    const auto c = random_cloud(rng, 14);
    LapSvmConfig cfg;
    cfg.kernel = KernelSpec::rbf(1.0);
    cfg.gamma = 0.5;
    cfg.gamma_u = 0.1;
    const auto L = laplacian(c.g);
    const auto exact = train_lapsvm(c.x, L, c.labels, cfg);
    cfg.force_subgradient = true;
    cfg.subgradient_iterations = 20000;
    const auto approx = train_lapsvm(c.x, L, c.labels, cfg);
    CHECK(approx.used_subgradient);
    CHECK(std::isnan(approx.model.duality_gap));
    CHECK(approx.model.objective_value >= exact.model.objective_value - 1e-6);
    CHECK(approx.model.objective_value <= exact.model.objective_value * 1.02 + 1e-3);
  }

  TEST_CASE("preconditions") {
    std::mt19937_64 rng(29);
    const auto c = random_cloud(rng, 10);
    const auto L = laplacian(c.g);
    LapSvmConfig cfg;
    CHECK_THROWS_AS(train_lapsvm(c.x, L, std::vector<LabeledVertex>{{0, 1}, {1, 1}}, cfg), InvalidArgument);
    CHECK_THROWS_AS(train_lapsvm(c.x, L, std::vector<LabeledVertex>{{0, 1}, {0, -1}}, cfg), InvalidArgument);
    CHECK_THROWS_AS(train_lapsvm(c.x, L, std::vector<LabeledVertex>{{0, 1}, {40, -1}}, cfg), InvalidArgument);
    CHECK_THROWS_AS(train_lapsvm(c.x.topRows(5), L, c.labels, cfg), InvalidArgument);
    cfg.gamma = 0.0;
    CHECK_THROWS_AS(train_lapsvm(c.x, L, c.labels, cfg), InvalidArgument);
  }
}
