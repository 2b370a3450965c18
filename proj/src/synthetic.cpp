#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>

#include "mmgc/error.hpp"
#include "mmgc/graph_cut.hpp"
#include "mmgc/harness.hpp"
#include "mmgc/lapsvm.hpp"

namespace mmgc {

SyntheticProblem generate_synthetic() {
  SyntheticProblem p;
  p.data.features.resize(36, 2);
  std::vector<std::string> ids;
  std::size_t row = 0;
  for (int j : {-2, -1, 1, 2})
    for (int i = -4; i <= 4; ++i) {
      p.data.features(static_cast<Eigen::Index>(row), 0) = i;
      p.data.features(static_cast<Eigen::Index>(row), 1) = j;
      ids.push_back(j < 0 ? "bottom" : "top");
      p.truth.push_back(j < 0 ? 1 : -1);
      ++row;
    }
  p.data.class_labels = std::move(ids);
  p.graph = build_radius_graph(p.data.features, 1.0, WeightSpec{2.0});
  // Row 0 is (-4, -2); the last row is (4, 2).
  p.labels = {{0, 1}, {35, -1}};
  return p;
}

KernelSpec synthetic_kernel(const std::string& family) {
  if (family == "linear") return KernelSpec::linear();
  if (family == "cubic") return KernelSpec::cubic(1.0);
  if (family == "rbf") return KernelSpec::rbf(1.0);
  return KernelSpec::parse(family);
}

bool synthetic_uses_bias(const KernelSpec& kernel) { return kernel.kind != KernelSpec::Kind::linear; }

namespace {

ProbeDump probe(const SvmModel& model, const Eigen::MatrixXd& points, std::size_t resolution) {
  ProbeDump d;
  const Eigen::RowVectorXd lo = points.colwise().minCoeff().array() - 1.0;
  const Eigen::RowVectorXd hi = points.colwise().maxCoeff().array() + 1.0;
  const auto r = static_cast<Eigen::Index>(resolution);
  d.xs = Eigen::VectorXd::LinSpaced(r, lo(0), hi(0));
  d.ys = Eigen::VectorXd::LinSpaced(r, lo(1), hi(1));
  d.scores.resize(r, r);
  Eigen::Vector2d x;
  for (Eigen::Index iy = 0; iy < r; ++iy)
    for (Eigen::Index ix = 0; ix < r; ++ix) {
      x << d.xs(ix), d.ys(iy);
      d.scores(iy, ix) = model.predict(x);
    }
  return d;
}

}  // namespace

SyntheticStudy run_synthetic_study(const std::vector<double>& gamma_g_values, const std::vector<std::string>& kernels,
                                   double gamma, double epsilon, std::size_t probe_resolution) {
  if (gamma_g_values.empty() || kernels.empty()) throw InvalidArgument("empty gamma_g grid or kernel list");
  const SyntheticProblem p = generate_synthetic();
  const GraphLaplacian L = laplacian(p.graph);
  const double nan = std::numeric_limits<double>::quiet_NaN();

  SyntheticStudy study;
  study.table.extra_columns = {"train_error"};
  for (const auto& family : kernels) {
    const KernelSpec kernel = synthetic_kernel(family);
    const bool bias = synthetic_uses_bias(kernel);
    for (double gamma_g : gamma_g_values) {
      for (const char* algorithm : {"gc", "mr"}) {
        ResultRow row;
        row.dataset = "synthetic";
        row.task = "bottom-vs-top";
        row.algorithm = algorithm;
        row.kernel = kernel.family();
        row.fraction = static_cast<double>(p.labels.size()) / static_cast<double>(p.data.size());
        row.gamma = gamma;
        row.gamma_g = gamma_g;
        row.epsilon = epsilon;
        row.val_error = row.test_error = nan;
        try {
          SvmModel model;
          if (row.algorithm == "gc") {
            GraphCutConfig cfg;
            cfg.gamma_g = gamma_g;
            cfg.epsilon = epsilon;
            cfg.kernel = kernel;
            cfg.gamma = gamma;
            cfg.bias = bias;
            auto res = train_graph_cut(p.data.features, p.graph, p.labels, cfg);
            row.induced_size = res.induced.indices.size();
            row.gamma_u = gamma_g > 0.0 ? gamma / gamma_g : std::numeric_limits<double>::infinity();
            model = std::move(res.model);
          } else {
            if (!(gamma_g > 0.0)) throw InvalidArgument("manifold regularization needs gamma_g > 0 to link gamma_u");
            LapSvmConfig cfg;
            cfg.gamma = gamma;
            cfg.gamma_u = gamma / gamma_g;
            cfg.kernel = kernel;
            cfg.bias = bias;
            auto res = train_lapsvm(p.data.features, L, p.labels, cfg);
            row.gamma_u = cfg.gamma_u;
            row.induced_size = p.labels.size();
            model = std::move(res.model);
          }
          // The whole set is the training set; errors are against the ribbon labels.
          const double err = misclassification_rate(model, p.data.features, p.truth);
          row.val_error = row.test_error = err;
          row.extras["train_error"] = err;
          ProbeDump dump = probe(model, p.data.features, probe_resolution);
          dump.algorithm = row.algorithm;
          dump.kernel = row.kernel;
          dump.gamma_g = gamma_g;
          study.probes.push_back(std::move(dump));
        } catch (const std::exception& e) {
          row.failure = e.what();
          row.extras["train_error"] = nan;
        }
        study.table.rows.push_back(std::move(row));
      }
    }
  }
  study.table.sort_rows();
  return study;
}

void write_probe_csv(const ProbeDump& probe, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw InvalidArgument("cannot write " + path);
  out << "x,y,score\n" << std::setprecision(6);
  for (Eigen::Index iy = 0; iy < probe.scores.rows(); ++iy)
    for (Eigen::Index ix = 0; ix < probe.scores.cols(); ++ix)
      out << probe.xs(ix) << ',' << probe.ys(iy) << ',' << probe.scores(iy, ix) << '\n';
  if (!out) throw InvalidArgument("failed writing " + path);
}

}  // namespace mmgc
