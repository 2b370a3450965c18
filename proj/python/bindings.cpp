#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "mmgc/bounds.hpp"
#include "mmgc/error.hpp"
#include "mmgc/graph.hpp"
#include "mmgc/graph_cut.hpp"
#include "mmgc/harmonic.hpp"
#include "mmgc/harness.hpp"
#include "mmgc/lapsvm.hpp"
#include "mmgc/svm.hpp"

namespace py = pybind11;
using namespace mmgc;

namespace {

using Edge = std::tuple<std::size_t, std::size_t, double>;

std::vector<Edge> edges_of(const SimilarityGraph& g) {
  std::vector<Edge> out;
  for (Eigen::Index c = 0; c < g.weights.outerSize(); ++c)
    for (SparseMatrix::InnerIterator it(g.weights, c); it; ++it)
      if (it.row() < it.col())
        out.emplace_back(static_cast<std::size_t>(it.row()), static_cast<std::size_t>(it.col()), it.value());
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<LabeledVertex> labels_of(const std::map<std::size_t, int>& labels) {
  std::vector<LabeledVertex> out;
  for (const auto& [i, y] : labels) out.push_back({i, y});
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Harmonic solutions, max-margin graph cuts and manifold-regularized SVMs";

  auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<InvalidArgument>(m, "InvalidArgument", base.ptr());
  py::register_exception<ParseError>(m, "ParseError", base.ptr());
  py::register_exception<SingularSystem>(m, "SingularSystem", base.ptr());
  py::register_exception<ConvergenceError>(m, "ConvergenceError", base.ptr());

  py::class_<KernelSpec>(m, "Kernel")
      .def_static("linear", &KernelSpec::linear)
      .def_static("polynomial", &KernelSpec::polynomial, py::arg("degree"), py::arg("offset") = 1.0,
                  py::arg("scale") = 1.0)
      .def_static("cubic", &KernelSpec::cubic, py::arg("scale") = 1.0)
      .def_static("rbf", &KernelSpec::rbf, py::arg("width"))
      .def_static("parse", &KernelSpec::parse)
      .def("__call__", [](const KernelSpec& k, const Eigen::VectorXd& a, const Eigen::VectorXd& b) { return k(a, b); })
      .def_property_readonly("descriptor", &KernelSpec::descriptor)
      .def_property_readonly("family", &KernelSpec::family)
      .def("__repr__", [](const KernelSpec& k) { return "Kernel('" + k.descriptor() + "')"; });

  py::class_<SvmModel>(m, "Model")
      .def("predict", &SvmModel::predict_rows, py::arg("points"))
      .def_readonly("coefficients", &SvmModel::coefficients)
      .def_readonly("dual", &SvmModel::dual)
      .def_readonly("bias", &SvmModel::bias)
      .def_readonly("kernel", &SvmModel::kernel)
      .def_readonly("objective", &SvmModel::objective_value)
      .def_readonly("dual_objective", &SvmModel::dual_value)
      .def_readonly("duality_gap", &SvmModel::duality_gap)
      .def("to_csv", [](const SvmModel& model) {
        std::ostringstream out;
        write_model_csv(model, out);
        return out.str();
      });

  m.def(
      "synthetic",
      [] {
        const auto p = generate_synthetic();
        py::dict d;
        d["points"] = p.data.features;
        d["edges"] = edges_of(p.graph);
        d["labels"] = std::map<std::size_t, int>{{p.labels[0].index, p.labels[0].label},
                                                 {p.labels[1].index, p.labels[1].label}};
        d["truth"] = p.truth;
        return d;
      },
      "The two-ribbon problem: points, radius-1 graph edges, the two labels and ribbon truth.");

  m.def(
      "knn_graph",
      [](const Eigen::MatrixXd& points, std::size_t k, double bandwidth) {
        return edges_of(build_knn_graph(points, k, WeightSpec{bandwidth}));
      },
      py::arg("points"), py::arg("k") = 5, py::arg("bandwidth") = 2.0, "Undirected k-NN edges (i, j, w) with i < j.");

  m.def(
      "radius_graph",
      [](const Eigen::MatrixXd& points, double radius, double bandwidth) {
        return edges_of(build_radius_graph(points, radius, WeightSpec{bandwidth}));
      },
      py::arg("points"), py::arg("radius"), py::arg("bandwidth") = 2.0);

  m.def(
      "harmonic",
      [](std::size_t n, const std::vector<Edge>& edges, const std::map<std::size_t, int>& labels, double gamma_g) {
        HarmonicConfig cfg;
        cfg.gamma_g = gamma_g;
        return solve_hard(laplacian(graph_from_edges(n, edges)), labels_of(labels), cfg).values;
      },
      py::arg("n"), py::arg("edges"), py::arg("labels"), py::arg("gamma_g") = 0.0,
      "Regularized harmonic solution with the labeled vertices clamped.");

  m.def(
      "soft_harmonic",
      [](std::size_t n, const std::vector<Edge>& edges, const std::map<std::size_t, int>& labels, double c_l,
         double c_u, double gamma_g) {
        SoftHarmonicConfig cfg;
        cfg.c_l = c_l;
        cfg.c_u = c_u;
        cfg.gamma_g = gamma_g;
        return solve_soft(laplacian(graph_from_edges(n, edges)), labels_of(labels), cfg).values;
      },
      py::arg("n"), py::arg("edges"), py::arg("labels"), py::arg("c_l") = 1.0, py::arg("c_u") = 0.01,
      py::arg("gamma_g") = 0.0);

  m.def(
      "largest_laplacian_eigenvalue",
      [](std::size_t n, const std::vector<Edge>& edges) {
        return largest_laplacian_eigenvalue(laplacian(graph_from_edges(n, edges)));
      },
      py::arg("n"), py::arg("edges"));

  m.def(
      "train_svm",
      [](const Eigen::MatrixXd& points, const std::vector<int>& labels, const KernelSpec& kernel, double gamma,
         bool bias) {
        SvmConfig cfg;
        cfg.gamma = gamma;
        cfg.bias = bias;
        return train_svm(points, labels, kernel, cfg);
      },
      py::arg("points"), py::arg("labels"), py::arg("kernel") = KernelSpec::linear(), py::arg("gamma") = 1.0,
      py::arg("bias") = true, "Minimizes sum hinge(y f(x)) + gamma |f|^2.");

  m.def(
      "train_graph_cut",
      [](const Eigen::MatrixXd& points, const std::vector<Edge>& edges, const std::map<std::size_t, int>& labels,
         const KernelSpec& kernel, double gamma, double gamma_g, double epsilon, bool bias) {
        GraphCutConfig cfg;
        cfg.kernel = kernel;
        cfg.gamma = gamma;
        cfg.gamma_g = gamma_g;
        cfg.epsilon = epsilon;
        cfg.bias = bias;
        const auto g = graph_from_edges(static_cast<std::size_t>(points.rows()), edges);
        auto res = train_graph_cut(points, g, labels_of(labels), cfg);
        py::dict d;
        d["model"] = std::move(res.model);
        d["harmonic"] = res.harmonic.values;
        d["induced"] = res.induced.indices;
        d["fell_back_to_labeled"] = res.fell_back_to_labeled;
        return d;
      },
      py::arg("points"), py::arg("edges"), py::arg("labels"), py::arg("kernel") = KernelSpec::linear(),
      py::arg("gamma") = 0.1, py::arg("gamma_g") = 0.0, py::arg("epsilon") = 1e-6, py::arg("bias") = true);

  m.def(
      "train_lapsvm",
      [](const Eigen::MatrixXd& points, const std::vector<Edge>& edges, const std::map<std::size_t, int>& labels,
         const KernelSpec& kernel, double gamma, double gamma_u, bool bias) {
        LapSvmConfig cfg;
        cfg.kernel = kernel;
        cfg.gamma = gamma;
        cfg.gamma_u = gamma_u;
        cfg.bias = bias;
        const auto g = graph_from_edges(static_cast<std::size_t>(points.rows()), edges);
        return train_lapsvm(points, laplacian(g), labels_of(labels), cfg).model;
      },
      py::arg("points"), py::arg("edges"), py::arg("labels"), py::arg("kernel") = KernelSpec::linear(),
      py::arg("gamma") = 0.1, py::arg("gamma_u") = 1.0, py::arg("bias") = true);

  m.def("inductive_error", &inductive_error, py::arg("h"), py::arg("n"), py::arg("eta"));
  m.def("stability_beta", &stability_beta, py::arg("gamma_g"), py::arg("n_l"), py::arg("c_u"), py::arg("lambda_max"));
  m.def("transductive_error", &transductive_error, py::arg("beta"), py::arg("n_l"), py::arg("delta"));
  m.def(
      "bound_report",
      [](std::size_t h, std::size_t n, std::size_t n_l, double eta, double delta, double gamma_g, double c_u,
         double lambda_max, double epsilon, std::size_t n_eps, double risk_induced, double risk_thresholded,
         double risk_soft) {
        BoundInputs in{h, n, n_l, eta, delta, gamma_g, c_u, lambda_max, epsilon, n_eps};
        EmpiricalRisks r{risk_induced, risk_thresholded, risk_soft, n_eps};
        return bound_report_json(make_bound_report(in, r));
      },
      py::arg("h") = 3, py::arg("n") = 100, py::arg("n_l") = 10, py::arg("eta") = 0.05, py::arg("delta") = 0.05,
      py::arg("gamma_g") = 1.0, py::arg("c_u") = 0.01, py::arg("lambda_max") = 2.0, py::arg("epsilon") = 1e-6,
      py::arg("n_eps") = 0, py::arg("risk_induced") = 0.0, py::arg("risk_thresholded") = 0.0,
      py::arg("risk_soft") = 0.0, "BoundReport as a JSON string.");

  m.def(
      "synthetic_study",
      [](const std::vector<double>& gamma_g, const std::vector<std::string>& kernels, double gamma, double epsilon) {
        return table_to_json(run_synthetic_study(gamma_g, kernels, gamma, epsilon).table, true);
      },
      py::arg("gamma_g"), py::arg("kernels") = std::vector<std::string>{"linear", "cubic", "rbf"},
      py::arg("gamma") = 0.1, py::arg("epsilon") = 0.01, "Result table of the synthetic sweep as JSON.");

  m.def(
      "uci_protocol",
      [](const std::string& csv, const std::vector<std::string>& kernels, const std::vector<double>& fractions,
         std::size_t repetitions, std::size_t max_tasks, std::size_t max_points, bool consecutive, std::uint64_t seed) {
        ExperimentConfig cfg;
        cfg.source = csv;
        cfg.kernels = kernels;
        cfg.labeled_fractions = fractions;
        cfg.repetitions = repetitions;
        cfg.max_tasks = max_tasks;
        cfg.max_points_per_task = max_points;
        cfg.scheme = consecutive ? TaskScheme::consecutive_pairs : TaskScheme::one_vs_one;
        cfg.seed = seed;
        py::gil_scoped_release release;
        return table_to_json(run_uci_protocol(cfg));
      },
      py::arg("csv"), py::arg("kernels") = std::vector<std::string>{"linear", "cubic", "rbf"},
      py::arg("fractions") = std::vector<double>{0.01, 0.1}, py::arg("repetitions") = 5, py::arg("max_tasks") = 0,
      py::arg("max_points") = 600, py::arg("consecutive") = false, py::arg("seed") = 0,
      "Train/validation/test protocol on a CSV whose last column is the class; result table as JSON.");
}
