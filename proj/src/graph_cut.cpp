#include "mmgc/graph_cut.hpp"

#include <algorithm>
#include <vector>

#include "mmgc/error.hpp"

namespace mmgc {

GraphCutResult train_graph_cut(const Eigen::MatrixXd& points, const SimilarityGraph& g,
                               std::span<const LabeledVertex> labels, const GraphCutConfig& cfg) {
  if (static_cast<std::size_t>(points.rows()) != g.n) throw InvalidArgument("graph and points differ in size");
  const auto L = laplacian(g);
  HarmonicSolution h = cfg.soft_mode ? solve_soft(L, labels, SoftHarmonicConfig{cfg.c_l, cfg.c_u, cfg.gamma_g})
                                     : solve_hard(L, labels, HarmonicConfig{cfg.gamma_g, 1e-10, 10000});
  return train_graph_cut(points, h, labels, cfg);
}

GraphCutResult train_graph_cut(const Eigen::MatrixXd& points, const HarmonicSolution& harmonic,
                               std::span<const LabeledVertex> labels, const GraphCutConfig& cfg) {
  if (!(cfg.epsilon >= 0.0 && cfg.epsilon <= 1.0)) throw InvalidArgument("epsilon must lie in [0, 1]");
  if (!(cfg.gamma > 0.0)) throw InvalidArgument("gamma must be positive");
  if (harmonic.size() != static_cast<std::size_t>(points.rows()))
    throw InvalidArgument("harmonic solution and points differ in size");

  bool has_pos = false, has_neg = false;
  for (const auto& lv : labels) (lv.label > 0 ? has_pos : has_neg) = true;
  if (!(has_pos && has_neg)) throw InvalidArgument("graph cut needs labeled points of both classes");

  GraphCutResult out;
  out.harmonic = harmonic;
  out.induced = threshold_labels(harmonic, cfg.epsilon);
  if (out.induced.indices.empty()) throw InvalidArgument("induced training set is empty");

  std::vector<std::size_t> rows = out.induced.indices;
  std::vector<int> y = out.induced.labels;
  const bool one_class = std::all_of(y.begin(), y.end(), [&](int v) { return v == y.front(); });
  if (one_class) {
    out.fell_back_to_labeled = true;
    std::vector<LabeledVertex> sorted(labels.begin(), labels.end());
    std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) { return a.index < b.index; });
    rows.clear();
    y.clear();
    for (const auto& lv : sorted) {
      rows.push_back(lv.index);
      y.push_back(lv.label);
    }
  }

  Eigen::MatrixXd train(static_cast<Eigen::Index>(rows.size()), points.cols());
  for (std::size_t k = 0; k < rows.size(); ++k) train.row(static_cast<Eigen::Index>(k)) = points.row(static_cast<Eigen::Index>(rows[k]));
  out.model = train_svm(train, y, cfg.kernel, SvmConfig{cfg.gamma, cfg.bias, cfg.svm_tol, cfg.svm_max_passes});
  return out;
}

double misclassification_rate(const Eigen::VectorXd& scores, std::span<const int> truth) {
  if (truth.empty()) throw InvalidArgument("misclassification rate of an empty set");
  if (static_cast<std::size_t>(scores.size()) != truth.size()) throw InvalidArgument("scores and truth differ in size");
  std::size_t wrong = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const int predicted = scores(static_cast<Eigen::Index>(i)) >= 0.0 ? 1 : -1;
    if (predicted != truth[i]) ++wrong;
  }
  return static_cast<double>(wrong) / static_cast<double>(truth.size());
}

double misclassification_rate(const SvmModel& model, const Eigen::MatrixXd& points, std::span<const int> truth) {
  if (truth.empty()) throw InvalidArgument("misclassification rate of an empty set");
  return misclassification_rate(model.predict_rows(points), truth);
}

}  // namespace mmgc
