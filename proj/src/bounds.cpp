#include "mmgc/bounds.hpp"

#include <cmath>

#include <json.hpp>

#include "mmgc/error.hpp"

namespace mmgc {

std::vector<std::string> BoundInputs::validate() const {
  if (h == 0 || n == 0 || n_l == 0) throw InvalidArgument("h, n and n_l must be positive");
  if (!(eta > 0.0 && eta < 1.0)) throw InvalidArgument("eta must lie in (0, 1)");
  if (!(delta > 0.0 && delta < 1.0)) throw InvalidArgument("delta must lie in (0, 1)");
  if (!(gamma_g >= 0.0)) throw InvalidArgument("gamma_g must be nonnegative");
  if (!(c_u > 0.0 && c_u <= 1.0)) throw InvalidArgument("c_u must lie in (0, 1]");
  if (!(lambda_max >= 0.0)) throw InvalidArgument("lambda_max must be nonnegative");
  if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw InvalidArgument("epsilon must lie in [0, 1]");
  if (n_l > n) throw InvalidArgument("n_l exceeds n");
  if (n_eps > n) throw InvalidArgument("n_eps exceeds n");
  std::vector<std::string> warnings;
  if (h > n) warnings.push_back("h exceeds n; the inductive term is vacuous");
  return warnings;
}

double inductive_error(std::size_t h, std::size_t n, double eta) {
  if (h == 0 || n == 0) throw InvalidArgument("h and n must be positive");
  if (!(eta > 0.0 && eta < 1.0)) throw InvalidArgument("eta must lie in (0, 1)");
  const double hd = static_cast<double>(h), nd = static_cast<double>(n);
  const double radicand = (hd * (std::log(2.0 * nd / hd) + 1.0) - std::log(eta / 4.0)) / nd;
  if (!(radicand > 0.0)) throw InvalidArgument("inductive error radicand is nonpositive (vacuous regime)");
  return std::sqrt(radicand);
}

double stability_beta(double gamma_g, std::size_t n_l, double c_u, double lambda_max) {
  if (!(c_u > 0.0 && c_u <= 1.0)) throw InvalidArgument("c_u must lie in (0, 1]");
  if (!(gamma_g >= 0.0)) throw InvalidArgument("gamma_g must be nonnegative");
  const double sqrt_cu = std::sqrt(c_u);
  const double first = std::sqrt(2.0) / (gamma_g + 1.0);
  const double second = std::sqrt(2.0 * static_cast<double>(n_l)) * ((1.0 - sqrt_cu) / sqrt_cu) *
                        ((lambda_max + gamma_g) / (gamma_g * gamma_g + 1.0));
  return 2.0 * (first + second);
}

double transductive_error(double beta, std::size_t n_l, double delta) {
  if (!(delta > 0.0 && delta < 1.0)) throw InvalidArgument("delta must lie in (0, 1)");
  if (n_l == 0) throw InvalidArgument("n_l must be positive");
  if (!(beta >= 0.0)) throw InvalidArgument("beta must be nonnegative");
  const double nl = static_cast<double>(n_l);
  return beta + std::sqrt(2.0 * std::log(2.0 / delta) / nl) * (nl * beta + 4.0);
}

double assemble_bound_p1(double empirical_risk_induced, double soft_label_risk_labeled, double delta_T, double delta_I) {
  return empirical_risk_induced + soft_label_risk_labeled + delta_T + delta_I;
}

double assemble_bound_p2(double thresholded_empirical_risk, double eps, std::size_t n_eps, std::size_t n,
                         double soft_label_risk_labeled, double delta_T, double delta_I) {
  if (n == 0 || n_eps > n) throw InvalidArgument("need 0 <= n_eps <= n and n > 0");
  const double slack = 2.0 * eps * static_cast<double>(n_eps) / static_cast<double>(n);
  return thresholded_empirical_risk + slack + soft_label_risk_labeled + delta_T + delta_I;
}

EmpiricalRisks empirical_risks(const Eigen::VectorXd& scores, const HarmonicSolution& ell,
                               std::span<const LabeledVertex> truth, double eps) {
  if (static_cast<std::size_t>(scores.size()) != ell.size()) throw InvalidArgument("scores and solution differ in size");
  if (ell.size() == 0) throw InvalidArgument("empty solution");
  EmpiricalRisks r;
  const double n = static_cast<double>(ell.size());
  std::size_t wrong_all = 0, wrong_kept = 0;
  for (Eigen::Index i = 0; i < scores.size(); ++i) {
    const bool mismatch = (scores(i) >= 0.0) != (ell.values(i) >= 0.0);
    if (mismatch) ++wrong_all;
    if (std::abs(ell.values(i)) >= eps && !(ell.values(i) == 0.0 && eps > 0.0)) {
      if (mismatch) ++wrong_kept;
    } else {
      ++r.n_eps;
    }
  }
  r.induced = static_cast<double>(wrong_all) / n;
  r.thresholded = static_cast<double>(wrong_kept) / n + 2.0 * eps * static_cast<double>(r.n_eps) / n;
  if (!truth.empty()) {
    double s = 0.0;
    for (const auto& lv : truth) {
      const double d = ell.values(static_cast<Eigen::Index>(lv.index)) - lv.label;
      s += d * d;
    }
    r.soft_label_labeled = s / static_cast<double>(truth.size());
  }
  return r;
}

BoundReport make_bound_report(const BoundInputs& in, const EmpiricalRisks& risks) {
  BoundReport r;
  r.warnings = in.validate();
  r.inputs = in;
  r.beta = stability_beta(in.gamma_g, in.n_l, in.c_u, in.lambda_max);
  r.delta_I = inductive_error(in.h, in.n, in.eta);
  r.delta_T = transductive_error(r.beta, in.n_l, in.delta);
  r.empirical_risk_induced = risks.induced;
  r.soft_label_risk_labeled = risks.soft_label_labeled;
  r.thresholded_risk = risks.thresholded;
  r.bound_p1 = assemble_bound_p1(risks.induced, risks.soft_label_labeled, r.delta_T, r.delta_I);
  // risks.thresholded already carries the 2 eps n_eps / n slack.
  r.bound_p2 = risks.thresholded + risks.soft_label_labeled + r.delta_T + r.delta_I;
  r.confidence = 1.0 - (in.eta + in.delta);
  return r;
}

std::string bound_report_json(const BoundReport& r) {
  nlohmann::ordered_json j;
  j["inputs"] = {{"h", r.inputs.h},           {"n", r.inputs.n},         {"n_l", r.inputs.n_l},
                 {"eta", r.inputs.eta},       {"delta", r.inputs.delta}, {"gamma_g", r.inputs.gamma_g},
                 {"c_u", r.inputs.c_u},       {"lambda_max", r.inputs.lambda_max},
                 {"epsilon", r.inputs.epsilon}, {"n_eps", r.inputs.n_eps}};
  j["beta"] = r.beta;
  j["delta_I"] = r.delta_I;
  j["delta_T"] = r.delta_T;
  j["empirical_risk_induced"] = r.empirical_risk_induced;
  j["soft_label_risk_labeled"] = r.soft_label_risk_labeled;
  j["thresholded_risk"] = r.thresholded_risk;
  j["bound_p1"] = r.bound_p1;
  j["bound_p2"] = r.bound_p2;
  j["confidence"] = r.confidence;
  j["warnings"] = r.warnings;
  return j.dump(2);
}

}  // namespace mmgc
