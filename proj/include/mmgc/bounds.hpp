#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "mmgc/harmonic.hpp"

namespace mmgc {

/// Quantities entering the generalization bounds. h (a VC dimension) is
/// supplied by the caller; h = K + 1 suits a linear classifier with bias.
struct BoundInputs {
  std::size_t h = 3;
  std::size_t n = 100;
  std::size_t n_l = 10;
  double eta = 0.05;
  double delta = 0.05;
  double gamma_g = 1.0;
  double c_u = 0.01;
  double lambda_max = 2.0;
  double epsilon = 1e-6;
  std::size_t n_eps = 0;

  /// Hard errors for out-of-range inputs; soft problems go to the returned warnings.
  std::vector<std::string> validate() const;
};

struct EmpiricalRisks {
  double induced = 0.0;      // (1/n) sum 1{sgn f != sgn ell}
  double thresholded = 0.0;  // same over |ell| >= eps, plus 2 eps n_eps / n
  double soft_label_labeled = 0.0;  // (1/n_l) sum_{l} (ell_i - y_i)^2
  std::size_t n_eps = 0;
};

struct BoundReport {
  BoundInputs inputs;
  double beta = 0.0;
  double delta_I = 0.0;
  double delta_T = 0.0;
  double empirical_risk_induced = 0.0;
  double soft_label_risk_labeled = 0.0;
  double thresholded_risk = 0.0;
  double bound_p1 = 0.0;
  double bound_p2 = 0.0;
  double confidence = 0.0;  // 1 - (eta + delta)
  std::vector<std::string> warnings;
};

/// sqrt((h (ln(2n/h) + 1) - ln(eta/4)) / n). Throws on a nonpositive radicand.
double inductive_error(std::size_t h, std::size_t n, double eta);

/// 2 [sqrt2/(gamma_g+1) + sqrt(2 n_l) (1 - sqrt c_u)/sqrt c_u (lambda_max + gamma_g)/(gamma_g^2 + 1)]
double stability_beta(double gamma_g, std::size_t n_l, double c_u, double lambda_max);

/// beta + sqrt(2 ln(2/delta) / n_l) (n_l beta + 4)
double transductive_error(double beta, std::size_t n_l, double delta);

double assemble_bound_p1(double empirical_risk_induced, double soft_label_risk_labeled, double delta_T, double delta_I);

double assemble_bound_p2(double thresholded_empirical_risk, double eps, std::size_t n_eps, std::size_t n,
                         double soft_label_risk_labeled, double delta_T, double delta_I);

/// `scores` holds f(x_i) for every vertex of the harmonic solution. A zero
/// score or ell counts as +1.
EmpiricalRisks empirical_risks(const Eigen::VectorXd& scores, const HarmonicSolution& ell,
                               std::span<const LabeledVertex> truth, double eps);

BoundReport make_bound_report(const BoundInputs& in, const EmpiricalRisks& risks);

/// JSON object with every input echoed under "inputs".
std::string bound_report_json(const BoundReport& report);

}  // namespace mmgc
