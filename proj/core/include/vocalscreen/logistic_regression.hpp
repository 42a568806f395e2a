#ifndef VOCALSCREEN_LOGISTIC_REGRESSION_HPP_
#define VOCALSCREEN_LOGISTIC_REGRESSION_HPP_

#include <cstddef>
#include <span>
#include <vector>

#include "vocalscreen/matrix.hpp"
#include "vocalscreen/standardizer.hpp"

namespace vocalscreen {

struct LogisticRegressionParams {
  double l2_lambda = 0.1;
  std::size_t max_iter = 500;
  double gradient_tol = 1e-8;
};

struct LogRegModel {
  Standardizer standardizer;
  std::vector<double> weights;
  double bias = 0.0;
  double l2_lambda = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
  // Objective after each accepted Newton step, starting at w = 0.
  std::vector<double> loss_history;

  friend bool operator==(const LogRegModel&, const LogRegModel&) = default;
};

struct LogisticObjective {
  double loss = 0.0;
  std::vector<double> grad_w;
  double grad_b = 0.0;
};

// Mean logistic loss plus (lambda/2)||w||^2 (bias unregularised) and its
// analytic gradient, on already standardised rows.
LogisticObjective logistic_objective(const Matrix& x, std::span<const int> y,
                                     std::span<const double> w, double b, double lambda);

// Newton-CG with Armijo backtracking on z-scored features. Stops when the
// gradient infinity-norm drops below gradient_tol or after max_iter steps.
// Throws SINGLE_CLASS.
LogRegModel train_logistic_regression(const Matrix& x, std::span<const int> y,
                                      const LogisticRegressionParams& params = {});

double logreg_decision(const LogRegModel& model, std::span<const double> x);
double logreg_predict_proba(const LogRegModel& model, std::span<const double> x);

double sigmoid(double z);

}  // namespace vocalscreen

#endif  // VOCALSCREEN_LOGISTIC_REGRESSION_HPP_
