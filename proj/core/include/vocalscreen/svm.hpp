#ifndef VOCALSCREEN_SVM_HPP_
#define VOCALSCREEN_SVM_HPP_

#include <cstddef>
#include <span>
#include <vector>

#include "vocalscreen/matrix.hpp"
#include "vocalscreen/standardizer.hpp"

namespace vocalscreen {

struct SvmParams {
  double c = 1.0;
  // 0 selects 1 / n_features.
  double gamma = 0.0;
  double tolerance = 1e-3;
  // 0 selects max(10^6, 100 n) working-set iterations.
  std::size_t max_iter = 0;
};

struct SvmRbfModel {
  Standardizer standardizer;
  Matrix support_vectors;          // standardised rows
  std::vector<double> dual_coef;   // alpha_i * y_i, y in {-1, +1}
  double bias = 0.0;
  double gamma = 0.0;
  double c = 0.0;
  double dual_objective = 0.0;     // sum(alpha) - 1/2 alpha' Q alpha
  std::size_t iterations = 0;
  bool converged = false;

  friend bool operator==(const SvmRbfModel&, const SvmRbfModel&) = default;
};

double rbf_kernel(std::span<const double> a, std::span<const double> b, double gamma);

// C-SVC dual solved by SMO with second-order working-set selection. On
// hitting max_iter the current iterate is returned with converged = false.
// Throws SINGLE_CLASS.
SvmRbfModel train_svm_rbf(const Matrix& x, std::span<const int> y, const SvmParams& params = {});

// Uncalibrated decision value sum(alpha_i y_i K(x_i, x)) + b.
double svm_decision(const SvmRbfModel& model, std::span<const double> x);
// Same, for a row that is already standardised.
double svm_decision_standardized(const SvmRbfModel& model, std::span<const double> z);

}  // namespace vocalscreen

#endif  // VOCALSCREEN_SVM_HPP_
