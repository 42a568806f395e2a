#include "vocalscreen/svm.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>

#include "vocalscreen/error.hpp"

namespace vocalscreen {

double rbf_kernel(std::span<const double> a, std::span<const double> b, double gamma) {
  double dist = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double diff = a[i] - b[i];
    dist += diff * diff;
  }
  return std::exp(-gamma * dist);
}

namespace {

constexpr double kTau = 1e-12;

// Working-set solver for min 1/2 a'Qa - e'a, 0 <= a <= C, y'a = 0, after
// the second-order selection rule of Fan, Chen and Lin (as in LIBSVM).
class SmoSolver {
 public:
  SmoSolver(const Matrix& kernel, std::vector<double> y, double c)
      : kernel_(kernel), y_(std::move(y)), c_(c), n_(y_.size()),
        alpha_(n_, 0.0), grad_(n_, -1.0) {}

  bool solve(double eps, std::size_t max_iter) {
    for (iterations_ = 0; iterations_ < max_iter; ++iterations_) {
      std::size_t i = 0, j = 0;
      if (!select(eps, i, j)) return true;
      update(i, j);
    }
    return false;
  }

  const std::vector<double>& alpha() const { return alpha_; }
  std::size_t iterations() const { return iterations_; }

  double rho() const {
    double ub = std::numeric_limits<double>::infinity();
    double lb = -std::numeric_limits<double>::infinity();
    double sum_free = 0.0;
    std::size_t n_free = 0;
    for (std::size_t t = 0; t < n_; ++t) {
      const double yg = y_[t] * grad_[t];
      if (at_upper(t)) {
        if (y_[t] < 0) ub = std::min(ub, yg); else lb = std::max(lb, yg);
      } else if (at_lower(t)) {
        if (y_[t] > 0) ub = std::min(ub, yg); else lb = std::max(lb, yg);
      } else {
        ++n_free;
        sum_free += yg;
      }
    }
    return n_free > 0 ? sum_free / static_cast<double>(n_free) : 0.5 * (ub + lb);
  }

  // sum(a) - 1/2 a'Qa
  double dual_objective() const {
    double f = 0.0;
    for (std::size_t t = 0; t < n_; ++t) f += alpha_[t] * (grad_[t] - 1.0);
    return -0.5 * f;
  }

 private:
  bool at_upper(std::size_t t) const { return alpha_[t] >= c_; }
  bool at_lower(std::size_t t) const { return alpha_[t] <= 0.0; }
  double q(std::size_t a, std::size_t b) const { return y_[a] * y_[b] * kernel_(a, b); }

  bool select(double eps, std::size_t& out_i, std::size_t& out_j) const {
    double g_max = -std::numeric_limits<double>::infinity();
    std::ptrdiff_t i = -1;
    for (std::size_t t = 0; t < n_; ++t) {
      if (y_[t] > 0) {
        if (!at_upper(t) && -grad_[t] >= g_max) { g_max = -grad_[t]; i = static_cast<std::ptrdiff_t>(t); }
      } else {
        if (!at_lower(t) && grad_[t] >= g_max) { g_max = grad_[t]; i = static_cast<std::ptrdiff_t>(t); }
      }
    }
    if (i < 0) return false;
    const auto ii = static_cast<std::size_t>(i);

    double g_max2 = -std::numeric_limits<double>::infinity();
    double best_obj = std::numeric_limits<double>::infinity();
    std::ptrdiff_t j = -1;
    for (std::size_t t = 0; t < n_; ++t) {
      double grad_diff = 0.0;
      double quad = 0.0;
      if (y_[t] > 0) {
        if (at_lower(t)) continue;
        grad_diff = g_max + grad_[t];
        g_max2 = std::max(g_max2, grad_[t]);
        quad = kernel_(ii, ii) + kernel_(t, t) - 2.0 * y_[ii] * q(ii, t);
      } else {
        if (at_upper(t)) continue;
        grad_diff = g_max - grad_[t];
        g_max2 = std::max(g_max2, -grad_[t]);
        quad = kernel_(ii, ii) + kernel_(t, t) + 2.0 * y_[ii] * q(ii, t);
      }
      if (grad_diff > 0.0) {
        const double obj = -(grad_diff * grad_diff) / (quad > 0.0 ? quad : kTau);
        if (obj <= best_obj) {
          best_obj = obj;
          j = static_cast<std::ptrdiff_t>(t);
        }
      }
    }
    if (g_max + g_max2 < eps || j < 0) return false;
    out_i = ii;
    out_j = static_cast<std::size_t>(j);
    return true;
  }

  void update(std::size_t i, std::size_t j) {
    const double old_i = alpha_[i];
    const double old_j = alpha_[j];
    double& ai = alpha_[i];
    double& aj = alpha_[j];
    const double qii = kernel_(i, i);
    const double qjj = kernel_(j, j);
    const double qij = q(i, j);
    if (y_[i] != y_[j]) {
      double quad = qii + qjj + 2.0 * qij;
      if (quad <= 0.0) quad = kTau;
      const double delta = (-grad_[i] - grad_[j]) / quad;
      const double diff = ai - aj;
      ai += delta;
      aj += delta;
      if (diff > 0.0) {
        if (aj < 0.0) { aj = 0.0; ai = diff; }
      } else {
        if (ai < 0.0) { ai = 0.0; aj = -diff; }
      }
      if (diff > 0.0) {
        if (ai > c_) { ai = c_; aj = c_ - diff; }
      } else {
        if (aj > c_) { aj = c_; ai = c_ + diff; }
      }
    } else {
      double quad = qii + qjj - 2.0 * qij;
      if (quad <= 0.0) quad = kTau;
      const double delta = (grad_[i] - grad_[j]) / quad;
      const double sum = ai + aj;
      ai -= delta;
      aj += delta;
      if (sum > c_) {
        if (ai > c_) { ai = c_; aj = sum - c_; }
      } else {
        if (aj < 0.0) { aj = 0.0; ai = sum; }
      }
      if (sum > c_) {
        if (aj > c_) { aj = c_; ai = sum - c_; }
      } else {
        if (ai < 0.0) { ai = 0.0; aj = sum; }
      }
    }
    const double di = ai - old_i;
    const double dj = aj - old_j;
    for (std::size_t t = 0; t < n_; ++t) grad_[t] += q(i, t) * di + q(j, t) * dj;
  }

  const Matrix& kernel_;
  std::vector<double> y_;
  double c_;
  std::size_t n_;
  std::vector<double> alpha_;
  std::vector<double> grad_;
  std::size_t iterations_ = 0;
};

}  // namespace

SvmRbfModel train_svm_rbf(const Matrix& x, std::span<const int> y, const SvmParams& params) {
  const std::size_t n = x.rows();
  if (y.size() != n) throw Error(ErrorCode::kDimensionMismatch, "row and label counts differ");
  if (!(params.c > 0.0)) throw Error(ErrorCode::kInvalidArgument, "C must be positive");
  if (!(params.gamma >= 0.0)) throw Error(ErrorCode::kInvalidArgument, "gamma must be >= 0");
  std::size_t positives = 0;
  for (int label : y) {
    if (label != 0 && label != 1) throw Error(ErrorCode::kInvalidArgument, "labels must be 0 or 1");
    positives += static_cast<std::size_t>(label);
  }
  if (positives == 0 || positives == n) {
    throw Error(ErrorCode::kSingleClass, "training labels contain a single class");
  }
  for (double v : x.data()) {
    if (!std::isfinite(v)) throw Error(ErrorCode::kNonfiniteInput, "feature matrix has NaN/Inf");
  }

  SvmRbfModel model;
  model.standardizer = Standardizer::fit(x);
  model.c = params.c;
  model.gamma = params.gamma > 0.0 ? params.gamma : 1.0 / static_cast<double>(x.cols());
  const Matrix z = model.standardizer.apply(x);

  Matrix kernel(n, n);
  for (std::size_t a = 0; a < n; ++a) {
    kernel(a, a) = 1.0;
    for (std::size_t b = a + 1; b < n; ++b) {
      const double k = rbf_kernel(z.row(a), z.row(b), model.gamma);
      kernel(a, b) = k;
      kernel(b, a) = k;
    }
  }
  std::vector<double> signs(n);
  for (std::size_t t = 0; t < n; ++t) signs[t] = y[t] == 1 ? 1.0 : -1.0;

  SmoSolver solver(kernel, signs, params.c);
  const std::size_t max_iter =
      params.max_iter > 0 ? params.max_iter : std::max<std::size_t>(1'000'000, 100 * n);
  model.converged = solver.solve(params.tolerance, max_iter);
  model.iterations = solver.iterations();
  if (!model.converged) {
    std::cerr << "warning: NO_CONVERGENCE: SMO stopped after " << model.iterations
              << " iterations; using the last iterate\n";
  }
  model.bias = -solver.rho();
  model.dual_objective = solver.dual_objective();

  const auto& alpha = solver.alpha();
  model.support_vectors = Matrix(0, x.cols());
  for (std::size_t t = 0; t < n; ++t) {
    if (alpha[t] > 0.0) {
      model.support_vectors.append_row(z.row(t));
      model.dual_coef.push_back(alpha[t] * signs[t]);
    }
  }
  return model;
}

double svm_decision_standardized(const SvmRbfModel& model, std::span<const double> z) {
  double acc = model.bias;
  for (std::size_t s = 0; s < model.dual_coef.size(); ++s) {
    acc += model.dual_coef[s] * rbf_kernel(model.support_vectors.row(s), z, model.gamma);
  }
  return acc;
}

double svm_decision(const SvmRbfModel& model, std::span<const double> x) {
  return svm_decision_standardized(model, model.standardizer.apply(x));
}

}  // namespace vocalscreen
