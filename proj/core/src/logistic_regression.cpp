#include "vocalscreen/logistic_regression.hpp"

#include <algorithm>
#include <cmath>

#include "vocalscreen/error.hpp"

namespace vocalscreen {

Standardizer Standardizer::fit(const Matrix& x) {
  Standardizer s;
  const std::size_t n = x.rows();
  s.mean.assign(x.cols(), 0.0);
  s.scale.assign(x.cols(), 1.0);
  for (std::size_t c = 0; c < x.cols(); ++c) {
    double sum = 0.0;
    for (std::size_t r = 0; r < n; ++r) sum += x(r, c);
    const double mean = sum / static_cast<double>(n);
    double ss = 0.0;
    for (std::size_t r = 0; r < n; ++r) ss += (x(r, c) - mean) * (x(r, c) - mean);
    const double sd = std::sqrt(ss / static_cast<double>(n));
    s.mean[c] = mean;
    s.scale[c] = sd > 0.0 ? sd : 1.0;
  }
  return s;
}

std::vector<double> Standardizer::apply(std::span<const double> row) const {
  if (row.size() != mean.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "input has " + std::to_string(row.size()) +
                                                   " features, model expects " +
                                                   std::to_string(mean.size()));
  }
  std::vector<double> out(row.size());
  for (std::size_t c = 0; c < row.size(); ++c) out[c] = (row[c] - mean[c]) / scale[c];
  return out;
}

Matrix Standardizer::apply(const Matrix& x) const {
  Matrix out(x.rows(), x.cols());
  for (std::size_t r = 0; r < x.rows(); ++r) {
    const auto z = apply(x.row(r));
    std::copy(z.begin(), z.end(), out.row(r).begin());
  }
  return out;
}

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

namespace {

double softplus(double z) {
  return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
}

double dot(std::span<const double> a, std::span<const double> b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

void check_labels(std::span<const int> y, std::size_t rows) {
  if (y.size() != rows) throw Error(ErrorCode::kDimensionMismatch, "row and label counts differ");
  std::size_t positives = 0;
  for (int label : y) {
    if (label != 0 && label != 1) throw Error(ErrorCode::kInvalidArgument, "labels must be 0 or 1");
    positives += static_cast<std::size_t>(label);
  }
  if (positives == 0 || positives == y.size()) {
    throw Error(ErrorCode::kSingleClass, "training labels contain a single class");
  }
}

double objective_value(const Matrix& x, std::span<const int> y, std::span<const double> w,
                       double b, double lambda) {
  double loss = 0.0;
  for (std::size_t i = 0; i < x.rows(); ++i) {
    const double z = dot(x.row(i), w) + b;
    loss += softplus(z) - y[i] * z;
  }
  // Same operation order as logistic_objective, so both agree bit for bit.
  return loss * (1.0 / static_cast<double>(x.rows())) + 0.5 * lambda * dot(w, w);
}

}  // namespace

LogisticObjective logistic_objective(const Matrix& x, std::span<const int> y,
                                     std::span<const double> w, double b, double lambda) {
  const std::size_t n = x.rows();
  LogisticObjective out;
  out.grad_w.assign(w.size(), 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto row = x.row(i);
    const double z = dot(row, w) + b;
    out.loss += softplus(z) - y[i] * z;
    const double residual = sigmoid(z) - y[i];
    out.grad_b += residual;
    for (std::size_t j = 0; j < w.size(); ++j) out.grad_w[j] += residual * row[j];
  }
  const double inv_n = 1.0 / static_cast<double>(n);
  out.loss = out.loss * inv_n + 0.5 * lambda * dot(w, w);
  out.grad_b *= inv_n;
  for (std::size_t j = 0; j < w.size(); ++j) out.grad_w[j] = out.grad_w[j] * inv_n + lambda * w[j];
  return out;
}

LogRegModel train_logistic_regression(const Matrix& x, std::span<const int> y,
                                      const LogisticRegressionParams& params) {
  check_labels(y, x.rows());
  if (!(params.l2_lambda >= 0.0)) throw Error(ErrorCode::kInvalidArgument, "l2_lambda must be >= 0");
  for (double v : x.data()) {
    if (!std::isfinite(v)) throw Error(ErrorCode::kNonfiniteInput, "feature matrix has NaN/Inf");
  }

  LogRegModel model;
  model.standardizer = Standardizer::fit(x);
  model.l2_lambda = params.l2_lambda;
  const Matrix z = model.standardizer.apply(x);
  const std::size_t n = z.rows();
  const std::size_t d = z.cols();
  const double lambda = params.l2_lambda;

  std::vector<double> w(d, 0.0);
  double b = 0.0;
  std::vector<double> curvature(n);
  std::vector<double> step_w(d), r_w(d), p_w(d), hp_w(d), trial_w(d);

  // Hessian-vector product at the current curvature weights.
  auto hessian_times = [&](std::span<const double> v_w, double v_b, std::span<double> out_w,
                           double& out_b) {
    std::fill(out_w.begin(), out_w.end(), 0.0);
    out_b = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const auto row = z.row(i);
      const double u = curvature[i] * (dot(row, v_w) + v_b);
      out_b += u;
      for (std::size_t j = 0; j < d; ++j) out_w[j] += u * row[j];
    }
    const double inv_n = 1.0 / static_cast<double>(n);
    out_b *= inv_n;
    for (std::size_t j = 0; j < d; ++j) out_w[j] = out_w[j] * inv_n + lambda * v_w[j];
  };

  auto obj = logistic_objective(z, y, w, b, lambda);
  model.loss_history.push_back(obj.loss);
  for (std::size_t iter = 0; iter < params.max_iter; ++iter) {
    double g_inf = std::abs(obj.grad_b);
    for (double g : obj.grad_w) g_inf = std::max(g_inf, std::abs(g));
    if (g_inf < params.gradient_tol) {
      model.converged = true;
      break;
    }

    for (std::size_t i = 0; i < n; ++i) {
      const double p = sigmoid(dot(z.row(i), w) + b);
      curvature[i] = p * (1.0 - p);
    }

    // Truncated conjugate gradient on H s = -g.
    const double g_norm =
        std::sqrt(dot(obj.grad_w, obj.grad_w) + obj.grad_b * obj.grad_b);
    const double cg_tol = std::min(0.5, std::sqrt(g_norm)) * g_norm;
    std::fill(step_w.begin(), step_w.end(), 0.0);
    double step_b = 0.0;
    for (std::size_t j = 0; j < d; ++j) r_w[j] = -obj.grad_w[j];
    double r_b = -obj.grad_b;
    p_w = r_w;
    double p_b = r_b;
    double rr = dot(r_w, r_w) + r_b * r_b;
    const std::size_t cg_max = std::min<std::size_t>(d + 1, 1000);
    for (std::size_t k = 0; k < cg_max; ++k) {
      double hp_b = 0.0;
      hessian_times(p_w, p_b, hp_w, hp_b);
      const double curv = dot(p_w, hp_w) + p_b * hp_b;
      if (!(curv > 0.0)) {
        if (k == 0) {
          step_w = r_w;
          step_b = r_b;
        }
        break;
      }
      const double alpha = rr / curv;
      for (std::size_t j = 0; j < d; ++j) {
        step_w[j] += alpha * p_w[j];
        r_w[j] -= alpha * hp_w[j];
      }
      step_b += alpha * p_b;
      r_b -= alpha * hp_b;
      const double rr_next = dot(r_w, r_w) + r_b * r_b;
      if (std::sqrt(rr_next) <= cg_tol) break;
      const double beta = rr_next / rr;
      rr = rr_next;
      for (std::size_t j = 0; j < d; ++j) p_w[j] = r_w[j] + beta * p_w[j];
      p_b = r_b + beta * p_b;
    }

    // Armijo backtracking keeps the objective non-increasing.
    const double slope = dot(obj.grad_w, step_w) + obj.grad_b * step_b;
    if (!(slope < 0.0)) break;
    double t = 1.0;
    bool accepted = false;
    for (int halvings = 0; halvings < 60; ++halvings, t *= 0.5) {
      for (std::size_t j = 0; j < d; ++j) trial_w[j] = w[j] + t * step_w[j];
      const double trial_b = b + t * step_b;
      const double value = objective_value(z, y, trial_w, trial_b, lambda);
      if (value <= obj.loss + 1e-4 * t * slope) {
        w = trial_w;
        b = trial_b;
        accepted = true;
        break;
      }
    }
    if (!accepted) break;
    obj = logistic_objective(z, y, w, b, lambda);
    model.loss_history.push_back(obj.loss);
    model.iterations = iter + 1;
  }
  if (!model.converged) {
    double g_inf = std::abs(obj.grad_b);
    for (double g : obj.grad_w) g_inf = std::max(g_inf, std::abs(g));
    model.converged = g_inf < params.gradient_tol;
  }
  model.weights = std::move(w);
  model.bias = b;
  return model;
}

double logreg_decision(const LogRegModel& model, std::span<const double> x) {
  const auto z = model.standardizer.apply(x);
  return dot(z, model.weights) + model.bias;
}

double logreg_predict_proba(const LogRegModel& model, std::span<const double> x) {
  return sigmoid(logreg_decision(model, x));
}

}  // namespace vocalscreen
