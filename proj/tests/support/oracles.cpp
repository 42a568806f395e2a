#include "oracles.hpp"

#include <cmath>
#include <limits>
#include <utility>

namespace oracle {

std::array<double, 14> stats(const std::vector<double>& values) {
  std::vector<double> s = values;
  for (std::size_t i = 0; i < s.size(); ++i) {
    std::size_t best = i;
    for (std::size_t j = i + 1; j < s.size(); ++j) {
      if (s[j] < s[best]) best = j;
    }
    std::swap(s[i], s[best]);
  }
  const std::size_t n = s.size();
  const double nd = static_cast<double>(n);
  auto interp = [&](double p) {
    const double h = (nd - 1.0) * p;
    const double fl = std::floor(h);
    const auto i = static_cast<std::size_t>(fl);
    if (i == n - 1) return s[i];
    return s[i] + (h - fl) * (s[i + 1] - s[i]);
  };
  const double mn = s[0], mx = s[n - 1];
  const double q1 = interp(0.25), med = interp(0.5), q3 = interp(0.75);
  if (mn == mx) {
    return {mn, mx, 0.0, mn, std::fabs(mn), q1, med, q3, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0};
  }
  double sum = 0.0, sq = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sum += s[i];
    sq += s[i] * s[i];
  }
  const double mean = sum / nd;
  double m2 = 0.0, m3 = 0.0, m4 = 0.0, ad = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = s[i] - mean;
    m2 += d * d;
    m3 += d * d * d;
    m4 += d * d * (d * d);
    ad += std::fabs(d);
  }
  m2 /= nd;
  m3 /= nd;
  m4 /= nd;
  const double skew = m2 > 0.0 ? m3 / std::pow(m2, 1.5) : 0.0;
  const double kurt = m2 > 0.0 ? m4 / (m2 * m2) - 3.0 : 0.0;
  return {mn, mx, mx - mn, mean, std::sqrt(sq / nd), q1, med, q3, q3 - q1,
          std::sqrt(m2), m2, skew, kurt, ad / nd};
}

double pairwise_auc(const std::vector<double>& scores, const std::vector<int>& labels) {
  double wins = 0.0, pos = 0.0, neg = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (labels[i] == 1) pos += 1.0; else neg += 1.0;
  }
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (labels[i] != 1) continue;
    for (std::size_t j = 0; j < scores.size(); ++j) {
      if (labels[j] != 0) continue;
      if (scores[i] > scores[j]) wins += 1.0;
      else if (scores[i] == scores[j]) wins += 0.5;
    }
  }
  return wins / (pos * neg);
}

double logistic_loss(const std::vector<std::vector<double>>& x, const std::vector<int>& y,
                     const std::vector<double>& w, double b, double lambda) {
  double total = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    double z = b;
    for (std::size_t j = 0; j < w.size(); ++j) z += w[j] * x[i][j];
    const double p = 1.0 / (1.0 + std::exp(-z));
    total -= y[i] == 1 ? std::log(p) : std::log(1.0 - p);
  }
  double reg = 0.0;
  for (double v : w) reg += v * v;
  return total / static_cast<double>(x.size()) + 0.5 * lambda * reg;
}

std::vector<double> logistic_fd_gradient(const std::vector<std::vector<double>>& x,
                                         const std::vector<int>& y, const std::vector<double>& w,
                                         double b, double lambda, double step) {
  std::vector<double> g(w.size() + 1);
  for (std::size_t j = 0; j <= w.size(); ++j) {
    std::vector<double> wp = w, wm = w;
    double bp = b, bm = b;
    if (j < w.size()) {
      wp[j] += step;
      wm[j] -= step;
    } else {
      bp += step;
      bm -= step;
    }
    g[j] = (logistic_loss(x, y, wp, bp, lambda) - logistic_loss(x, y, wm, bm, lambda)) / (2.0 * step);
  }
  return g;
}

namespace {

double dual_value(const std::vector<std::vector<double>>& k, const std::vector<int>& y,
                  const std::vector<double>& a) {
  double lin = 0.0, quad = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    lin += a[i];
    for (std::size_t j = 0; j < a.size(); ++j) quad += a[i] * a[j] * y[i] * y[j] * k[i][j];
  }
  return lin - 0.5 * quad;
}

}  // namespace

double svm_dual_lattice(const std::vector<std::vector<double>>& kernel,
                        const std::vector<int>& y, double c) {
  const std::size_t n = y.size();
  // The last multiplier is fixed by the equality constraint; the others walk
  // a lattice that is re-centred and refined around the incumbent.
  std::vector<double> lo(n - 1, 0.0), hi(n - 1, c);
  std::vector<double> best_a(n, 0.0);
  double best = dual_value(kernel, y, best_a);
  const int points = 41;
  for (int level = 0; level < 6; ++level) {
    std::vector<int> idx(n - 1, 0);
    while (true) {
      std::vector<double> a(n, 0.0);
      double balance = 0.0;
      for (std::size_t i = 0; i + 1 < n; ++i) {
        a[i] = lo[i] + (hi[i] - lo[i]) * idx[i] / (points - 1);
        balance += a[i] * y[i];
      }
      a[n - 1] = -balance * y[n - 1];
      if (a[n - 1] >= 0.0 && a[n - 1] <= c) {
        const double v = dual_value(kernel, y, a);
        if (v > best) {
          best = v;
          best_a = a;
        }
      }
      std::size_t d = 0;
      while (d < n - 1 && ++idx[d] == points) idx[d++] = 0;
      if (d == n - 1) break;
    }
    for (std::size_t i = 0; i + 1 < n; ++i) {
      const double half = (hi[i] - lo[i]) * 4.0 / (points - 1);
      lo[i] = std::max(0.0, best_a[i] - half);
      hi[i] = std::min(c, best_a[i] + half);
    }
  }
  return best;
}

}  // namespace oracle
