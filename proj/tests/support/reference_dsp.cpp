#include "reference_dsp.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace refdsp {

std::vector<double> reflect_pad(const std::vector<double>& x, std::size_t pad) {
  const long n = static_cast<long>(x.size());
  std::vector<double> out;
  for (long i = -static_cast<long>(pad); i < n + static_cast<long>(pad); ++i) {
    // Bounce off the ends until the index lands inside.
    long j = i;
    while (j < 0 || j >= n) {
      if (j < 0) j = -j;
      if (j >= n) j = 2 * (n - 1) - j;
    }
    out.push_back(x[static_cast<std::size_t>(j)]);
  }
  return out;
}

Grid frames(const std::vector<double>& x, std::size_t frame_len, std::size_t hop) {
  const auto padded = reflect_pad(x, frame_len / 2);
  Grid out;
  for (std::size_t start = 0; start + frame_len <= padded.size(); start += hop) {
    out.emplace_back(padded.begin() + static_cast<long>(start),
                     padded.begin() + static_cast<long>(start + frame_len));
  }
  return out;
}

std::vector<double> power_spectrum(const std::vector<double>& frame) {
  const std::size_t n = frame.size();
  std::vector<double> cos_table(n), sin_table(n), w(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double angle = 2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(n);
    cos_table[i] = std::cos(angle);
    sin_table[i] = std::sin(angle);
    w[i] = frame[i] * (0.5 - 0.5 * std::cos(angle));
  }
  std::vector<double> out(n / 2 + 1);
  for (std::size_t k = 0; k <= n / 2; ++k) {
    double re = 0.0, im = 0.0;
    std::size_t idx = 0;
    for (std::size_t i = 0; i < n; ++i) {
      re += w[i] * cos_table[idx];
      im -= w[i] * sin_table[idx];
      idx += k;
      if (idx >= n) idx -= n;
    }
    out[k] = re * re + im * im;
  }
  return out;
}

Grid mel_weights(std::size_t n_mels, int sample_rate, std::size_t n_fft) {
  auto to_mel = [](double f) { return 2595.0 * std::log10(1.0 + f / 700.0); };
  auto to_hz = [](double m) { return 700.0 * (std::pow(10.0, m / 2595.0) - 1.0); };
  const double top = to_mel(sample_rate / 2.0);
  Grid w(n_mels, std::vector<double>(n_fft / 2 + 1, 0.0));
  for (std::size_t m = 0; m < n_mels; ++m) {
    const double lo = to_hz(top * static_cast<double>(m) / static_cast<double>(n_mels + 1));
    const double mid = to_hz(top * static_cast<double>(m + 1) / static_cast<double>(n_mels + 1));
    const double hi = to_hz(top * static_cast<double>(m + 2) / static_cast<double>(n_mels + 1));
    for (std::size_t k = 0; k < w[m].size(); ++k) {
      const double f = static_cast<double>(k) * sample_rate / static_cast<double>(n_fft);
      double tri = 0.0;
      if (f > lo && f <= mid) tri = (f - lo) / (mid - lo);
      else if (f > mid && f < hi) tri = (hi - f) / (hi - mid);
      w[m][k] = tri * 2.0 / (hi - lo);
    }
  }
  return w;
}

Grid deltas(const Grid& series, std::size_t width) {
  const long half = static_cast<long>(width / 2);
  const long n = static_cast<long>(series.size());
  double denom = 0.0;
  for (long k = 1; k <= half; ++k) denom += 2.0 * static_cast<double>(k * k);
  Grid out;
  for (long t = 0; t < n; ++t) {
    std::vector<double> d(series[0].size(), 0.0);
    for (std::size_t c = 0; c < d.size(); ++c) {
      double acc = 0.0;
      for (long k = 1; k <= half; ++k) {
        const long a = std::min(t + k, n - 1);
        const long b = std::max(t - k, 0L);
        acc += static_cast<double>(k) *
               (series[static_cast<std::size_t>(a)][c] - series[static_cast<std::size_t>(b)][c]);
      }
      d[c] = acc / denom;
    }
    out.push_back(d);
  }
  return out;
}

Descriptors analyze(const std::vector<double>& samples, const Settings& s) {
  Descriptors out;
  const auto fr = frames(samples, s.n_fft, s.hop);
  const auto weights = mel_weights(s.n_mels, s.sample_rate, s.n_fft);
  const double bin_hz = static_cast<double>(s.sample_rate) / static_cast<double>(s.n_fft);

  Grid log_mel;
  double peak = -1e300;
  for (const auto& f : fr) {
    int crossings = 0;
    double energy = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) {
      energy += f[i] * f[i];
      if (i > 0 && (f[i - 1] < 0.0) != (f[i] < 0.0)) ++crossings;
    }
    out.zcr.push_back(crossings / static_cast<double>(f.size() - 1));
    out.rms.push_back(std::sqrt(energy / static_cast<double>(f.size())));

    const auto p = power_spectrum(f);
    double num = 0.0, den = 0.0, total = 0.0;
    for (std::size_t k = 0; k < p.size(); ++k) {
      num += static_cast<double>(k) * bin_hz * std::sqrt(p[k]);
      den += std::sqrt(p[k]);
      total += p[k];
    }
    out.centroid.push_back(den > 0.0 ? num / den : 0.0);

    double roll = 0.0;
    if (total > 0.0) {
      double running = 0.0;
      std::size_t k = 0;
      for (; k < p.size(); ++k) {
        running += p[k];
        if (running >= s.rolloff_pct * total) break;
      }
      roll = static_cast<double>(std::min(k, p.size() - 1)) * bin_hz;
    }
    out.rolloff.push_back(roll);

    std::vector<double> row;
    for (const auto& wm : weights) {
      double e = 0.0;
      for (std::size_t k = 0; k < p.size(); ++k) e += wm[k] * p[k];
      row.push_back(10.0 * std::log10(std::max(e, 1e-10)));
      peak = std::max(peak, row.back());
    }
    log_mel.push_back(row);
  }
  for (auto& row : log_mel) {
    for (double& v : row) v = std::max(v, peak - 80.0);
  }

  for (const auto& row : log_mel) {
    std::vector<double> c(s.n_mfcc);
    const double m = static_cast<double>(row.size());
    for (std::size_t k = 0; k < s.n_mfcc; ++k) {
      double acc = 0.0;
      for (std::size_t j = 0; j < row.size(); ++j) {
        acc += row[j] * std::cos(std::numbers::pi * static_cast<double>(k) * (static_cast<double>(j) + 0.5) / m);
      }
      c[k] = acc * (k == 0 ? std::sqrt(1.0 / m) : std::sqrt(2.0 / m));
    }
    out.mfcc.push_back(c);
  }
  out.delta1 = deltas(out.mfcc, s.delta_width);
  out.delta2 = deltas(out.delta1, s.delta_width);
  return out;
}

}  // namespace refdsp
