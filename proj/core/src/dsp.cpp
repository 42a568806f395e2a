#include "vocalscreen/dsp.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <mutex>

#include "vocalscreen/error.hpp"

namespace vocalscreen {

namespace {

constexpr double kLogFloor = 1e-10;
constexpr double kTopDb = 80.0;
constexpr double kMinBpm = 30.0;
constexpr double kMaxBpm = 300.0;
constexpr double kPriorBpm = 120.0;
constexpr double kPriorOctaves = 1.0;

// FFTW's planner is not reentrant; execution on distinct buffers is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

struct FftwDeleter {
  void operator()(void* p) const { fftw_free(p); }
};

class RealFft {
 public:
  explicit RealFft(std::size_t n)
      : n_(n),
        in_(static_cast<double*>(fftw_malloc(sizeof(double) * n))),
        out_(static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * (n / 2 + 1)))) {
    std::lock_guard lock(planner_mutex());
    plan_ = fftw_plan_dft_r2c_1d(static_cast<int>(n), in_.get(), out_.get(), FFTW_ESTIMATE);
  }
  ~RealFft() {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(plan_);
  }
  RealFft(const RealFft&) = delete;
  RealFft& operator=(const RealFft&) = delete;

  double* input() { return in_.get(); }
  const fftw_complex* output() const { return out_.get(); }
  void execute() { fftw_execute(plan_); }
  std::size_t size() const { return n_; }

 private:
  std::size_t n_;
  std::unique_ptr<double, FftwDeleter> in_;
  std::unique_ptr<fftw_complex, FftwDeleter> out_;
  fftw_plan plan_;
};

}  // namespace

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }

double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

PowerSpectrogram power_spectrogram(const FrameMatrix& frames, std::size_t n_fft) {
  if (n_fft != frames.frame_len()) {
    throw Error(ErrorCode::kInvalidArgument, "n_fft must equal the frame length");
  }
  const std::size_t n_bins = n_fft / 2 + 1;
  std::vector<double> window(n_fft);
  for (std::size_t n = 0; n < n_fft; ++n) {
    window[n] = 0.5 - 0.5 * std::cos(2.0 * M_PI * static_cast<double>(n) / n_fft);
  }

  PowerSpectrogram spec;
  spec.bins = Matrix(frames.n_frames(), n_bins);
  spec.sample_rate = frames.sample_rate();
  spec.bin_hz = static_cast<double>(frames.sample_rate()) / n_fft;

  RealFft fft(n_fft);
  for (std::size_t t = 0; t < frames.n_frames(); ++t) {
    const auto frame = frames.frame(t);
    double* in = fft.input();
    for (std::size_t n = 0; n < n_fft; ++n) in[n] = frame[n] * window[n];
    fft.execute();
    auto row = spec.bins.row(t);
    for (std::size_t k = 0; k < n_bins; ++k) {
      const double re = fft.output()[k][0];
      const double im = fft.output()[k][1];
      row[k] = re * re + im * im;
    }
  }
  return spec;
}

MelFilterbank mel_filterbank_matrix(std::size_t n_mels, int sample_rate,
                                    std::size_t n_fft) {
  if (n_mels < 1) throw Error(ErrorCode::kInvalidArgument, "n_mels must be >= 1");
  if (sample_rate <= 0 || n_fft < 2) {
    throw Error(ErrorCode::kInvalidArgument, "bad sample rate or n_fft");
  }
  const std::size_t n_bins = n_fft / 2 + 1;
  const double mel_max = hz_to_mel(sample_rate / 2.0);
  std::vector<double> edges_hz(n_mels + 2);
  for (std::size_t i = 0; i < edges_hz.size(); ++i) {
    edges_hz[i] = mel_to_hz(mel_max * static_cast<double>(i) / (n_mels + 1));
  }

  MelFilterbank bank;
  bank.weights = Matrix(n_mels, n_bins);
  bank.support.assign(n_mels, {0, 0});
  for (std::size_t m = 0; m < n_mels; ++m) {
    const double lo = edges_hz[m];
    const double center = edges_hz[m + 1];
    const double hi = edges_hz[m + 2];
    const double norm = 2.0 / (hi - lo);
    std::size_t first = n_bins;
    std::size_t last = 0;
    for (std::size_t k = 0; k < n_bins; ++k) {
      const double f = static_cast<double>(k) * sample_rate / n_fft;
      const double rising = (f - lo) / (center - lo);
      const double falling = (hi - f) / (hi - center);
      const double w = std::max(0.0, std::min(rising, falling)) * norm;
      if (w > 0.0) {
        bank.weights(m, k) = w;
        first = std::min(first, k);
        last = k + 1;
      }
    }
    if (first == n_bins) {
      bank.empty_rows.push_back(m);
    } else {
      bank.support[m] = {first, last};
    }
  }
  if (bank.empty_rows.size() == n_mels) {
    throw Error(ErrorCode::kDegenerateFilterbank,
                std::to_string(n_mels) + " mel bands leave no band on the " +
                    std::to_string(n_bins) + "-bin grid");
  }
  return bank;
}

Matrix log_mel_spectrogram(const PowerSpectrogram& spec, const MelFilterbank& bank) {
  const std::size_t n_mels = bank.weights.rows();
  if (bank.weights.cols() != spec.n_bins()) {
    throw Error(ErrorCode::kDimensionMismatch, "filterbank and spectrogram bin counts differ");
  }
  Matrix out(spec.n_frames(), n_mels);
  double peak = -std::numeric_limits<double>::infinity();
  for (std::size_t t = 0; t < spec.n_frames(); ++t) {
    const auto power = spec.bins.row(t);
    for (std::size_t m = 0; m < n_mels; ++m) {
      const auto [first, last] = bank.support[m];
      double acc = 0.0;
      for (std::size_t k = first; k < last; ++k) acc += bank.weights(m, k) * power[k];
      const double db = 10.0 * std::log10(std::max(acc, kLogFloor));
      out(t, m) = db;
      peak = std::max(peak, db);
    }
  }
  const double floor_db = peak - kTopDb;
  for (double& v : out.data()) v = std::max(v, floor_db);
  return out;
}

Matrix cepstrum_from_log_mel(const Matrix& log_mel, std::size_t n_mfcc) {
  const std::size_t n_mels = log_mel.cols();
  if (n_mfcc < 1 || n_mfcc > n_mels) {
    throw Error(ErrorCode::kInvalidArgument, "n_mfcc must be in [1, n_mels]");
  }
  Matrix basis(n_mfcc, n_mels);
  for (std::size_t k = 0; k < n_mfcc; ++k) {
    const double scale = std::sqrt((k == 0 ? 1.0 : 2.0) / n_mels);
    for (std::size_t m = 0; m < n_mels; ++m) {
      basis(k, m) = scale * std::cos(M_PI * k * (2.0 * m + 1.0) / (2.0 * n_mels));
    }
  }
  Matrix out(log_mel.rows(), n_mfcc);
  for (std::size_t t = 0; t < log_mel.rows(); ++t) {
    const auto row = log_mel.row(t);
    for (std::size_t k = 0; k < n_mfcc; ++k) {
      double acc = 0.0;
      for (std::size_t m = 0; m < n_mels; ++m) acc += basis(k, m) * row[m];
      out(t, k) = acc;
    }
  }
  return out;
}

Matrix mfcc(const AudioClip& clip, std::size_t n_mfcc, const DspConfig& config) {
  const auto frames = frame_signal(clip, config.n_fft, config.hop);
  const auto spec = power_spectrogram(frames, config.n_fft);
  const auto bank = mel_filterbank_matrix(config.n_mels, clip.sample_rate(), config.n_fft);
  return cepstrum_from_log_mel(log_mel_spectrogram(spec, bank), n_mfcc);
}

Matrix delta(const Matrix& series, std::size_t width) {
  if (width < 3 || width % 2 == 0) {
    throw Error(ErrorCode::kInvalidArgument, "delta width must be odd and >= 3");
  }
  const auto half = static_cast<std::ptrdiff_t>((width - 1) / 2);
  const auto n = static_cast<std::ptrdiff_t>(series.rows());
  double denom = 0.0;
  for (std::ptrdiff_t k = 1; k <= half; ++k) denom += static_cast<double>(k * k);
  denom *= 2.0;

  Matrix out(series.rows(), series.cols());
  auto clamp_row = [n](std::ptrdiff_t t) { return static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(t, 0, n - 1)); };
  for (std::ptrdiff_t t = 0; t < n; ++t) {
    auto dst = out.row(static_cast<std::size_t>(t));
    for (std::ptrdiff_t k = 1; k <= half; ++k) {
      const auto ahead = series.row(clamp_row(t + k));
      const auto behind = series.row(clamp_row(t - k));
      for (std::size_t c = 0; c < series.cols(); ++c) {
        dst[c] += static_cast<double>(k) * (ahead[c] - behind[c]);
      }
    }
    for (double& v : dst) v /= denom;
  }
  return out;
}

TimeSeriesFeature zero_crossing_rate(const FrameMatrix& frames) {
  TimeSeriesFeature out{"zcr", std::vector<double>(frames.n_frames())};
  const double pairs = static_cast<double>(frames.frame_len() - 1);
  for (std::size_t t = 0; t < frames.n_frames(); ++t) {
    const auto x = frames.frame(t);
    std::size_t crossings = 0;
    for (std::size_t i = 0; i + 1 < x.size(); ++i) {
      crossings += (x[i] >= 0.0) != (x[i + 1] >= 0.0);
    }
    out.values[t] = static_cast<double>(crossings) / pairs;
  }
  return out;
}

TimeSeriesFeature spectral_centroid(const PowerSpectrogram& spec) {
  TimeSeriesFeature out{"centroid", std::vector<double>(spec.n_frames())};
  for (std::size_t t = 0; t < spec.n_frames(); ++t) {
    const auto power = spec.bins.row(t);
    double weighted = 0.0;
    double total = 0.0;
    for (std::size_t k = 0; k < power.size(); ++k) {
      const double magnitude = std::sqrt(power[k]);
      weighted += static_cast<double>(k) * spec.bin_hz * magnitude;
      total += magnitude;
    }
    out.values[t] = total > 0.0 ? weighted / total : 0.0;
  }
  return out;
}

TimeSeriesFeature spectral_rolloff(const PowerSpectrogram& spec, double pct) {
  if (!(pct > 0.0 && pct <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "rolloff fraction must be in (0, 1]");
  }
  TimeSeriesFeature out{"rolloff", std::vector<double>(spec.n_frames())};
  std::vector<double> cumulative(spec.n_bins());
  for (std::size_t t = 0; t < spec.n_frames(); ++t) {
    const auto power = spec.bins.row(t);
    double running = 0.0;
    for (std::size_t k = 0; k < power.size(); ++k) {
      running += power[k];
      cumulative[k] = running;
    }
    const double total = running;
    if (total <= 0.0) {
      out.values[t] = 0.0;
      continue;
    }
    const double target = pct * total;
    const auto hit = std::lower_bound(cumulative.begin(), cumulative.end(), target);
    const auto k = static_cast<std::size_t>(std::distance(cumulative.begin(), hit));
    out.values[t] = static_cast<double>(std::min(k, power.size() - 1)) * spec.bin_hz;
  }
  return out;
}

TimeSeriesFeature rms_energy(const FrameMatrix& frames) {
  TimeSeriesFeature out{"rms", std::vector<double>(frames.n_frames())};
  for (std::size_t t = 0; t < frames.n_frames(); ++t) {
    double acc = 0.0;
    for (double s : frames.frame(t)) acc += s * s;
    out.values[t] = std::sqrt(acc / static_cast<double>(frames.frame_len()));
  }
  return out;
}

double tempo_from_log_mel(const Matrix& log_mel, int sample_rate, std::size_t hop) {
  const std::size_t n = log_mel.rows();
  std::vector<double> onset(n, 0.0);
  for (std::size_t t = 1; t < n; ++t) {
    const auto now = log_mel.row(t);
    const auto before = log_mel.row(t - 1);
    double acc = 0.0;
    for (std::size_t m = 0; m < now.size(); ++m) acc += std::max(0.0, now[m] - before[m]);
    onset[t] = acc;
  }

  const double frames_per_minute = 60.0 * sample_rate / static_cast<double>(hop);
  auto bpm_of_lag = [&](double lag) { return frames_per_minute / lag; };
  const auto min_lag = static_cast<std::size_t>(std::max(1.0, std::ceil(frames_per_minute / kMaxBpm)));
  const auto max_lag = std::min<std::size_t>(
      n == 0 ? 0 : n - 1, static_cast<std::size_t>(std::floor(frames_per_minute / kMinBpm)));
  if (min_lag > max_lag) return kPriorBpm;

  std::vector<double> score(max_lag + 2, 0.0);
  auto score_at = [&](std::size_t lag) {
    double ac = 0.0;
    for (std::size_t t = 0; t + lag < n; ++t) ac += onset[t] * onset[t + lag];
    const double octaves = std::log2(bpm_of_lag(static_cast<double>(lag)) / kPriorBpm);
    return ac * std::exp(-0.5 * octaves * octaves / (kPriorOctaves * kPriorOctaves));
  };
  std::size_t best = 0;
  double best_score = 0.0;
  for (std::size_t lag = min_lag; lag <= max_lag; ++lag) {
    score[lag] = score_at(lag);
    if (score[lag] > best_score) {
      best_score = score[lag];
      best = lag;
    }
  }
  if (best == 0) return kPriorBpm;

  // Parabolic refinement of the peak lag between its neighbours.
  double lag = static_cast<double>(best);
  if (best > min_lag && best < max_lag) {
    const double left = score[best - 1];
    const double right = score[best + 1];
    const double curvature = left - 2.0 * best_score + right;
    if (curvature < 0.0) lag += 0.5 * (left - right) / curvature;
  }
  return std::clamp(bpm_of_lag(lag), kMinBpm, kMaxBpm);
}

double tempo_estimate(const AudioClip& clip, const DspConfig& config) {
  if (clip.duration_seconds() < 1.0) {
    throw Error(ErrorCode::kClipTooShort, "tempo needs at least 1 s of audio");
  }
  const auto frames = frame_signal(clip, config.n_fft, config.hop);
  const auto spec = power_spectrogram(frames, config.n_fft);
  const auto bank = mel_filterbank_matrix(config.n_mels, clip.sample_rate(), config.n_fft);
  return tempo_from_log_mel(log_mel_spectrogram(spec, bank), clip.sample_rate(), config.hop);
}

FramewiseDescriptors analyze_clip(const AudioClip& clip, const DspConfig& config) {
  const auto frames = frame_signal(clip, config.n_fft, config.hop);
  const auto spec = power_spectrogram(frames, config.n_fft);
  const auto bank = mel_filterbank_matrix(config.n_mels, clip.sample_rate(), config.n_fft);
  const auto log_mel = log_mel_spectrogram(spec, bank);

  FramewiseDescriptors out;
  out.zcr = zero_crossing_rate(frames);
  out.centroid = spectral_centroid(spec);
  out.rolloff = spectral_rolloff(spec, config.rolloff_pct);
  out.rms = rms_energy(frames);
  out.mfcc = cepstrum_from_log_mel(log_mel, config.n_mfcc);
  out.mfcc_delta = delta(out.mfcc, config.delta_width);
  out.mfcc_delta2 = delta(out.mfcc_delta, config.delta_width);
  // Clips shorter than a second still get a feature vector; the tempo
  // estimator falls back to its prior centre for them.
  out.tempo_bpm = clip.duration_seconds() >= 1.0
                      ? tempo_from_log_mel(log_mel, clip.sample_rate(), config.hop)
                      : kPriorBpm;
  return out;
}

}  // namespace vocalscreen
