#ifndef VOCALSCREEN_DSP_HPP_
#define VOCALSCREEN_DSP_HPP_

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "vocalscreen/audio_io.hpp"
#include "vocalscreen/matrix.hpp"

namespace vocalscreen {

struct DspConfig {
  int sample_rate = 8000;
  std::size_t n_fft = 2048;
  std::size_t hop = 512;
  std::size_t n_mels = 128;
  std::size_t n_mfcc = 20;
  std::size_t delta_width = 9;
  double rolloff_pct = 0.85;
};

// n_frames x (n_fft/2 + 1) power values.
struct PowerSpectrogram {
  Matrix bins;
  double bin_hz = 0.0;
  int sample_rate = 0;

  std::size_t n_frames() const { return bins.rows(); }
  std::size_t n_bins() const { return bins.cols(); }
};

struct MelFilterbank {
  Matrix weights;  // n_mels x (n_fft/2 + 1)
  // Half-open column range [first, last) of non-zero weights per row.
  std::vector<std::pair<std::size_t, std::size_t>> support;
  // Rows whose triangle falls between two bins; they stay all-zero.
  std::vector<std::size_t> empty_rows;
};

struct TimeSeriesFeature {
  std::string name;
  std::vector<double> values;
};

double hz_to_mel(double hz);
double mel_to_hz(double mel);

// Periodic Hann window, real FFT, |X[k]|^2 per frame. n_fft must equal the
// frame length.
PowerSpectrogram power_spectrogram(const FrameMatrix& frames, std::size_t n_fft);

// Triangular filters on n_mels + 2 mel-spaced edges over [0, sr/2], each
// scaled by 2 / (f_hi - f_lo). Throws DEGENERATE_FILTERBANK when every row is
// empty.
MelFilterbank mel_filterbank_matrix(std::size_t n_mels, int sample_rate,
                                    std::size_t n_fft);

// 10*log10(max(mel power, 1e-10)), clamped to at most 80 dB below the
// recording maximum. n_frames x n_mels.
Matrix log_mel_spectrogram(const PowerSpectrogram& spec, const MelFilterbank& bank);

// Orthonormal DCT-II along the mel axis, first n_mfcc coefficients.
Matrix cepstrum_from_log_mel(const Matrix& log_mel, std::size_t n_mfcc);

Matrix mfcc(const AudioClip& clip, std::size_t n_mfcc = 20,
            const DspConfig& config = {});

// Regression-slope derivative along rows (time), replicate-padded edges.
// width must be odd and >= 3.
Matrix delta(const Matrix& series, std::size_t width = 9);

TimeSeriesFeature zero_crossing_rate(const FrameMatrix& frames);
TimeSeriesFeature spectral_centroid(const PowerSpectrogram& spec);
TimeSeriesFeature spectral_rolloff(const PowerSpectrogram& spec, double pct = 0.85);
TimeSeriesFeature rms_energy(const FrameMatrix& frames);

// Autocorrelation tempo on the log-mel onset envelope with a log-normal
// prior around 120 BPM. Result is always within [30, 300].
double tempo_from_log_mel(const Matrix& log_mel, int sample_rate, std::size_t hop);
double tempo_estimate(const AudioClip& clip, const DspConfig& config = {});

// Every framewise descriptor the feature builder consumes, computed from a
// single framing and spectrogram pass.
struct FramewiseDescriptors {
  TimeSeriesFeature zcr;
  TimeSeriesFeature centroid;
  TimeSeriesFeature rolloff;
  TimeSeriesFeature rms;
  Matrix mfcc;
  Matrix mfcc_delta;
  Matrix mfcc_delta2;
  double tempo_bpm = 0.0;
};

// Uses the clip's own sample rate; config.sample_rate is applied by callers
// that resample first.
FramewiseDescriptors analyze_clip(const AudioClip& clip, const DspConfig& config = {});

}  // namespace vocalscreen

#endif  // VOCALSCREEN_DSP_HPP_
