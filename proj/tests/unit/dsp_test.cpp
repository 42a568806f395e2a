#include <cmath>
#include <numbers>

#include "check_error.hpp"
#include "doctest.h"
#include "reference_dsp.hpp"
#include "test_util.hpp"
#include "vocalscreen/dsp.hpp"

using namespace vocalscreen;

namespace {

double rel_err(double got, double want, double floor) {
  return std::abs(got - want) / std::max(std::abs(want), floor);
}

AudioClip tone(double hz, std::size_t n, int rate = 8000, double amp = 0.5) {
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = amp * std::sin(2.0 * std::numbers::pi * hz * i / rate);
  return AudioClip(std::move(x), rate);
}

AudioClip clicks(double bpm, double seconds, int rate = 8000) {
  std::vector<double> x(static_cast<std::size_t>(seconds * rate), 0.0);
  const double period = 60.0 / bpm * rate;
  for (double t = 0.0; t < x.size(); t += period) {
    const auto i = static_cast<std::size_t>(t);
    for (std::size_t j = 0; j < 80 && i + j < x.size(); ++j) x[i + j] = 0.8 * std::exp(-0.05 * j) * ((j % 2) ? 1 : -1);
  }
  return AudioClip(std::move(x), rate);
}

}  // namespace

TEST_CASE("mel scale conversions") {
  CHECK(hz_to_mel(0.0) == 0.0);
  CHECK(hz_to_mel(700.0) == doctest::Approx(2595.0 * std::log10(2.0)));
  for (double f : {10.0, 440.0, 3999.0}) CHECK(mel_to_hz(hz_to_mel(f)) == doctest::Approx(f).epsilon(1e-12));
}

TEST_CASE("mel filterbank: weights match the oracle and integrate to ~1 Hz^-1") {
  const auto bank = mel_filterbank_matrix(128, 8000, 2048);
  const auto ref = refdsp::mel_weights(128, 8000, 2048);
  REQUIRE(bank.weights.rows() == 128);
  for (std::size_t m = 0; m < 128; ++m) {
    for (std::size_t k = 0; k < 1025; ++k) CHECK(bank.weights(m, k) == doctest::Approx(ref[m][k]).epsilon(1e-12));
  }
  // Wide upper filters cover many bins, so the Riemann sum approaches the
  // triangle's unit area.
  double area = 0.0;
  for (std::size_t k = 0; k < 1025; ++k) area += bank.weights(120, k) * (8000.0 / 2048.0);
  CHECK(area == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("filterbank with no populated band is rejected") {
  CHECK_ERROR_CODE(mel_filterbank_matrix(4, 8000, 2), ErrorCode::kDegenerateFilterbank);
  const auto sparse = mel_filterbank_matrix(128, 8000, 256);
  CHECK_FALSE(sparse.empty_rows.empty());
}

TEST_CASE("descriptors match the naive reference on random clips") {
  Rng rng(11);
  for (int trial = 0; trial < 4; ++trial) {
    const auto x = testutil::random_clip(rng, 3000 + rng.below(6000));
    const auto d = analyze_clip(AudioClip(x, 8000));
    const auto r = refdsp::analyze(x);
    REQUIRE(d.zcr.values.size() == r.zcr.size());
    for (std::size_t t = 0; t < r.zcr.size(); ++t) {
      CHECK(d.zcr.values[t] == r.zcr[t]);
      CHECK(rel_err(d.rms.values[t], r.rms[t], 1e-12) < 1e-9);
      CHECK(rel_err(d.centroid.values[t], r.centroid[t], 1e-9) < 1e-9);
      CHECK(d.rolloff.values[t] == r.rolloff[t]);
      for (std::size_t c = 0; c < 20; ++c) {
        CHECK(rel_err(d.mfcc(t, c), r.mfcc[t][c], 1e-3) < 1e-6);
        CHECK(rel_err(d.mfcc_delta(t, c), r.delta1[t][c], 1e-3) < 1e-6);
        CHECK(rel_err(d.mfcc_delta2(t, c), r.delta2[t][c], 1e-3) < 1e-6);
      }
    }
  }
}

TEST_CASE("power spectrogram of a bin-centred tone peaks at that bin") {
  const double bin_hz = 8000.0 / 2048.0;
  const auto clip = tone(100 * bin_hz, 8000);
  const auto spec = power_spectrogram(frame_signal(clip, 2048, 512), 2048);
  const auto row = spec.bins.row(3);
  CHECK(std::max_element(row.begin(), row.end()) - row.begin() == 100);
  CHECK_ERROR_CODE(power_spectrogram(frame_signal(clip, 1024, 512), 2048), ErrorCode::kInvalidArgument);
}

TEST_CASE("zero crossing rate extremes") {
  std::vector<double> alt(4096);
  for (std::size_t i = 0; i < alt.size(); ++i) alt[i] = (i % 2) ? 0.5 : -0.5;
  const auto z = zero_crossing_rate(frame_signal(AudioClip(alt, 8000), 2048, 512));
  for (double v : z.values) CHECK(v == 1.0);
  const auto flat = zero_crossing_rate(frame_signal(AudioClip(std::vector<double>(4096, 0.3), 8000), 2048, 512));
  for (double v : flat.values) CHECK(v == 0.0);
}

TEST_CASE("centroid and rolloff of a pure tone sit at the tone") {
  const double bin_hz = 8000.0 / 2048.0;
  const auto clip = tone(256 * bin_hz, 8192);
  const auto spec = power_spectrogram(frame_signal(clip, 2048, 512), 2048);
  const auto c = spectral_centroid(spec);
  const auto r = spectral_rolloff(spec, 0.85);
  // Interior frames: Hann leakage is symmetric around the tone.
  CHECK(c.values[8] == doctest::Approx(256 * bin_hz).epsilon(1e-6));
  CHECK(r.values[8] == doctest::Approx(256 * bin_hz).epsilon(0.01));
  CHECK_ERROR_CODE(spectral_rolloff(spec, 0.0), ErrorCode::kInvalidArgument);
}

TEST_CASE("silent frames give zero centroid and rolloff and finite MFCCs") {
  const AudioClip silence(std::vector<double>(8000, 0.0), 8000);
  const auto d = analyze_clip(silence);
  for (double v : d.centroid.values) CHECK(v == 0.0);
  for (double v : d.rolloff.values) CHECK(v == 0.0);
  for (double v : d.mfcc.data()) CHECK(std::isfinite(v));
}

TEST_CASE("rms of a constant signal") {
  const auto r = rms_energy(frame_signal(AudioClip(std::vector<double>(4096, -0.5), 8000), 2048, 512));
  for (double v : r.values) CHECK(v == doctest::Approx(0.5));
}

TEST_CASE("delta of a linear ramp is its slope away from the edges") {
  Matrix ramp(30, 2);
  for (std::size_t t = 0; t < 30; ++t) {
    ramp(t, 0) = 3.0 * t;
    ramp(t, 1) = -0.5 * t + 7.0;
  }
  const auto d = delta(ramp, 9);
  for (std::size_t t = 4; t < 26; ++t) {
    CHECK(d(t, 0) == doctest::Approx(3.0));
    CHECK(d(t, 1) == doctest::Approx(-0.5));
  }
  CHECK(d(0, 0) < 3.0);  // replicate padding flattens the edges
  CHECK_ERROR_CODE(delta(ramp, 4), ErrorCode::kInvalidArgument);
}

TEST_CASE("tempo of click tracks") {
  CHECK(tempo_estimate(clicks(120.0, 10.0)) == doctest::Approx(120.0).epsilon(0.03));
  CHECK(tempo_estimate(clicks(100.0, 10.0)) == doctest::Approx(100.0).epsilon(0.05));
  CHECK_ERROR_CODE(tempo_estimate(AudioClip(std::vector<double>(7999, 0.1), 8000)), ErrorCode::kClipTooShort);
  // Short clips still analyse, with the prior-centre tempo.
  CHECK(analyze_clip(AudioClip(std::vector<double>(4000, 0.1), 8000)).tempo_bpm == 120.0);
}

TEST_CASE("mfcc entry point agrees with analyze_clip") {
  Rng rng(3);
  const AudioClip clip(testutil::random_clip(rng, 6000), 8000);
  const auto a = mfcc(clip, 20);
  const auto b = analyze_clip(clip).mfcc;
  CHECK(a == b);
}

TEST_CASE("tempo: slow clicks stay slow and noise stays in range") {
  CHECK(tempo_estimate(clicks(60.0, 12.0)) == doctest::Approx(60.0).epsilon(5.0 / 60.0));
  Rng rng(8);
  std::vector<double> noise(24000);
  for (double& v : noise) v = 0.2 * rng.normal();
  const double bpm = tempo_estimate(AudioClip(noise, 8000));
  CHECK(bpm >= 30.0);
  CHECK(bpm <= 300.0);
  CHECK(tempo_estimate(AudioClip(noise, 8000)) == bpm);
}

TEST_CASE("amplitude scaling leaves shape descriptors alone and scales rms") {
  Rng rng(12);
  const auto x = testutil::random_clip(rng, 12000);
  std::vector<double> half = x;
  for (double& v : half) v *= 0.5;
  const auto a = analyze_clip(AudioClip(x, 8000));
  const auto b = analyze_clip(AudioClip(half, 8000));
  CHECK(a.zcr.values == b.zcr.values);
  CHECK(a.tempo_bpm == doctest::Approx(b.tempo_bpm).epsilon(1e-9));
  for (std::size_t t = 0; t < a.rms.values.size(); ++t) {
    CHECK(b.rms.values[t] == doctest::Approx(0.5 * a.rms.values[t]));
    CHECK(b.centroid.values[t] == doctest::Approx(a.centroid.values[t]));
    CHECK(b.rolloff.values[t] == doctest::Approx(a.rolloff.values[t]));
  }
}

TEST_CASE("rolloff of a flat spectrum and rms of a sine") {
  PowerSpectrogram flat;
  flat.bins = Matrix(1, 1025, 1.0);
  flat.bin_hz = 8000.0 / 2048.0;
  flat.sample_rate = 8000;
  const double want = (std::ceil(0.85 * 1025) - 1) * flat.bin_hz;
  CHECK(std::abs(spectral_rolloff(flat, 0.85).values[0] - want) <= flat.bin_hz);
  CHECK(spectral_rolloff(flat, 1.0).values[0] == doctest::Approx(1024 * flat.bin_hz));

  const auto sine = tone(250.0, 8192, 8000, 1.0);  // 64 whole periods per frame
  const auto r = rms_energy(frame_signal(sine, 2048, 512));
  CHECK(r.values[6] == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-3));
}
