#include "vocalscreen/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>

#include "json.hpp"

#include "text_io.hpp"
#include "vocalscreen/error.hpp"
#include "vocalscreen/parallel.hpp"
#include "vocalscreen/random.hpp"

namespace vocalscreen {

using nlohmann::ordered_json;

SynthSpec SynthSpec::strong_voicing_contrast() {
  SynthSpec s;
  s.negative.jitter = 0.002;
  s.negative.hnr_db = 30.0;
  s.positive.jitter = 0.02;
  s.positive.hnr_db = 12.0;
  return s;
}

SynthSpec SynthSpec::null_contrast() {
  SynthSpec s;
  s.positive = s.negative;
  return s;
}

void SynthSpec::validate() const {
  auto fail = [](const std::string& msg) { throw Error(ErrorCode::kInvalidArgument, msg); };
  if (n_positive < 1 || n_negative < 1) fail("synth needs at least one subject per class");
  if (!(duration_s >= 1.0) || duration_s > 600.0) fail("synth duration must be in [1, 600] s");
  if (sample_rate < 4000 || sample_rate > 192000) fail("synth sample_rate out of range");
  if (!(f0_mean_hz > 40.0) || !std::isfinite(f0_sd_hz) || f0_sd_hz < 0.0) fail("bad f0 settings");
  for (const VoiceParams* v : {&negative, &positive}) {
    if (!std::isfinite(v->f0_shift_hz) || !std::isfinite(v->formant_shift_hz) ||
        !std::isfinite(v->hnr_db)) {
      fail("voice shifts must be finite");
    }
    if (!(v->jitter >= 0.0 && v->jitter < 0.5) || !(v->shimmer >= 0.0 && v->shimmer < 1.0)) {
      fail("jitter must be in [0, 0.5) and shimmer in [0, 1)");
    }
  }
  auto rate_ok = [](double p) { return p >= 0.0 && p <= 1.0; };
  for (const auto& [token, rates] : symptom_rates) {
    if (!rate_ok(rates.first) || !rate_ok(rates.second)) fail("symptom rate for " + token + " not in [0, 1]");
  }
  if (!rate_ok(asthma_rate) || !rate_ok(smoker_rate) || !rate_ok(missing_rate)) {
    fail("metadata rates must be in [0, 1]");
  }
}

namespace {

ordered_json voice_to_json(const VoiceParams& v) {
  return {{"f0_shift_hz", v.f0_shift_hz},
          {"jitter", v.jitter},
          {"shimmer", v.shimmer},
          {"hnr_db", v.hnr_db},
          {"formant_shift_hz", v.formant_shift_hz}};
}

void voice_from_json(const ordered_json& j, VoiceParams& v) {
  for (const auto& [key, value] : j.items()) {
    if (key == "f0_shift_hz") v.f0_shift_hz = value.get<double>();
    else if (key == "jitter") v.jitter = value.get<double>();
    else if (key == "shimmer") v.shimmer = value.get<double>();
    else if (key == "hnr_db") v.hnr_db = value.get<double>();
    else if (key == "formant_shift_hz") v.formant_shift_hz = value.get<double>();
    else throw Error(ErrorCode::kParseError, "unknown voice key '" + key + "'");
  }
}

}  // namespace

SynthSpec parse_synth_spec(std::string_view json_text) {
  SynthSpec s;
  try {
    const auto doc = ordered_json::parse(json_text);
    if (!doc.is_object()) throw Error(ErrorCode::kParseError, "synth spec must be a JSON object");
    for (const auto& [key, value] : doc.items()) {
      if (key == "n_positive") s.n_positive = value.get<std::size_t>();
      else if (key == "n_negative") s.n_negative = value.get<std::size_t>();
      else if (key == "n_per_class") s.n_positive = s.n_negative = value.get<std::size_t>();
      else if (key == "seed") s.seed = value.get<std::uint64_t>();
      else if (key == "duration_s") s.duration_s = value.get<double>();
      else if (key == "sample_rate") s.sample_rate = value.get<int>();
      else if (key == "f0_mean_hz") s.f0_mean_hz = value.get<double>();
      else if (key == "f0_sd_hz") s.f0_sd_hz = value.get<double>();
      else if (key == "negative") voice_from_json(value, s.negative);
      else if (key == "positive") voice_from_json(value, s.positive);
      else if (key == "contrast_types") {
        s.contrast_types.clear();
        for (const auto& t : value) {
          const auto type = parse_audio_type(t.get<std::string>());
          if (!type) throw Error(ErrorCode::kParseError, "unknown audio type " + t.dump());
          s.contrast_types.insert(*type);
        }
      } else if (key == "symptom_rates") {
        s.symptom_rates.clear();
        for (const auto& [token, rates] : value.items()) {
          if (!rates.is_array() || rates.size() != 2) {
            throw Error(ErrorCode::kParseError, "symptom rate for " + token + " must be [neg, pos]");
          }
          s.symptom_rates[detail::to_lower(token)] = {rates[0].get<double>(), rates[1].get<double>()};
        }
      } else if (key == "asthma_rate") s.asthma_rate = value.get<double>();
      else if (key == "smoker_rate") s.smoker_rate = value.get<double>();
      else if (key == "missing_rate") s.missing_rate = value.get<double>();
      else throw Error(ErrorCode::kParseError, "unknown synth spec key '" + key + "'");
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParseError, std::string("synth spec JSON: ") + e.what());
  }
  s.validate();
  return s;
}

SynthSpec load_synth_spec(const std::filesystem::path& path) {
  std::string text;
  for (const auto& line : detail::read_lines(path)) text += line + "\n";
  return parse_synth_spec(text);
}

std::string synth_spec_to_json(const SynthSpec& s) {
  ordered_json types = ordered_json::array();
  for (AudioType t : s.contrast_types) types.push_back(audio_type_name(t));
  ordered_json rates = ordered_json::object();
  for (const auto& [token, r] : s.symptom_rates) rates[token] = {r.first, r.second};
  const ordered_json doc = {{"n_positive", s.n_positive},
                            {"n_negative", s.n_negative},
                            {"seed", s.seed},
                            {"duration_s", s.duration_s},
                            {"sample_rate", s.sample_rate},
                            {"f0_mean_hz", s.f0_mean_hz},
                            {"f0_sd_hz", s.f0_sd_hz},
                            {"negative", voice_to_json(s.negative)},
                            {"positive", voice_to_json(s.positive)},
                            {"contrast_types", std::move(types)},
                            {"symptom_rates", std::move(rates)},
                            {"asthma_rate", s.asthma_rate},
                            {"smoker_rate", s.smoker_rate},
                            {"missing_rate", s.missing_rate}};
  return doc.dump(2) + "\n";
}

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kVoicedRms = 0.1;

struct Formants {
  double f1, f2;
};

// Per-vowel formant targets (Hz).
constexpr Formants kVowels[] = {{700.0, 1200.0}, {300.0, 2300.0}, {320.0, 900.0}};

std::uint64_t type_index(AudioType type) {
  for (std::uint64_t i = 0; i < std::size(kAllAudioTypes); ++i) {
    if (kAllAudioTypes[i] == type) return i;
  }
  return 0;
}

// Traits of a speaker that do not depend on the recording.
struct Speaker {
  double f0;
  double formant_scale;
};

Speaker speaker_traits(const SynthSpec& spec, std::size_t subject) {
  Rng rng(derive_seed(spec.seed, {subject, 100}));
  const double f0 = std::clamp(spec.f0_mean_hz + spec.f0_sd_hz * rng.normal(), 60.0, 400.0);
  const double scale = std::clamp(1.0 + 0.03 * rng.normal(), 0.9, 1.1);
  return {f0, scale};
}

// Two-pole resonator applied in place, unity gain at the centre frequency
// (approximately).
void resonate(std::vector<double>& x, double centre_hz, double bandwidth_hz, double fs) {
  const double nyquist = fs / 2.0;
  centre_hz = std::clamp(centre_hz, 50.0, nyquist - 50.0);
  const double r = std::exp(-std::numbers::pi * bandwidth_hz / fs);
  const double a1 = -2.0 * r * std::cos(kTwoPi * centre_hz / fs);
  const double a2 = r * r;
  const double gain = 1.0 - r;
  double y1 = 0.0, y2 = 0.0;
  for (double& v : x) {
    const double y = gain * v - a1 * y1 - a2 * y2;
    y2 = y1;
    y1 = y;
    v = y;
  }
}

void scale_to_rms(std::vector<double>& x, double target) {
  double ss = 0.0;
  for (double v : x) ss += v * v;
  const double rms = std::sqrt(ss / static_cast<double>(std::max<std::size_t>(x.size(), 1)));
  if (rms > 0.0) {
    for (double& v : x) v *= target / rms;
  }
}

void fade(std::vector<double>& x, std::size_t ramp) {
  ramp = std::min(ramp, x.size() / 2);
  for (std::size_t i = 0; i < ramp; ++i) {
    const double w = 0.5 - 0.5 * std::cos(std::numbers::pi * static_cast<double>(i) / static_cast<double>(ramp));
    x[i] *= w;
    x[x.size() - 1 - i] *= w;
  }
}

// Sustained vowel: jittered, shimmered pulse train through a glottal tilt
// and two formant resonators, plus white noise at the requested HNR.
std::vector<double> vowel(Rng& rng, double fs, std::size_t n, double f0, Formants f,
                          const VoiceParams& v) {
  std::vector<double> src(n, 0.0);
  const double period = fs / f0;
  double t = rng.uniform() * period;
  while (t < static_cast<double>(n)) {
    const double amp = std::max(0.1, 1.0 + v.shimmer * rng.normal());
    const auto i = static_cast<std::size_t>(t);
    const double frac = t - static_cast<double>(i);
    src[i] += amp * (1.0 - frac);
    if (i + 1 < n) src[i + 1] += amp * frac;
    t += std::max(2.0, period * (1.0 + v.jitter * rng.normal()));
  }
  double tilt = 0.0;
  for (double& s : src) s = tilt = s + 0.9 * tilt;
  resonate(src, f.f1 + v.formant_shift_hz, 90.0, fs);
  resonate(src, f.f2 + v.formant_shift_hz, 110.0, fs);
  scale_to_rms(src, kVoicedRms);
  const double noise_sd = kVoicedRms / std::pow(10.0, v.hnr_db / 20.0);
  for (double& s : src) s += noise_sd * rng.normal();
  fade(src, static_cast<std::size_t>(0.02 * fs));
  return src;
}

std::vector<double> vowel_sequence(Rng& rng, double fs, std::size_t n, double f0, double scale,
                                   const VoiceParams& v) {
  std::vector<double> out;
  out.reserve(n);
  while (out.size() < n) {
    const auto& base = kVowels[rng.below(std::size(kVowels))];
    const auto len = static_cast<std::size_t>(rng.uniform(0.15, 0.3) * fs);
    const auto seg = vowel(rng, fs, len, f0, {base.f1 * scale, base.f2 * scale}, v);
    out.insert(out.end(), seg.begin(), seg.end());
    out.resize(out.size() + static_cast<std::size_t>(0.04 * fs), 0.0);
  }
  out.resize(n);
  return out;
}

std::vector<double> cough(Rng& rng, double fs, std::size_t n, double f0, double scale,
                          const VoiceParams& v) {
  std::vector<double> out;
  out.reserve(n);
  const std::size_t bursts = 2 + rng.below(2);
  for (std::size_t b = 0; b < bursts && out.size() < n; ++b) {
    const auto len = static_cast<std::size_t>(rng.uniform(0.2, 0.35) * fs);
    std::vector<double> burst(len);
    for (double& s : burst) s = rng.normal();
    resonate(burst, 1200.0 * scale, 800.0, fs);
    scale_to_rms(burst, kVoicedRms);
    for (std::size_t i = 0; i < len; ++i) burst[i] *= std::exp(-static_cast<double>(i) / (0.07 * fs));
    const auto voiced_len = std::min(len, static_cast<std::size_t>(0.06 * fs));
    const auto voiced = vowel(rng, fs, voiced_len, f0, {kVowels[0].f1 * scale, kVowels[0].f2 * scale}, v);
    for (std::size_t i = 0; i < voiced_len; ++i) burst[i] += 0.5 * voiced[i];
    out.insert(out.end(), burst.begin(), burst.end());
    out.resize(out.size() + static_cast<std::size_t>(rng.uniform(0.1, 0.2) * fs), 0.0);
  }
  out.resize(n, 0.0);
  return out;
}

}  // namespace

std::vector<double> synthesize_recording(const SynthSpec& spec, std::size_t subject, bool positive,
                                         AudioType type) {
  const Speaker speaker = speaker_traits(spec, subject);
  const VoiceParams& v =
      positive && spec.contrast_types.contains(type) ? spec.positive : spec.negative;
  const double f0 = std::max(40.0, speaker.f0 + v.f0_shift_hz);
  const double fs = spec.sample_rate;
  const auto n = static_cast<std::size_t>(std::llround(spec.duration_s * fs));
  Rng rng(derive_seed(spec.seed, {subject, type_index(type)}));

  std::vector<double> x;
  switch (type) {
    case AudioType::kVowelAh:
    case AudioType::kVowelIy:
    case AudioType::kVowelUw: {
      const auto& base = kVowels[type_index(type)];
      x = vowel(rng, fs, n, f0, {base.f1 * speaker.formant_scale, base.f2 * speaker.formant_scale}, v);
      break;
    }
    case AudioType::kAlphabet:
    case AudioType::kCount:
      x = vowel_sequence(rng, fs, n, f0, speaker.formant_scale, v);
      break;
    case AudioType::kCough:
      x = cough(rng, fs, n, f0, speaker.formant_scale, v);
      break;
  }
  double peak = 0.0;
  for (double s : x) peak = std::max(peak, std::abs(s));
  if (peak > 0.95) {
    for (double& s : x) s *= 0.95 / peak;
  }
  return x;
}

namespace {

SubjectRecord sample_metadata(const SynthSpec& spec, std::size_t subject, bool positive) {
  Rng rng(derive_seed(spec.seed, {subject, 200}));
  SubjectRecord r;
  r.label = positive ? Label::kPositive : Label::kNegative;

  const double age = std::round(rng.uniform(18.0, 75.0));
  if (!rng.bernoulli(spec.missing_rate)) r.age = age;
  const double g = rng.uniform();
  r.gender = g < spec.missing_rate ? Gender::kMissing : (g < 0.5 + spec.missing_rate / 2 ? Gender::kMale : Gender::kFemale);
  for (const auto& [token, rates] : spec.symptom_rates) {
    if (rng.bernoulli(positive ? rates.second : rates.first)) r.symptoms.insert(token);
  }
  const bool asthma = rng.bernoulli(spec.asthma_rate);
  if (!rng.bernoulli(spec.missing_rate)) r.asthma = asthma;
  const bool smoker = rng.bernoulli(spec.smoker_rate);
  if (!rng.bernoulli(spec.missing_rate)) r.smoker = smoker;
  const auto offset = static_cast<int>(rng.below(22));
  if (!rng.bernoulli(spec.missing_rate)) r.diagnosis_offset_days = offset;
  return r;
}

std::string type_token(AudioType type) { return detail::to_lower(audio_type_name(type)); }

}  // namespace

CohortManifest generate_cohort(const SynthSpec& spec, const std::filesystem::path& out_dir,
                               std::size_t jobs) {
  spec.validate();
  const auto wav_dir = out_dir / "wav";
  std::error_code ec;
  std::filesystem::create_directories(wav_dir, ec);
  if (ec) throw Error(ErrorCode::kIoWriteFailure, "cannot create " + wav_dir.string() + ": " + ec.message());

  const std::size_t n = spec.n_positive + spec.n_negative;
  CohortManifest manifest;
  manifest.provenance = "synth seed=" + std::to_string(spec.seed);
  for (std::size_t s = 0; s < n; ++s) {
    const bool positive = s < spec.n_positive;
    SubjectRecord r = sample_metadata(spec, s, positive);
    char id[32];
    std::snprintf(id, sizeof id, "s%04zu", s);
    r.subject_id = id;
    for (AudioType t : kAllAudioTypes) {
      r.recordings[t] = wav_dir / (r.subject_id + "_" + type_token(t) + ".wav");
    }
    manifest.subjects.push_back(std::move(r));
  }

  const std::size_t n_types = std::size(kAllAudioTypes);
  parallel_for(n * n_types, jobs, [&](std::size_t job) {
    const std::size_t s = job / n_types;
    const AudioType t = kAllAudioTypes[job % n_types];
    const auto& subject = manifest.subjects[s];
    auto samples = synthesize_recording(spec, s, subject.label == Label::kPositive, t);
    write_wav(subject.recordings.at(t),
              AudioClip(std::move(samples), spec.sample_rate, subject.subject_id, t));
  });

  write_manifest(out_dir / "manifest.csv", manifest);
  return manifest;
}

}  // namespace vocalscreen
