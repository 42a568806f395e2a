#ifndef VOCALSCREEN_SYNTH_HPP_
#define VOCALSCREEN_SYNTH_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "vocalscreen/audio_io.hpp"
#include "vocalscreen/cohort.hpp"

namespace vocalscreen {

// Voice-source and filter settings of one class.
struct VoiceParams {
  double f0_shift_hz = 0.0;
  double jitter = 0.005;   // sd of the cycle length, as a fraction of it
  double shimmer = 0.03;   // sd of the cycle amplitude, as a fraction of it
  double hnr_db = 20.0;    // harmonic-to-noise power ratio
  double formant_shift_hz = 0.0;

  friend bool operator==(const VoiceParams&, const VoiceParams&) = default;
};

struct SynthSpec {
  std::size_t n_positive = 20;
  std::size_t n_negative = 20;
  std::uint64_t seed = 42;
  double duration_s = 1.5;
  int sample_rate = 8000;
  double f0_mean_hz = 140.0;
  double f0_sd_hz = 20.0;  // between-subject spread

  VoiceParams negative;
  VoiceParams positive;
  // Types on which positives use `positive`; elsewhere both classes use
  // `negative`.
  std::set<AudioType> contrast_types{std::begin(kAllAudioTypes), std::end(kAllAudioTypes)};

  // Symptom token -> (rate among negatives, rate among positives).
  std::map<std::string, std::pair<double, double>> symptom_rates{
      {"cough", {0.2, 0.2}},       {"sneeze", {0.1, 0.1}}, {"sore-throat", {0.1, 0.1}},
      {"breath-diff", {0.1, 0.1}}, {"fever", {0.1, 0.1}}};
  double asthma_rate = 0.1;
  double smoker_rate = 0.15;
  double missing_rate = 0.05;  // per optional metadata field

  // Jitter 0.002 vs 0.02 and HNR 30 vs 12 dB, on every type.
  static SynthSpec strong_voicing_contrast();
  // Both classes share one voice model.
  static SynthSpec null_contrast();

  // Throws INVALID_ARGUMENT when an invariant fails.
  void validate() const;
};

// JSON object whose keys mirror the fields above; absent keys keep their
// defaults. Throws PARSE_ERROR / INVALID_ARGUMENT.
SynthSpec parse_synth_spec(std::string_view json_text);
SynthSpec load_synth_spec(const std::filesystem::path& path);
std::string synth_spec_to_json(const SynthSpec& spec);

// Samples of one recording, fully determined by (spec.seed, subject, type).
std::vector<double> synthesize_recording(const SynthSpec& spec, std::size_t subject, bool positive,
                                         AudioType type);

// Writes <out>/wav/<subject>_<type>.wav (PCM16) and <out>/manifest.csv and
// returns the manifest. Throws IO_WRITE_FAILURE.
CohortManifest generate_cohort(const SynthSpec& spec, const std::filesystem::path& out_dir,
                               std::size_t jobs = 1);

}  // namespace vocalscreen

#endif  // VOCALSCREEN_SYNTH_HPP_
