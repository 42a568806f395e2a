#ifndef VOCALSCREEN_AUDIO_IO_HPP_
#define VOCALSCREEN_AUDIO_IO_HPP_

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace vocalscreen {

enum class AudioType { kVowelAh, kVowelIy, kVowelUw, kAlphabet, kCount, kCough };

inline constexpr AudioType kAllAudioTypes[] = {
    AudioType::kVowelAh,  AudioType::kVowelIy, AudioType::kVowelUw,
    AudioType::kAlphabet, AudioType::kCount,   AudioType::kCough};

// Canonical tokens: VOWEL_AH, VOWEL_IY, VOWEL_UW, ALPHABET, COUNT, COUGH.
std::string_view audio_type_name(AudioType type);
// Case-insensitive; nullopt for unknown tokens.
std::optional<AudioType> parse_audio_type(std::string_view token);

// Decoded mono recording. Immutable after construction; the constructor
// enforces non-empty samples, |sample| <= 1 + 1e-6 and a positive rate.
class AudioClip {
 public:
  AudioClip(std::vector<double> samples, int sample_rate,
            std::string recording_id = {},
            AudioType audio_type = AudioType::kVowelAh);

  std::span<const double> samples() const noexcept { return samples_; }
  std::size_t size() const noexcept { return samples_.size(); }
  int sample_rate() const noexcept { return sample_rate_; }
  const std::string& recording_id() const noexcept { return recording_id_; }
  AudioType audio_type() const noexcept { return audio_type_; }
  double duration_seconds() const noexcept {
    return static_cast<double>(samples_.size()) / sample_rate_;
  }

 private:
  std::vector<double> samples_;
  int sample_rate_;
  std::string recording_id_;
  AudioType audio_type_;
};

// Decodes a RIFF/WAVE byte image: PCM 16-bit or IEEE float 32-bit, mono or
// stereo (channels averaged). Float samples are clamped to [-1, 1].
AudioClip decode_wav(std::span<const std::byte> bytes, std::string recording_id,
                     AudioType audio_type = AudioType::kVowelAh);

// Reads and decodes `path`; recording_id is the file stem. The audio type is
// a manifest attribute, so callers pass it in.
AudioClip load_wav(const std::filesystem::path& path,
                   AudioType audio_type = AudioType::kVowelAh);

enum class WavEncoding { kPcm16, kFloat32 };

std::vector<std::byte> encode_wav(std::span<const double> samples,
                                  int sample_rate, int channels = 1,
                                  WavEncoding encoding = WavEncoding::kPcm16);
void write_wav(const std::filesystem::path& path, const AudioClip& clip,
               WavEncoding encoding = WavEncoding::kPcm16);

// Kaiser-windowed sinc polyphase resampler (beta 8.6, 64 taps per phase).
// Output length is round(len * target / source); identity at equal rates.
AudioClip resample(const AudioClip& clip, int target_rate);

// Center-aligned framing: the signal is reflect-padded by frame_len/2 on each
// side and frames are views into the padded buffer.
class FrameMatrix {
 public:
  FrameMatrix(std::vector<double> padded, std::size_t frame_len,
              std::size_t hop, int sample_rate);

  std::size_t n_frames() const noexcept { return n_frames_; }
  std::size_t frame_len() const noexcept { return frame_len_; }
  std::size_t hop() const noexcept { return hop_; }
  int sample_rate() const noexcept { return sample_rate_; }
  std::size_t pad() const noexcept { return frame_len_ / 2; }

  std::span<const double> frame(std::size_t i) const {
    return {padded_.data() + i * hop_, frame_len_};
  }
  std::span<const double> padded() const noexcept { return padded_; }

 private:
  std::vector<double> padded_;
  std::size_t frame_len_;
  std::size_t hop_;
  int sample_rate_;
  std::size_t n_frames_;
};

// Throws CLIP_TOO_SHORT below 2 samples; INVALID_ARGUMENT for frame_len < 2
// or hop < 1. Frame count is 1 + (padded_len - frame_len) / hop.
FrameMatrix frame_signal(const AudioClip& clip, std::size_t frame_len = 2048,
                         std::size_t hop = 512);

}  // namespace vocalscreen

#endif  // VOCALSCREEN_AUDIO_IO_HPP_
