#include "vocalscreen/audio_io.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <numeric>

#include "vocalscreen/error.hpp"

namespace vocalscreen {

namespace {

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

std::uint16_t read_u16(std::span<const std::byte> b, std::size_t at) {
  return static_cast<std::uint16_t>(std::to_integer<unsigned>(b[at]) |
                                    (std::to_integer<unsigned>(b[at + 1]) << 8));
}

std::uint32_t read_u32(std::span<const std::byte> b, std::size_t at) {
  return static_cast<std::uint32_t>(read_u16(b, at)) |
         (static_cast<std::uint32_t>(read_u16(b, at + 2)) << 16);
}

bool tag_is(std::span<const std::byte> b, std::size_t at, const char* tag) {
  return std::memcmp(b.data() + at, tag, 4) == 0;
}

void put_u16(std::vector<std::byte>& out, std::uint16_t v) {
  out.push_back(static_cast<std::byte>(v & 0xFF));
  out.push_back(static_cast<std::byte>(v >> 8));
}

void put_u32(std::vector<std::byte>& out, std::uint32_t v) {
  put_u16(out, static_cast<std::uint16_t>(v & 0xFFFF));
  put_u16(out, static_cast<std::uint16_t>(v >> 16));
}

void put_tag(std::vector<std::byte>& out, const char* tag) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::byte>(tag[i]));
}

}  // namespace

std::string_view audio_type_name(AudioType type) {
  switch (type) {
    case AudioType::kVowelAh: return "VOWEL_AH";
    case AudioType::kVowelIy: return "VOWEL_IY";
    case AudioType::kVowelUw: return "VOWEL_UW";
    case AudioType::kAlphabet: return "ALPHABET";
    case AudioType::kCount: return "COUNT";
    case AudioType::kCough: return "COUGH";
  }
  return "UNKNOWN";
}

std::optional<AudioType> parse_audio_type(std::string_view token) {
  std::string upper(token);
  std::transform(upper.begin(), upper.end(), upper.begin(),
                 [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
  for (AudioType t : kAllAudioTypes) {
    if (audio_type_name(t) == upper) return t;
  }
  return std::nullopt;
}

AudioClip::AudioClip(std::vector<double> samples, int sample_rate,
                     std::string recording_id, AudioType audio_type)
    : samples_(std::move(samples)),
      sample_rate_(sample_rate),
      recording_id_(std::move(recording_id)),
      audio_type_(audio_type) {
  if (samples_.empty()) {
    throw Error(ErrorCode::kEmptyAudio, "clip '" + recording_id_ + "' has no samples");
  }
  if (sample_rate_ <= 0) {
    throw Error(ErrorCode::kInvalidArgument, "sample rate must be positive");
  }
  for (double s : samples_) {
    if (!(std::abs(s) <= 1.0 + 1e-6)) {
      throw Error(ErrorCode::kInvalidArgument,
                  "clip '" + recording_id_ + "' has a sample outside [-1, 1]");
    }
  }
}

AudioClip decode_wav(std::span<const std::byte> bytes, std::string recording_id,
                     AudioType audio_type) {
  if (bytes.size() < 12 || !tag_is(bytes, 0, "RIFF") || !tag_is(bytes, 8, "WAVE")) {
    throw Error(ErrorCode::kCorruptHeader, "missing RIFF/WAVE signature");
  }

  std::uint16_t format = 0;
  std::uint16_t channels = 0;
  std::uint32_t sample_rate = 0;
  std::uint16_t block_align = 0;
  std::uint16_t bits = 0;
  bool have_fmt = false;
  std::span<const std::byte> data;
  bool have_data = false;

  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const std::uint32_t chunk_size = read_u32(bytes, pos + 4);
    const std::size_t body = pos + 8;
    const std::size_t available = bytes.size() - body;
    if (tag_is(bytes, pos, "fmt ")) {
      if (chunk_size < 16 || chunk_size > available) {
        throw Error(ErrorCode::kCorruptHeader, "truncated fmt chunk");
      }
      format = read_u16(bytes, body);
      channels = read_u16(bytes, body + 2);
      sample_rate = read_u32(bytes, body + 4);
      block_align = read_u16(bytes, body + 12);
      bits = read_u16(bytes, body + 14);
      if (format == kFormatExtensible) {
        if (chunk_size < 40) {
          throw Error(ErrorCode::kCorruptHeader, "truncated extensible fmt chunk");
        }
        // The first two bytes of the subformat GUID carry the format tag.
        format = read_u16(bytes, body + 24);
      }
      have_fmt = true;
    } else if (tag_is(bytes, pos, "data")) {
      // Streaming writers may leave the size unset; take what is present.
      data = bytes.subspan(body, std::min<std::size_t>(chunk_size, available));
      have_data = true;
      break;
    }
    if (chunk_size > available) break;
    pos = body + chunk_size + (chunk_size & 1u);
  }

  if (!have_fmt) throw Error(ErrorCode::kCorruptHeader, "no fmt chunk");
  if (!have_data) throw Error(ErrorCode::kCorruptHeader, "no data chunk");
  const bool pcm16 = format == kFormatPcm && bits == 16;
  const bool float32 = format == kFormatFloat && bits == 32;
  if (!pcm16 && !float32) {
    throw Error(ErrorCode::kUnsupportedCodec,
                "format " + std::to_string(format) + " with " +
                    std::to_string(bits) + " bits per sample");
  }
  if (channels != 1 && channels != 2) {
    throw Error(ErrorCode::kUnsupportedCodec,
                std::to_string(channels) + " channels (mono or stereo only)");
  }
  if (sample_rate == 0 || block_align != channels * (bits / 8)) {
    throw Error(ErrorCode::kCorruptHeader, "inconsistent fmt fields");
  }

  const std::size_t frames = data.size() / block_align;
  if (frames == 0) throw Error(ErrorCode::kEmptyAudio, "data chunk holds no frames");

  std::vector<double> samples(frames);
  for (std::size_t f = 0; f < frames; ++f) {
    double acc = 0.0;
    for (std::size_t c = 0; c < channels; ++c) {
      const std::size_t at = f * block_align + c * (bits / 8);
      if (pcm16) {
        acc += static_cast<std::int16_t>(read_u16(data, at)) / 32768.0;
      } else {
        const std::uint32_t raw = read_u32(data, at);
        float value;
        std::memcpy(&value, &raw, sizeof value);
        acc += std::isfinite(value) ? std::clamp(static_cast<double>(value), -1.0, 1.0)
                                    : 0.0;
      }
    }
    samples[f] = acc / channels;
  }
  return AudioClip(std::move(samples), static_cast<int>(sample_rate),
                   std::move(recording_id), audio_type);
}

AudioClip load_wav(const std::filesystem::path& path, AudioType audio_type) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoReadFailure, "cannot open " + path.string());
  std::vector<char> raw((std::istreambuf_iterator<char>(in)),
                        std::istreambuf_iterator<char>());
  std::vector<std::byte> bytes(raw.size());
  std::memcpy(bytes.data(), raw.data(), raw.size());
  try {
    return decode_wav(bytes, path.stem().string(), audio_type);
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.what());
  }
}

std::vector<std::byte> encode_wav(std::span<const double> samples,
                                  int sample_rate, int channels,
                                  WavEncoding encoding) {
  if (channels < 1 || samples.size() % channels != 0) {
    throw Error(ErrorCode::kInvalidArgument, "sample count not a multiple of channels");
  }
  const std::uint16_t bits = encoding == WavEncoding::kPcm16 ? 16 : 32;
  const std::uint16_t block = static_cast<std::uint16_t>(channels * bits / 8);
  const auto data_size = static_cast<std::uint32_t>(samples.size() * (bits / 8));

  std::vector<std::byte> out;
  out.reserve(44 + data_size);
  put_tag(out, "RIFF");
  put_u32(out, 36 + data_size);
  put_tag(out, "WAVE");
  put_tag(out, "fmt ");
  put_u32(out, 16);
  put_u16(out, encoding == WavEncoding::kPcm16 ? kFormatPcm : kFormatFloat);
  put_u16(out, static_cast<std::uint16_t>(channels));
  put_u32(out, static_cast<std::uint32_t>(sample_rate));
  put_u32(out, static_cast<std::uint32_t>(sample_rate) * block);
  put_u16(out, block);
  put_u16(out, bits);
  put_tag(out, "data");
  put_u32(out, data_size);
  for (double s : samples) {
    if (encoding == WavEncoding::kPcm16) {
      const double scaled = std::round(std::clamp(s, -1.0, 1.0) * 32768.0);
      const auto q = static_cast<std::int16_t>(std::clamp(scaled, -32768.0, 32767.0));
      put_u16(out, static_cast<std::uint16_t>(q));
    } else {
      const float f = static_cast<float>(s);
      std::uint32_t raw;
      std::memcpy(&raw, &f, sizeof raw);
      put_u32(out, raw);
    }
  }
  return out;
}

void write_wav(const std::filesystem::path& path, const AudioClip& clip,
               WavEncoding encoding) {
  const auto bytes = encode_wav(clip.samples(), clip.sample_rate(), 1, encoding);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIoWriteFailure, "cannot open " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::kIoWriteFailure, "short write to " + path.string());
}

namespace {

constexpr int kTapsPerPhase = 64;
constexpr double kKaiserBeta = 8.6;

double sinc(double x) {
  if (x == 0.0) return 1.0;
  const double px = M_PI * x;
  return std::sin(px) / px;
}

// Taps for output samples whose input-domain position is base + frac,
// applied to inputs base - 31 .. base + 32.
std::vector<double> phase_kernel(double frac, double cutoff, double i0_beta) {
  constexpr double half = kTapsPerPhase / 2.0;
  std::vector<double> taps(kTapsPerPhase);
  double sum = 0.0;
  for (int k = 0; k < kTapsPerPhase; ++k) {
    const double t = static_cast<double>(k - (kTapsPerPhase / 2 - 1)) - frac;
    const double x = t / half;
    const double window =
        std::abs(x) >= 1.0
            ? 0.0
            : std::cyl_bessel_i(0.0, kKaiserBeta * std::sqrt(1.0 - x * x)) / i0_beta;
    taps[k] = cutoff * sinc(cutoff * t) * window;
    sum += taps[k];
  }
  for (double& tap : taps) tap /= sum;
  return taps;
}

}  // namespace

AudioClip resample(const AudioClip& clip, int target_rate) {
  if (target_rate <= 0) {
    throw Error(ErrorCode::kInvalidArgument, "target rate must be positive");
  }
  const int source_rate = clip.sample_rate();
  if (target_rate == source_rate) return clip;

  const std::int64_t g = std::gcd(source_rate, target_rate);
  const std::int64_t up = target_rate / g;
  const std::int64_t down = source_rate / g;
  const auto n_in = static_cast<std::int64_t>(clip.size());
  const std::int64_t n_out =
      std::max<std::int64_t>(1, (2 * n_in * target_rate + source_rate) / (2 * source_rate));

  const double cutoff = std::min(1.0, static_cast<double>(up) / static_cast<double>(down));
  const double i0_beta = std::cyl_bessel_i(0.0, kKaiserBeta);
  constexpr std::int64_t kMaxTablePhases = 8192;
  std::vector<std::vector<double>> table;
  if (up <= kMaxTablePhases) {
    table.reserve(static_cast<std::size_t>(up));
    for (std::int64_t p = 0; p < up; ++p) {
      table.push_back(phase_kernel(static_cast<double>(p) / up, cutoff, i0_beta));
    }
  }

  const auto in = clip.samples();
  std::vector<double> out(static_cast<std::size_t>(n_out));
  for (std::int64_t n = 0; n < n_out; ++n) {
    const std::int64_t base = (n * down) / up;
    const std::int64_t phase = (n * down) % up;
    std::vector<double> scratch;
    const std::vector<double>* taps = nullptr;
    if (!table.empty()) {
      taps = &table[static_cast<std::size_t>(phase)];
    } else {
      scratch = phase_kernel(static_cast<double>(phase) / up, cutoff, i0_beta);
      taps = &scratch;
    }
    double acc = 0.0;
    for (int k = 0; k < kTapsPerPhase; ++k) {
      const std::int64_t j = base + k - (kTapsPerPhase / 2 - 1);
      if (j >= 0 && j < n_in) acc += (*taps)[k] * in[static_cast<std::size_t>(j)];
    }
    out[static_cast<std::size_t>(n)] = std::clamp(acc, -1.0, 1.0);
  }
  return AudioClip(std::move(out), target_rate, clip.recording_id(), clip.audio_type());
}

FrameMatrix::FrameMatrix(std::vector<double> padded, std::size_t frame_len,
                         std::size_t hop, int sample_rate)
    : padded_(std::move(padded)),
      frame_len_(frame_len),
      hop_(hop),
      sample_rate_(sample_rate),
      n_frames_(padded_.size() < frame_len ? 0 : 1 + (padded_.size() - frame_len) / hop) {}

FrameMatrix frame_signal(const AudioClip& clip, std::size_t frame_len, std::size_t hop) {
  if (frame_len < 2 || hop < 1) {
    throw Error(ErrorCode::kInvalidArgument, "frame_len must be >= 2 and hop >= 1");
  }
  const auto x = clip.samples();
  const std::size_t n = x.size();
  if (n < 2) {
    throw Error(ErrorCode::kClipTooShort, "reflect padding needs at least 2 samples");
  }
  const std::size_t pad = frame_len / 2;
  const auto period = static_cast<std::int64_t>(2 * (n - 1));
  std::vector<double> padded(n + 2 * pad);
  for (std::size_t i = 0; i < padded.size(); ++i) {
    // Mirror about the end samples without repeating them, as often as needed.
    std::int64_t m = (static_cast<std::int64_t>(i) - static_cast<std::int64_t>(pad)) % period;
    if (m < 0) m += period;
    if (m >= static_cast<std::int64_t>(n)) m = period - m;
    padded[i] = x[static_cast<std::size_t>(m)];
  }
  return FrameMatrix(std::move(padded), frame_len, hop, clip.sample_rate());
}

}  // namespace vocalscreen
