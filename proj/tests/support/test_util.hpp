#ifndef VOCALSCREEN_TESTS_TEST_UTIL_HPP_
#define VOCALSCREEN_TESTS_TEST_UTIL_HPP_

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <numbers>
#include <string>
#include <vector>

#include "vocalscreen/random.hpp"

namespace testutil {

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("vocalscreen_" + tag + "_" + std::to_string(getpid_portable()) + "_" +
             std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& leaf) const { return path_ / leaf; }

 private:
  static long getpid_portable();
  std::filesystem::path path_;
};

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream f(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

inline void write_file(const std::filesystem::path& p, const std::string& text) {
  std::ofstream f(p, std::ios::binary);
  f << text;
}

// Mixture of tones, a chirp and noise, within [-1, 1].
inline std::vector<double> random_clip(vocalscreen::Rng& rng, std::size_t n, int rate = 8000) {
  std::vector<double> x(n, 0.0);
  const int tones = 1 + static_cast<int>(rng.below(3));
  for (int t = 0; t < tones; ++t) {
    const double f = rng.uniform(50.0, rate / 2.0 - 100.0);
    const double a = rng.uniform(0.05, 0.3);
    const double phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
    for (std::size_t i = 0; i < n; ++i) x[i] += a * std::sin(2.0 * std::numbers::pi * f * i / rate + phase);
  }
  const double f0 = rng.uniform(100.0, 500.0), f1 = rng.uniform(500.0, rate / 2.0 - 200.0);
  const double chirp = rng.uniform(0.0, 0.2);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / rate;
    const double dur = static_cast<double>(n) / rate;
    x[i] += chirp * std::sin(2.0 * std::numbers::pi * (f0 * t + 0.5 * (f1 - f0) * t * t / dur));
  }
  const double noise = rng.uniform(0.0, 0.2);
  for (double& v : x) v += noise * rng.normal();
  // Occasional silent stretch exercises the log floor and dB clamp.
  if (rng.bernoulli(0.3)) {
    const std::size_t start = rng.below(n / 2);
    for (std::size_t i = start; i < std::min(n, start + n / 4); ++i) x[i] = 0.0;
  }
  double peak = 0.0;
  for (double v : x) peak = std::max(peak, std::abs(v));
  if (peak > 0.99) {
    for (double& v : x) v *= 0.99 / peak;
  }
  return x;
}

}  // namespace testutil

#endif  // VOCALSCREEN_TESTS_TEST_UTIL_HPP_
