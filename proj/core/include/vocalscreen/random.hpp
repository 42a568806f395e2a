#ifndef VOCALSCREEN_RANDOM_HPP_
#define VOCALSCREEN_RANDOM_HPP_

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <random>

namespace vocalscreen {

// Mixes a base seed with stream identifiers (tree index, subject index, ...)
// into an independent 64-bit seed.
std::uint64_t derive_seed(std::uint64_t base,
                          std::initializer_list<std::uint64_t> stream);

// Seeded generator whose draws are identical on every standard library.
// std::mt19937_64 output is fixed by the standard; the distributions are not,
// so uniform/normal/integer draws are implemented here.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform in [0, 1).
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [0, bound). bound must be > 0.
  std::uint64_t below(std::uint64_t bound);

  bool bernoulli(double p) { return uniform() < p; }

  // Standard normal via Box-Muller; caches the second variate.
  double normal();

  double normal(double mean, double stddev) { return mean + stddev * normal(); }

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace vocalscreen

#endif  // VOCALSCREEN_RANDOM_HPP_
