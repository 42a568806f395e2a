#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "vocalscreen/error.hpp"
#include "vocalscreen/parallel.hpp"
#include "vocalscreen/random.hpp"

namespace vocalscreen {

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "INVALID_ARGUMENT";
    case ErrorCode::kUnsupportedCodec: return "UNSUPPORTED_CODEC";
    case ErrorCode::kCorruptHeader: return "CORRUPT_HEADER";
    case ErrorCode::kEmptyAudio: return "EMPTY_AUDIO";
    case ErrorCode::kClipTooShort: return "CLIP_TOO_SHORT";
    case ErrorCode::kIoReadFailure: return "IO_READ_FAILURE";
    case ErrorCode::kIoWriteFailure: return "IO_WRITE_FAILURE";
    case ErrorCode::kDegenerateFilterbank: return "DEGENERATE_FILTERBANK";
    case ErrorCode::kEmptySeries: return "EMPTY_SERIES";
    case ErrorCode::kDimensionMismatch: return "DIMENSION_MISMATCH";
    case ErrorCode::kDuplicateId: return "DUPLICATE_ID";
    case ErrorCode::kParseError: return "PARSE_ERROR";
    case ErrorCode::kNameCollision: return "NAME_COLLISION";
    case ErrorCode::kMissingEmbedding: return "MISSING_EMBEDDING";
    case ErrorCode::kSingleClass: return "SINGLE_CLASS";
    case ErrorCode::kNonfiniteInput: return "NONFINITE_INPUT";
    case ErrorCode::kSchemaMismatch: return "SCHEMA_MISMATCH";
    case ErrorCode::kUnknownParameter: return "UNKNOWN_PARAMETER";
    case ErrorCode::kDuplicateRecording: return "DUPLICATE_RECORDING";
    case ErrorCode::kConflictingMetadata: return "CONFLICTING_METADATA";
    case ErrorCode::kMissingFile: return "MISSING_FILE";
    case ErrorCode::kBadLabel: return "BAD_LABEL";
    case ErrorCode::kTooFewSubjects: return "TOO_FEW_SUBJECTS";
  }
  return "UNKNOWN";
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t base,
                          std::initializer_list<std::uint64_t> stream) {
  std::uint64_t h = splitmix64(base);
  for (std::uint64_t s : stream) h = splitmix64(h ^ splitmix64(s + 1));
  return h;
}

std::uint64_t Rng::below(std::uint64_t bound) {
  // Rejection sampling keeps the draw unbiased.
  const std::uint64_t limit = -bound % bound;
  for (;;) {
    const std::uint64_t r = engine_();
    if (r >= limit) return r % bound;
  }
}

double Rng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u1 = uniform();
  while (u1 <= 0.0) u1 = uniform();
  const double u2 = uniform();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * M_PI * u2;
  spare_ = radius * std::sin(angle);
  has_spare_ = true;
  return radius * std::cos(angle);
}

void parallel_for(std::size_t n, std::size_t jobs,
                  const std::function<void(std::size_t)>& body) {
  if (jobs <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      try {
        body(i);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next.store(n);
        return;
      }
    }
  };
  const std::size_t workers = std::min(jobs, n);
  std::vector<std::thread> threads;
  threads.reserve(workers - 1);
  for (std::size_t t = 1; t < workers; ++t) threads.emplace_back(worker);
  worker();
  for (auto& t : threads) t.join();
  if (failure) std::rethrow_exception(failure);
}

std::size_t default_jobs() {
  if (const char* env = std::getenv("VOCALSCREEN_JOBS")) {
    try {
      const long value = std::stol(env);
      if (value >= 1) return static_cast<std::size_t>(value);
    } catch (const std::exception&) {
    }
  }
  return 1;
}

}  // namespace vocalscreen
