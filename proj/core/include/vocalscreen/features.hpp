#ifndef VOCALSCREEN_FEATURES_HPP_
#define VOCALSCREEN_FEATURES_HPP_

#include <array>
#include <cstddef>
#include <filesystem>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "vocalscreen/audio_io.hpp"
#include "vocalscreen/dsp.hpp"

namespace vocalscreen {

// Distribution summary of one framewise series. Spread and shape statistics
// use population (1/n) moments.
struct StatSummary {
  double min = 0.0;
  double max = 0.0;
  double range = 0.0;
  double mean = 0.0;
  double rms = 0.0;
  double q1 = 0.0;
  double median = 0.0;
  double q3 = 0.0;
  double iqr = 0.0;
  double std = 0.0;
  double variance = 0.0;
  double skew = 0.0;
  double excess_kurtosis = 0.0;
  double mad = 0.0;  // mean absolute deviation about the mean

  static constexpr std::size_t kSize = 14;
  static const std::array<std::string_view, kSize>& names();
  std::array<double, kSize> values() const;
};

// Throws EMPTY_SERIES on empty input. Quartiles interpolate linearly at rank
// (n - 1) * p of the sorted series.
StatSummary summarize_series(std::span<const double> values);

enum class FeatureSource { kMean, kStat, kExternal };

struct FeatureName {
  std::string name;
  FeatureSource source;
  friend bool operator==(const FeatureName&, const FeatureName&) = default;
};

class FeatureSchema {
 public:
  FeatureSchema() = default;
  // Throws NAME_COLLISION on duplicate names.
  explicit FeatureSchema(std::vector<FeatureName> entries);

  std::size_t dimension() const noexcept { return entries_.size(); }
  const std::vector<FeatureName>& entries() const noexcept { return entries_; }
  const std::string& name(std::size_t i) const { return entries_[i].name; }
  std::vector<std::string> names() const;
  // Stable 64-bit FNV-1a hash of the ordered column names, as 16 hex digits.
  // Sources are not hashed: a schema read back from a feature cache has the
  // same fingerprint as the one that wrote it.
  std::string fingerprint() const;

  friend bool operator==(const FeatureSchema&, const FeatureSchema&) = default;

 private:
  std::vector<FeatureName> entries_;
};

struct CustomFeatureVector {
  std::shared_ptr<const FeatureSchema> schema;
  std::vector<double> values;
  // Non-finite intermediates replaced by 0.
  std::size_t nonfinite_zeroed = 0;
};

struct FeatureConfig {
  DspConfig dsp;
  bool stats_on_deltas = false;
};

// Column layout of build_custom_features: 65 recording means named
// "<x>.avg" (4 spectral descriptors, 3 x n_mfcc cepstral tracks) plus
// "tempo.bpm", then "<x>.<stat>" for the 14 statistics of each spectral
// descriptor, of each MFCC coefficient and, with stats_on_deltas, of each
// delta and delta-delta coefficient.
std::shared_ptr<const FeatureSchema> custom_feature_schema(const FeatureConfig& config);

// Resamples to config.dsp.sample_rate when needed, then builds the
// recording-level vector.
CustomFeatureVector build_custom_features(const AudioClip& clip,
                                          const FeatureConfig& config = {});

class ExternalEmbeddingTable {
 public:
  ExternalEmbeddingTable(std::string source_label, std::size_t dimension);

  // Throws DUPLICATE_ID or DIMENSION_MISMATCH.
  void add(const std::string& recording_id, std::vector<double> vector);

  const std::string& source_label() const noexcept { return source_label_; }
  std::size_t dimension() const noexcept { return dimension_; }
  std::size_t size() const noexcept { return rows_.size(); }
  bool contains(const std::string& recording_id) const;
  // Throws MISSING_EMBEDDING.
  std::span<const double> at(const std::string& recording_id) const;
  std::shared_ptr<const FeatureSchema> schema() const;

 private:
  std::string source_label_;
  std::size_t dimension_;
  std::map<std::string, std::vector<double>> rows_;
};

// CSV (header recording_id,v0,v1,...) or JSON lines ({"id":..,"vector":[..]}),
// chosen by a .jsonl/.json extension. Dimension is taken from the first row.
ExternalEmbeddingTable load_embedding_table(const std::filesystem::path& path,
                                            const std::string& source_label);

struct FeaturePart {
  std::string label;
  const FeatureSchema* schema;
  std::span<const double> values;
};

// Concatenates parts in order, naming each column "<label>:<name>".
CustomFeatureVector fuse_features(std::span<const FeaturePart> parts);

// Schema of fuse_features over parts with these labels and schemas, without
// any values.
std::shared_ptr<const FeatureSchema> fused_schema(
    std::span<const std::pair<std::string, const FeatureSchema*>> parts);

// One row per recording, keyed by recording id.
struct FeatureTable {
  std::shared_ptr<const FeatureSchema> schema;
  std::vector<std::string> recording_ids;
  Matrix values;
};

// CSV with header recording_id,<names...>; values printed with 17
// significant digits so a reload is lossless.
void write_feature_cache(const std::filesystem::path& path, const FeatureTable& table);
FeatureTable read_feature_cache(const std::filesystem::path& path);

}  // namespace vocalscreen

#endif  // VOCALSCREEN_FEATURES_HPP_
