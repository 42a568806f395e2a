#include "vocalscreen/features.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <optional>
#include <set>
#include <sstream>

#include "json.hpp"

#include "text_io.hpp"
#include "vocalscreen/error.hpp"

namespace vocalscreen {

const std::array<std::string_view, StatSummary::kSize>& StatSummary::names() {
  static const std::array<std::string_view, kSize> kNames = {
      "min", "max",    "range", "mean",     "rms",  "q1",              "median",
      "q3",  "iqr",    "std",   "variance", "skew", "excess_kurtosis", "mad"};
  return kNames;
}

std::array<double, StatSummary::kSize> StatSummary::values() const {
  return {min, max, range, mean, rms, q1, median, q3, iqr, std, variance, skew,
          excess_kurtosis, mad};
}

StatSummary summarize_series(std::span<const double> values) {
  if (values.empty()) throw Error(ErrorCode::kEmptySeries, "cannot summarize an empty series");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const std::size_t n = sorted.size();
  const double count = static_cast<double>(n);

  auto quantile = [&](double p) {
    const double h = static_cast<double>(n - 1) * p;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    if (lo + 1 >= n) return sorted[n - 1];
    return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[lo + 1] - sorted[lo]);
  };

  StatSummary s;
  s.min = sorted.front();
  s.max = sorted.back();
  s.range = s.max - s.min;
  s.q1 = quantile(0.25);
  s.median = quantile(0.5);
  s.q3 = quantile(0.75);
  s.iqr = s.q3 - s.q1;

  if (s.min == s.max) {
    // Exact degenerate case; summing would reintroduce rounding.
    s.mean = s.min;
    s.rms = std::abs(s.min);
    return s;
  }

  // Moments accumulate in sorted order so the summary is permutation
  // invariant bit for bit.
  double sum = 0.0;
  double sum_sq = 0.0;
  for (double x : sorted) {
    sum += x;
    sum_sq += x * x;
  }
  s.mean = sum / count;
  s.rms = std::sqrt(sum_sq / count);

  double m2 = 0.0, m3 = 0.0, m4 = 0.0, abs_dev = 0.0;
  for (double x : sorted) {
    const double d = x - s.mean;
    const double d2 = d * d;
    m2 += d2;
    m3 += d2 * d;
    m4 += d2 * d2;
    abs_dev += std::abs(d);
  }
  m2 /= count;
  m3 /= count;
  m4 /= count;
  s.variance = m2;
  s.std = std::sqrt(m2);
  s.mad = abs_dev / count;
  if (m2 > 0.0) {
    s.skew = m3 / std::pow(m2, 1.5);
    s.excess_kurtosis = m4 / (m2 * m2) - 3.0;
  }
  return s;
}

FeatureSchema::FeatureSchema(std::vector<FeatureName> entries) : entries_(std::move(entries)) {
  std::set<std::string_view> seen;
  for (const auto& e : entries_) {
    if (!seen.insert(e.name).second) {
      throw Error(ErrorCode::kNameCollision, "duplicate feature name '" + e.name + "'");
    }
  }
}

std::vector<std::string> FeatureSchema::names() const {
  std::vector<std::string> out;
  out.reserve(entries_.size());
  for (const auto& e : entries_) out.push_back(e.name);
  return out;
}

std::string FeatureSchema::fingerprint() const {
  std::string joined;
  for (const auto& e : entries_) {
    joined += e.name;
    joined += '\0';
  }
  return detail::fnv1a_hex(joined);
}

namespace {

std::string coefficient_name(std::string_view prefix, std::size_t i) {
  char buf[8];
  std::snprintf(buf, sizeof buf, "%02zu", i);
  return std::string(prefix) + buf;
}

constexpr std::string_view kDescriptorNames[] = {"zcr", "centroid", "rolloff", "rms"};

void add_stats(std::vector<FeatureName>& out, const std::string& base) {
  for (auto stat : StatSummary::names()) {
    out.push_back({base + "." + std::string(stat), FeatureSource::kStat});
  }
}

}  // namespace

std::shared_ptr<const FeatureSchema> custom_feature_schema(const FeatureConfig& config) {
  const std::size_t n_mfcc = config.dsp.n_mfcc;
  std::vector<FeatureName> names;
  for (auto d : kDescriptorNames) names.push_back({std::string(d) + ".avg", FeatureSource::kMean});
  for (std::string_view prefix : {"mfcc", "dmfcc", "ddmfcc"}) {
    for (std::size_t i = 0; i < n_mfcc; ++i) {
      names.push_back({coefficient_name(prefix, i) + ".avg", FeatureSource::kMean});
    }
  }
  names.push_back({"tempo.bpm", FeatureSource::kMean});
  for (auto d : kDescriptorNames) add_stats(names, std::string(d));
  for (std::size_t i = 0; i < n_mfcc; ++i) add_stats(names, coefficient_name("mfcc", i));
  if (config.stats_on_deltas) {
    for (std::size_t i = 0; i < n_mfcc; ++i) add_stats(names, coefficient_name("dmfcc", i));
    for (std::size_t i = 0; i < n_mfcc; ++i) add_stats(names, coefficient_name("ddmfcc", i));
  }
  return std::make_shared<const FeatureSchema>(std::move(names));
}

CustomFeatureVector build_custom_features(const AudioClip& clip, const FeatureConfig& config) {
  const AudioClip& source = clip;
  std::optional<AudioClip> resampled;
  if (clip.sample_rate() != config.dsp.sample_rate) {
    resampled = resample(clip, config.dsp.sample_rate);
  }
  const auto d = analyze_clip(resampled ? *resampled : source, config.dsp);
  const std::size_t n_mfcc = config.dsp.n_mfcc;

  std::vector<StatSummary> descriptor_stats;
  for (const auto* series : {&d.zcr, &d.centroid, &d.rolloff, &d.rms}) {
    descriptor_stats.push_back(summarize_series(series->values));
  }
  auto column_stats = [](const Matrix& m) {
    std::vector<StatSummary> out;
    for (std::size_t c = 0; c < m.cols(); ++c) out.push_back(summarize_series(m.column(c)));
    return out;
  };
  const auto mfcc_stats = column_stats(d.mfcc);
  const auto delta_stats = column_stats(d.mfcc_delta);
  const auto delta2_stats = column_stats(d.mfcc_delta2);

  CustomFeatureVector out;
  out.schema = custom_feature_schema(config);
  auto& v = out.values;
  v.reserve(out.schema->dimension());
  for (const auto& s : descriptor_stats) v.push_back(s.mean);
  for (const auto* block : {&mfcc_stats, &delta_stats, &delta2_stats}) {
    for (std::size_t i = 0; i < n_mfcc; ++i) v.push_back((*block)[i].mean);
  }
  v.push_back(d.tempo_bpm);
  auto append = [&v](const StatSummary& s) {
    for (double x : s.values()) v.push_back(x);
  };
  for (const auto& s : descriptor_stats) append(s);
  for (const auto& s : mfcc_stats) append(s);
  if (config.stats_on_deltas) {
    for (const auto& s : delta_stats) append(s);
    for (const auto& s : delta2_stats) append(s);
  }
  for (double& x : v) {
    if (!std::isfinite(x)) {
      x = 0.0;
      ++out.nonfinite_zeroed;
    }
  }
  return out;
}

ExternalEmbeddingTable::ExternalEmbeddingTable(std::string source_label, std::size_t dimension)
    : source_label_(std::move(source_label)), dimension_(dimension) {}

void ExternalEmbeddingTable::add(const std::string& recording_id, std::vector<double> vector) {
  if (vector.size() != dimension_) {
    throw Error(ErrorCode::kDimensionMismatch,
                "'" + recording_id + "' has " + std::to_string(vector.size()) +
                    " values, expected " + std::to_string(dimension_));
  }
  if (!rows_.emplace(recording_id, std::move(vector)).second) {
    throw Error(ErrorCode::kDuplicateId, "recording '" + recording_id + "' listed twice");
  }
}

bool ExternalEmbeddingTable::contains(const std::string& recording_id) const {
  return rows_.count(recording_id) != 0;
}

std::span<const double> ExternalEmbeddingTable::at(const std::string& recording_id) const {
  const auto it = rows_.find(recording_id);
  if (it == rows_.end()) {
    throw Error(ErrorCode::kMissingEmbedding,
                "no " + source_label_ + " embedding for '" + recording_id + "'");
  }
  return it->second;
}

std::shared_ptr<const FeatureSchema> ExternalEmbeddingTable::schema() const {
  std::vector<FeatureName> names;
  names.reserve(dimension_);
  for (std::size_t i = 0; i < dimension_; ++i) {
    names.push_back({"v" + std::to_string(i), FeatureSource::kExternal});
  }
  return std::make_shared<const FeatureSchema>(std::move(names));
}

namespace {

[[noreturn]] void parse_failure(const std::filesystem::path& path, std::size_t line,
                                const std::string& what) {
  throw Error(ErrorCode::kParseError,
              path.string() + " line " + std::to_string(line) + ": " + what);
}

// Adds a row, re-throwing dimension errors with the row position.
void add_row(ExternalEmbeddingTable*& table, std::optional<ExternalEmbeddingTable>& storage,
             const std::string& label, const std::string& id, std::vector<double> values,
             std::size_t row, std::size_t line, const std::filesystem::path& path) {
  if (!table) {
    if (values.empty()) parse_failure(path, line, "embedding row has no values");
    storage.emplace(label, values.size());
    table = &*storage;
  }
  if (values.size() != table->dimension()) {
    throw Error(ErrorCode::kDimensionMismatch,
                path.string() + " row " + std::to_string(row) + " (line " +
                    std::to_string(line) + "): " + std::to_string(values.size()) +
                    " values, expected " + std::to_string(table->dimension()));
  }
  try {
    table->add(id, std::move(values));
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + " line " + std::to_string(line) + ": " + e.what());
  }
}

}  // namespace

ExternalEmbeddingTable load_embedding_table(const std::filesystem::path& path,
                                            const std::string& source_label) {
  const auto lines = detail::read_lines(path);
  std::optional<ExternalEmbeddingTable> storage;
  ExternalEmbeddingTable* table = nullptr;
  const std::string ext = detail::to_lower(path.extension().string());
  std::size_t row = 0;

  if (ext == ".jsonl" || ext == ".json") {
    for (std::size_t i = 0; i < lines.size(); ++i) {
      if (detail::trim(lines[i]).empty()) continue;
      nlohmann::json record;
      try {
        record = nlohmann::json::parse(lines[i]);
      } catch (const nlohmann::json::exception& e) {
        parse_failure(path, i + 1, e.what());
      }
      if (!record.is_object() || !record.contains("id") || !record["id"].is_string() ||
          !record.contains("vector") || !record["vector"].is_array()) {
        parse_failure(path, i + 1, "expected {\"id\": string, \"vector\": [numbers]}");
      }
      std::vector<double> values;
      for (const auto& x : record["vector"]) {
        if (!x.is_number()) parse_failure(path, i + 1, "non-numeric vector entry");
        values.push_back(x.get<double>());
      }
      add_row(table, storage, source_label, record["id"].get<std::string>(), std::move(values),
              ++row, i + 1, path);
    }
  } else {
    if (lines.empty() || detail::trim(lines[0]).empty()) parse_failure(path, 1, "empty file");
    const auto header = detail::split_csv_line(lines[0]);
    if (detail::trim(header[0]) != "recording_id") {
      parse_failure(path, 1, "header must start with recording_id");
    }
    for (std::size_t i = 1; i < lines.size(); ++i) {
      if (detail::trim(lines[i]).empty()) continue;
      const auto fields = detail::split_csv_line(lines[i]);
      std::vector<double> values;
      for (std::size_t f = 1; f < fields.size(); ++f) {
        const auto v = detail::parse_double(fields[f]);
        if (!v) parse_failure(path, i + 1, "bad number '" + fields[f] + "'");
        values.push_back(*v);
      }
      add_row(table, storage, source_label, detail::trim(fields[0]), std::move(values), ++row,
              i + 1, path);
    }
  }
  if (!table) parse_failure(path, lines.size(), "no embedding rows");
  return std::move(*storage);
}

std::shared_ptr<const FeatureSchema> fused_schema(
    std::span<const std::pair<std::string, const FeatureSchema*>> parts) {
  if (parts.empty()) throw Error(ErrorCode::kInvalidArgument, "nothing to fuse");
  std::vector<FeatureName> names;
  for (const auto& [label, schema] : parts) {
    for (const auto& e : schema->entries()) names.push_back({label + ":" + e.name, e.source});
  }
  return std::make_shared<const FeatureSchema>(std::move(names));
}

CustomFeatureVector fuse_features(std::span<const FeaturePart> parts) {
  std::vector<std::pair<std::string, const FeatureSchema*>> labels;
  for (const auto& p : parts) {
    if (p.schema == nullptr || p.schema->dimension() != p.values.size()) {
      throw Error(ErrorCode::kDimensionMismatch,
                  "part '" + p.label + "' values do not match its schema");
    }
    labels.emplace_back(p.label, p.schema);
  }
  CustomFeatureVector out;
  out.schema = fused_schema(labels);
  out.values.reserve(out.schema->dimension());
  for (const auto& p : parts) out.values.insert(out.values.end(), p.values.begin(), p.values.end());
  return out;
}

namespace {

FeatureSource infer_source(const std::string& name) {
  const auto dot = name.rfind('.');
  if (dot == std::string::npos) return FeatureSource::kExternal;
  const std::string_view suffix = std::string_view(name).substr(dot + 1);
  if (suffix == "avg" || suffix == "bpm") return FeatureSource::kMean;
  for (auto stat : StatSummary::names()) {
    if (stat == suffix) return FeatureSource::kStat;
  }
  return FeatureSource::kExternal;
}

}  // namespace

void write_feature_cache(const std::filesystem::path& path, const FeatureTable& table) {
  if (table.values.rows() != table.recording_ids.size() ||
      (table.values.rows() > 0 && table.values.cols() != table.schema->dimension())) {
    throw Error(ErrorCode::kDimensionMismatch, "feature table shape does not match its schema");
  }
  std::ostringstream out;
  out << "recording_id";
  for (const auto& e : table.schema->entries()) out << ',' << detail::csv_escape(e.name);
  out << '\n';
  for (std::size_t r = 0; r < table.values.rows(); ++r) {
    out << detail::csv_escape(table.recording_ids[r]);
    for (double v : table.values.row(r)) out << ',' << detail::format_double(v);
    out << '\n';
  }
  detail::write_text(path, out.str());
}

FeatureTable read_feature_cache(const std::filesystem::path& path) {
  const auto lines = detail::read_lines(path);
  if (lines.empty()) parse_failure(path, 1, "empty feature cache");
  const auto header = detail::split_csv_line(lines[0]);
  if (header.empty() || header[0] != "recording_id") {
    parse_failure(path, 1, "header must start with recording_id");
  }
  std::vector<FeatureName> names;
  for (std::size_t i = 1; i < header.size(); ++i) names.push_back({header[i], infer_source(header[i])});

  FeatureTable table;
  table.schema = std::make_shared<const FeatureSchema>(std::move(names));
  const std::size_t dim = table.schema->dimension();
  table.values = Matrix(0, dim);
  std::set<std::string> seen;
  std::vector<double> row(dim);
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const auto fields = detail::split_csv_line(lines[i]);
    if (fields.size() != dim + 1) {
      throw Error(ErrorCode::kDimensionMismatch,
                  path.string() + " line " + std::to_string(i + 1) + ": " +
                      std::to_string(fields.size() - 1) + " values, expected " +
                      std::to_string(dim));
    }
    if (!seen.insert(fields[0]).second) {
      throw Error(ErrorCode::kDuplicateId, path.string() + ": recording '" + fields[0] +
                                               "' appears twice");
    }
    for (std::size_t f = 0; f < dim; ++f) {
      const auto v = detail::parse_double(fields[f + 1]);
      if (!v) parse_failure(path, i + 1, "bad number '" + fields[f + 1] + "'");
      row[f] = *v;
    }
    table.recording_ids.push_back(fields[0]);
    table.values.append_row(row);
  }
  return table;
}

}  // namespace vocalscreen
