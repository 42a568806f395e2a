#include "vocalscreen/cohort.hpp"

#include <algorithm>
#include <array>
#include <sstream>
#include <unordered_map>

#include "text_io.hpp"
#include "vocalscreen/error.hpp"
#include "vocalscreen/random.hpp"

namespace vocalscreen {

namespace fs = std::filesystem;

std::vector<std::string> CohortManifest::symptom_vocabulary() const {
  std::set<std::string> all;
  for (const auto& s : subjects) all.insert(s.symptoms.begin(), s.symptoms.end());
  return {all.begin(), all.end()};
}

std::size_t CohortManifest::count(Label label) const {
  return static_cast<std::size_t>(std::count_if(
      subjects.begin(), subjects.end(), [&](const SubjectRecord& s) { return s.label == label; }));
}

namespace {

constexpr std::array<std::string_view, 10> kColumns = {
    "subject_id", "label",   "audio_type", "recording_path", "age",
    "gender",     "symptoms", "asthma",    "smoker",         "diagnosis_offset_days"};

enum Column : std::size_t {
  kSubject, kLabel, kType, kPath, kAge, kGender, kSymptoms, kAsthma, kSmoker, kOffset
};

bool is_missing(std::string_view token) {
  const std::string t = detail::to_lower(detail::trim(token));
  return t.empty() || t == "na" || t == "n/a" || t == "missing" || t == "unknown";
}

std::string where(const fs::path& path, std::size_t line) {
  return path.string() + ":" + std::to_string(line) + ": ";
}

std::optional<bool> parse_bool(std::string_view token, const std::string& ctx) {
  if (is_missing(token)) return std::nullopt;
  const std::string t = detail::to_lower(detail::trim(token));
  if (t == "1" || t == "true" || t == "yes" || t == "y") return true;
  if (t == "0" || t == "false" || t == "no" || t == "n") return false;
  throw Error(ErrorCode::kParseError, ctx + "expected a boolean, got '" + std::string(token) + "'");
}

// Per-subject metadata as parsed from a single row; compared across rows.
struct RowMeta {
  Label label;
  std::optional<double> age;
  Gender gender;
  std::set<std::string> symptoms;
  std::optional<bool> asthma;
  std::optional<bool> smoker;
  std::optional<int> offset;

  bool operator==(const RowMeta&) const = default;
};

RowMeta parse_meta(const std::vector<std::string>& f, const std::string& ctx) {
  RowMeta m;
  const std::string label = detail::to_lower(detail::trim(f[kLabel]));
  if (label == "positive" || label == "1") {
    m.label = Label::kPositive;
  } else if (label == "negative" || label == "0") {
    m.label = Label::kNegative;
  } else {
    throw Error(ErrorCode::kBadLabel, ctx + "label '" + f[kLabel] + "' is not positive/negative");
  }

  if (!is_missing(f[kAge])) {
    const auto age = detail::parse_double(detail::trim(f[kAge]));
    if (!age || *age < 0.0) throw Error(ErrorCode::kParseError, ctx + "bad age '" + f[kAge] + "'");
    m.age = *age;
  }

  const std::string g = detail::to_lower(detail::trim(f[kGender]));
  if (g == "m" || g == "male") {
    m.gender = Gender::kMale;
  } else if (g == "f" || g == "female") {
    m.gender = Gender::kFemale;
  } else if (is_missing(g)) {
    m.gender = Gender::kMissing;
  } else {
    throw Error(ErrorCode::kParseError, ctx + "bad gender '" + f[kGender] + "'");
  }

  std::stringstream ss(f[kSymptoms]);
  std::string token;
  while (std::getline(ss, token, ';')) {
    const std::string t = detail::to_lower(detail::trim(token));
    if (!is_missing(t) && t != "none") m.symptoms.insert(t);
  }

  m.asthma = parse_bool(f[kAsthma], ctx);
  m.smoker = parse_bool(f[kSmoker], ctx);

  if (!is_missing(f[kOffset])) {
    const auto d = detail::parse_int(detail::trim(f[kOffset]));
    if (!d || *d < 0 || *d > 1'000'000) {
      throw Error(ErrorCode::kParseError, ctx + "bad diagnosis_offset_days '" + f[kOffset] + "'");
    }
    m.offset = static_cast<int>(*d);
  }
  return m;
}

std::string format_bool(const std::optional<bool>& b) {
  if (!b) return "NA";
  return *b ? "1" : "0";
}

}  // namespace

CohortManifest load_manifest(const fs::path& path, const ManifestOptions& options) {
  const auto lines = detail::read_lines(path);
  if (lines.empty()) throw Error(ErrorCode::kParseError, path.string() + ": empty manifest");

  const auto header = detail::split_csv_line(lines[0]);
  std::array<std::size_t, kColumns.size()> index{};
  for (std::size_t c = 0; c < kColumns.size(); ++c) {
    const auto it = std::find_if(header.begin(), header.end(), [&](const std::string& h) {
      return detail::to_lower(detail::trim(h)) == kColumns[c];
    });
    if (it == header.end()) {
      throw Error(ErrorCode::kParseError,
                  path.string() + ": header lacks column '" + std::string(kColumns[c]) + "'");
    }
    index[c] = static_cast<std::size_t>(it - header.begin());
  }

  const fs::path base = path.parent_path();
  CohortManifest manifest;
  manifest.provenance = "manifest:" + path.string();
  std::unordered_map<std::string, std::size_t> by_id;
  std::vector<RowMeta> metas;

  for (std::size_t ln = 1; ln < lines.size(); ++ln) {
    if (detail::trim(lines[ln]).empty()) continue;
    const std::string ctx = where(path, ln + 1);
    const auto raw = detail::split_csv_line(lines[ln]);
    if (raw.size() != header.size()) {
      throw Error(ErrorCode::kParseError, ctx + "expected " + std::to_string(header.size()) +
                                              " fields, got " + std::to_string(raw.size()));
    }
    std::vector<std::string> f(kColumns.size());
    for (std::size_t c = 0; c < kColumns.size(); ++c) f[c] = raw[index[c]];

    const std::string id = detail::trim(f[kSubject]);
    if (id.empty()) throw Error(ErrorCode::kParseError, ctx + "empty subject_id");
    const auto type = parse_audio_type(detail::trim(f[kType]));
    if (!type) throw Error(ErrorCode::kParseError, ctx + "unknown audio_type '" + f[kType] + "'");
    const RowMeta meta = parse_meta(f, ctx);

    fs::path rec = detail::trim(f[kPath]);
    if (rec.empty()) throw Error(ErrorCode::kParseError, ctx + "empty recording_path");
    if (rec.is_relative()) rec = base / rec;
    if (options.check_files && !fs::exists(rec)) {
      throw Error(ErrorCode::kMissingFile, ctx + "recording not found: " + rec.string());
    }

    auto [it, inserted] = by_id.try_emplace(id, manifest.subjects.size());
    if (inserted) {
      SubjectRecord s;
      s.subject_id = id;
      s.label = meta.label;
      s.age = meta.age;
      s.gender = meta.gender;
      s.symptoms = meta.symptoms;
      s.asthma = meta.asthma;
      s.smoker = meta.smoker;
      s.diagnosis_offset_days = meta.offset;
      manifest.subjects.push_back(std::move(s));
      metas.push_back(meta);
    } else if (!(metas[it->second] == meta)) {
      throw Error(ErrorCode::kConflictingMetadata,
                  ctx + "metadata for subject '" + id + "' differs from an earlier row");
    }
    auto& subject = manifest.subjects[it->second];
    if (!subject.recordings.emplace(*type, rec).second) {
      throw Error(ErrorCode::kDuplicateRecording,
                  ctx + "subject '" + id + "' lists " + std::string(audio_type_name(*type)) + " twice");
    }
  }
  return manifest;
}

void write_manifest(const fs::path& path, const CohortManifest& manifest) {
  const fs::path base = path.parent_path();
  std::string out;
  for (std::size_t c = 0; c < kColumns.size(); ++c) {
    if (c) out += ',';
    out += kColumns[c];
  }
  out += '\n';
  for (const auto& s : manifest.subjects) {
    std::string symptoms;
    for (const auto& t : s.symptoms) symptoms += (symptoms.empty() ? "" : ";") + t;
    if (symptoms.empty()) symptoms = "none";
    const std::string gender =
        s.gender == Gender::kMale ? "M" : (s.gender == Gender::kFemale ? "F" : "NA");
    const std::string age = s.age ? detail::format_double(*s.age) : "NA";
    const std::string offset =
        s.diagnosis_offset_days ? std::to_string(*s.diagnosis_offset_days) : "NA";
    for (const auto& [type, rec] : s.recordings) {
      fs::path shown = rec;
      if (!base.empty()) {
        const fs::path rel = rec.lexically_relative(base);
        if (!rel.empty() && *rel.begin() != "..") shown = rel;
      }
      out += detail::csv_escape(s.subject_id) + ',' +
             (s.label == Label::kPositive ? "positive" : "negative") + ',' +
             std::string(audio_type_name(type)) + ',' + detail::csv_escape(shown.generic_string()) +
             ',' + age + ',' + gender + ',' + detail::csv_escape(symptoms) + ',' +
             format_bool(s.asthma) + ',' + format_bool(s.smoker) + ',' + offset + '\n';
    }
  }
  detail::write_text(path, out);
}

std::size_t FoldAssignment::fold_of(const std::string& subject_id) const {
  const auto it = std::find(subject_ids.begin(), subject_ids.end(), subject_id);
  if (it == subject_ids.end()) {
    throw Error(ErrorCode::kInvalidArgument, "subject '" + subject_id + "' has no fold");
  }
  return fold[static_cast<std::size_t>(it - subject_ids.begin())];
}

std::vector<std::size_t> FoldAssignment::members(std::size_t f) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < fold.size(); ++i) {
    if (fold[i] == f) out.push_back(i);
  }
  return out;
}

FoldAssignment speaker_disjoint_folds(std::span<const SubjectKey> subjects, std::size_t k,
                                      std::uint64_t seed) {
  if (k < 2) throw Error(ErrorCode::kInvalidArgument, "k must be >= 2");
  std::set<std::string> seen;
  std::vector<std::size_t> positives, negatives;
  for (std::size_t i = 0; i < subjects.size(); ++i) {
    if (!seen.insert(subjects[i].subject_id).second) {
      throw Error(ErrorCode::kDuplicateId, "subject '" + subjects[i].subject_id + "' listed twice");
    }
    (subjects[i].label == Label::kPositive ? positives : negatives).push_back(i);
  }
  if (positives.size() < k || negatives.size() < k) {
    throw Error(ErrorCode::kTooFewSubjects,
                std::to_string(positives.size()) + " positive and " +
                    std::to_string(negatives.size()) + " negative subjects cannot fill " +
                    std::to_string(k) + " folds");
  }

  FoldAssignment out;
  out.k = k;
  out.fold.assign(subjects.size(), 0);
  for (const auto& s : subjects) out.subject_ids.push_back(s.subject_id);

  Rng rng(seed);
  std::size_t next = 0;
  for (auto* group : {&positives, &negatives}) {
    // Fisher-Yates with the portable generator.
    for (std::size_t i = group->size(); i > 1; --i) {
      std::swap((*group)[i - 1], (*group)[rng.below(i)]);
    }
    for (std::size_t idx : *group) {
      out.fold[idx] = next;
      next = (next + 1) % k;
    }
  }
  return out;
}

FoldAssignment speaker_disjoint_folds(const CohortManifest& manifest, std::size_t k,
                                      std::uint64_t seed) {
  std::vector<SubjectKey> keys;
  keys.reserve(manifest.subjects.size());
  for (const auto& s : manifest.subjects) keys.push_back({s.subject_id, s.label});
  return speaker_disjoint_folds(keys, k, seed);
}

}  // namespace vocalscreen
