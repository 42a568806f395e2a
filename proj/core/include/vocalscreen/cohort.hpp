#ifndef VOCALSCREEN_COHORT_HPP_
#define VOCALSCREEN_COHORT_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "vocalscreen/audio_io.hpp"

namespace vocalscreen {

enum class Label { kNegative, kPositive };
enum class Gender { kMale, kFemale, kMissing };

inline int label_value(Label l) { return l == Label::kPositive ? 1 : 0; }

struct SubjectRecord {
  std::string subject_id;
  Label label = Label::kNegative;
  std::map<AudioType, std::filesystem::path> recordings;
  std::optional<double> age;
  Gender gender = Gender::kMissing;
  std::set<std::string> symptoms;  // lower-case tokens
  std::optional<bool> asthma;
  std::optional<bool> smoker;
  std::optional<int> diagnosis_offset_days;
};

struct CohortManifest {
  std::vector<SubjectRecord> subjects;
  std::string provenance;

  // Sorted union of all symptom tokens.
  std::vector<std::string> symptom_vocabulary() const;
  std::size_t count(Label label) const;
};

struct ManifestOptions {
  // MISSING_FILE when a referenced recording does not exist.
  bool check_files = true;
};

// CSV with header
//   subject_id,label,audio_type,recording_path,age,gender,symptoms,asthma,
//   smoker,diagnosis_offset_days
// one row per recording. Relative recording paths resolve against the
// manifest's directory. Empty, NA, N/A, missing and unknown mark MISSING.
CohortManifest load_manifest(const std::filesystem::path& path, const ManifestOptions& options = {});

// Writes the same schema; recording paths are written relative to the
// manifest's directory when they lie below it.
void write_manifest(const std::filesystem::path& path, const CohortManifest& manifest);

struct SubjectKey {
  std::string subject_id;
  Label label;
};

// Speaker-disjoint, class-stratified k-fold partition of subjects.
struct FoldAssignment {
  std::size_t k = 0;
  std::vector<std::string> subject_ids;  // input order
  std::vector<std::size_t> fold;         // fold[i] for subject_ids[i]

  std::size_t fold_of(const std::string& subject_id) const;
  std::vector<std::size_t> members(std::size_t f) const;
};

// Shuffles each class with a seeded RNG and deals subjects round-robin, the
// dealing position carrying over from positives to negatives, so fold sizes
// differ by at most one overall and per class. Throws INVALID_ARGUMENT for
// k < 2 and TOO_FEW_SUBJECTS when a class has fewer than k subjects.
FoldAssignment speaker_disjoint_folds(std::span<const SubjectKey> subjects, std::size_t k,
                                      std::uint64_t seed);
FoldAssignment speaker_disjoint_folds(const CohortManifest& manifest, std::size_t k,
                                      std::uint64_t seed);

}  // namespace vocalscreen

#endif  // VOCALSCREEN_COHORT_HPP_
