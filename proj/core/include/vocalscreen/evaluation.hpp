#ifndef VOCALSCREEN_EVALUATION_HPP_
#define VOCALSCREEN_EVALUATION_HPP_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "vocalscreen/classifier.hpp"
#include "vocalscreen/cohort.hpp"
#include "vocalscreen/features.hpp"
#include "vocalscreen/metrics.hpp"

namespace vocalscreen {

// ---------------------------------------------------------------------------
// Feature matrices over a cohort

struct RecordingRow {
  std::size_t subject;  // index into CohortManifest::subjects
  std::optional<AudioType> audio_type;
  std::string recording_id;
};

// One row per recording (or per subject for metadata-only baselines).
struct FeatureMatrix {
  std::shared_ptr<const FeatureSchema> schema;
  Matrix x;
  std::vector<RecordingRow> rows;

  // Rows whose audio type is `type`.
  FeatureMatrix restricted_to(AudioType type) const;
};

struct ExtractOptions {
  FeatureConfig features;
  // Extra per-recording vectors keyed by recording id (file stem). With any
  // embedding present, columns are named "custom:<name>" and
  // "<label>:<name>".
  std::vector<ExternalEmbeddingTable> embeddings;
  std::size_t jobs = 1;
};

// Decodes every recording and builds its feature row, in manifest order.
// Throws DUPLICATE_ID when two recordings share a file stem.
FeatureMatrix extract_features(const CohortManifest& manifest, const ExtractOptions& options);

FeatureTable to_feature_table(const FeatureMatrix& matrix);
// Looks each manifest recording up in a cached table by recording id.
FeatureMatrix features_from_table(const CohortManifest& manifest, const FeatureTable& table);

// ---------------------------------------------------------------------------
// Cross-validation

struct CvOptions {
  ClassifierKind kind = ClassifierKind::kRandomForest;
  ClassifierParams params;
  std::size_t k = 5;
  std::uint64_t seed = 42;
  std::size_t jobs = 1;
  std::size_t top_importances = 40;
  double operating_fpr = 0.1;
  // One line per fold when set.
  std::ostream* log = nullptr;
};

// Held-out subject-level scores of one k-fold run.
struct FoldRun {
  FoldAssignment folds;
  std::vector<std::size_t> subjects;  // participating subject indices
  std::vector<int> labels;            // per participating subject
  std::vector<double> scores;         // fused held-out score per subject
  std::vector<std::size_t> n_recordings;
  std::vector<TrainedModel> models;   // one per fold
};

// Trains on out-of-fold recordings (subject label broadcast to each row),
// scores in-fold recordings and averages them per subject. Only subjects
// with at least one row take part. Model seed for fold f is derived from
// (seed, f).
FoldRun run_folds(const Matrix& x, std::span<const std::size_t> row_subject,
                  std::span<const int> subject_label, std::span<const std::string> subject_ids,
                  const CvOptions& options);

struct SubjectScore {
  std::string subject_id;
  int label;
  std::size_t fold;
  std::size_t n_recordings;
  double score;
};

struct SubgroupMetric {
  std::string name;
  std::size_t members = 0;
  std::size_t support = 0;  // positive members
  std::optional<double> recall;  // nullopt (N/A) when support is 0
};

struct OperatingPoints {
  double threshold = 0.0;  // chosen at fpr <= operating_fpr
  double precision_at_recall_50 = 0.0;
  double recall_at_fpr_10 = 0.0;
  double recall_at_fpr_01 = 0.0;
  std::optional<double> precision_at_fpr_10;
  std::optional<double> precision_at_fpr_01;
};

struct EvalReport {
  std::string analysis;  // "cv", "symptom-baseline", "per-type:<TYPE>"
  ClassifierKind kind = ClassifierKind::kRandomForest;
  std::map<std::string, double> params;
  std::size_t k = 0;
  std::uint64_t seed = 0;
  double operating_fpr = 0.1;
  std::string schema_fingerprint;
  std::size_t n_features = 0;
  std::size_t n_rows = 0;

  std::vector<double> fold_auc;
  double pooled_auc = 0.0;
  std::vector<RocPoint> roc;
  std::vector<PrPoint> pr;
  OperatingPoints operating;
  std::vector<SubjectScore> subjects;
  std::vector<SubgroupMetric> subgroups;
  std::vector<FeatureImportance> importances;  // random forest only
  std::string config_fingerprint;
};

struct Subgroup {
  std::string name;
  std::function<bool(const SubjectRecord&)> contains;
};

// Age bands, each symptom in the cohort's vocabulary, asthma, smoker,
// diagnosis-offset bands and "all". MISSING values only fall into the
// explicit missing/unknown groups.
std::vector<Subgroup> default_subgroups(const CohortManifest& manifest);

// Recall over positive subjects in `members` predicted positive (score >=
// threshold).
SubgroupMetric recall_within_subgroup(std::string name, std::span<const double> scores,
                                      std::span<const int> labels,
                                      const std::vector<bool>& members, double threshold);

EvalReport cross_validate(const CohortManifest& manifest, const FeatureMatrix& features,
                          const CvOptions& options, std::string analysis = "cv");
EvalReport cross_validate(const CohortManifest& manifest, const ExtractOptions& extract,
                          const CvOptions& options);

// One report per audio type present, each restricted to that type's rows.
std::map<AudioType, EvalReport> per_audio_type_eval(const CohortManifest& manifest,
                                                     const FeatureMatrix& features,
                                                     const CvOptions& options);

// Binary symptom indicators plus asthma and smoker (MISSING -> 0), one row
// per subject. Reads no audio. Always a default random forest.
FeatureMatrix symptom_features(const CohortManifest& manifest);
EvalReport symptom_only_baseline(const CohortManifest& manifest, const CvOptions& options);

// ---------------------------------------------------------------------------
// Report output

std::string report_to_json(const EvalReport& report);
// report.json, roc_points.csv, pr_points.csv, subgroups.csv, importances.csv.
void write_report(const std::filesystem::path& dir, const EvalReport& report);

}  // namespace vocalscreen

#endif  // VOCALSCREEN_EVALUATION_HPP_
