#include "vocalscreen/evaluation.hpp"

#include <algorithm>
#include <numeric>
#include <set>
#include <sstream>
#include <unordered_map>

#include "json.hpp"

#include "text_io.hpp"
#include "vocalscreen/error.hpp"
#include "vocalscreen/parallel.hpp"
#include "vocalscreen/random.hpp"

namespace vocalscreen {

namespace fs = std::filesystem;

FeatureMatrix FeatureMatrix::restricted_to(AudioType type) const {
  FeatureMatrix out;
  out.schema = schema;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].audio_type == type) {
      out.x.append_row(x.row(r));
      out.rows.push_back(rows[r]);
    }
  }
  if (out.rows.empty()) out.x = Matrix(0, x.cols());
  return out;
}

namespace {

struct PendingRecording {
  std::size_t subject;
  AudioType type;
  fs::path path;
  std::string id;
};

std::vector<PendingRecording> list_recordings(const CohortManifest& manifest) {
  std::vector<PendingRecording> out;
  std::set<std::string> seen;
  for (std::size_t s = 0; s < manifest.subjects.size(); ++s) {
    for (const auto& [type, path] : manifest.subjects[s].recordings) {
      std::string id = path.stem().string();
      if (!seen.insert(id).second) {
        throw Error(ErrorCode::kDuplicateId,
                    "recording id '" + id + "' (file stem) is used by two recordings");
      }
      out.push_back({s, type, path, std::move(id)});
    }
  }
  return out;
}

}  // namespace

FeatureMatrix extract_features(const CohortManifest& manifest, const ExtractOptions& options) {
  const auto recordings = list_recordings(manifest);
  const auto custom = custom_feature_schema(options.features);

  FeatureMatrix out;
  if (options.embeddings.empty()) {
    out.schema = custom;
  } else {
    std::vector<std::pair<std::string, const FeatureSchema*>> parts{{"custom", custom.get()}};
    for (const auto& e : options.embeddings) {
      parts.emplace_back(e.source_label(), e.schema().get());
    }
    out.schema = fused_schema(parts);
  }

  std::vector<std::shared_ptr<const FeatureSchema>> embedding_schemas;
  for (const auto& e : options.embeddings) embedding_schemas.push_back(e.schema());

  out.x = Matrix(recordings.size(), out.schema->dimension());
  parallel_for(recordings.size(), options.jobs, [&](std::size_t i) {
    const auto& rec = recordings[i];
    const AudioClip clip = load_wav(rec.path, rec.type);
    const auto features = build_custom_features(clip, options.features);
    auto dest = out.x.row(i);
    if (options.embeddings.empty()) {
      std::copy(features.values.begin(), features.values.end(), dest.begin());
      return;
    }
    std::vector<FeaturePart> parts{{"custom", custom.get(), features.values}};
    for (std::size_t e = 0; e < options.embeddings.size(); ++e) {
      parts.push_back({options.embeddings[e].source_label(), embedding_schemas[e].get(),
                       options.embeddings[e].at(rec.id)});
    }
    const auto fused = fuse_features(parts);
    std::copy(fused.values.begin(), fused.values.end(), dest.begin());
  });

  for (const auto& rec : recordings) out.rows.push_back({rec.subject, rec.type, rec.id});
  return out;
}

FeatureTable to_feature_table(const FeatureMatrix& matrix) {
  FeatureTable table;
  table.schema = matrix.schema;
  table.values = matrix.x;
  for (const auto& r : matrix.rows) table.recording_ids.push_back(r.recording_id);
  return table;
}

FeatureMatrix features_from_table(const CohortManifest& manifest, const FeatureTable& table) {
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < table.recording_ids.size(); ++i) {
    index.emplace(table.recording_ids[i], i);
  }
  FeatureMatrix out;
  out.schema = table.schema;
  out.x = Matrix(0, table.values.cols());
  for (const auto& rec : list_recordings(manifest)) {
    const auto it = index.find(rec.id);
    if (it == index.end()) {
      throw Error(ErrorCode::kInvalidArgument,
                  "feature cache has no row for recording '" + rec.id + "'");
    }
    out.x.append_row(table.values.row(it->second));
    out.rows.push_back({rec.subject, rec.type, rec.id});
  }
  return out;
}

FoldRun run_folds(const Matrix& x, std::span<const std::size_t> row_subject,
                  std::span<const int> subject_label, std::span<const std::string> subject_ids,
                  const CvOptions& options) {
  if (row_subject.size() != x.rows()) {
    throw Error(ErrorCode::kDimensionMismatch, "row/subject map does not match the matrix");
  }
  const std::size_t n_subjects = subject_label.size();
  std::vector<std::size_t> rows_per_subject(n_subjects, 0);
  for (std::size_t s : row_subject) {
    if (s >= n_subjects) throw Error(ErrorCode::kInvalidArgument, "row refers to unknown subject");
    ++rows_per_subject[s];
  }

  FoldRun run;
  std::vector<std::size_t> position(n_subjects, n_subjects);
  std::vector<SubjectKey> keys;
  for (std::size_t s = 0; s < n_subjects; ++s) {
    if (rows_per_subject[s] == 0) continue;
    position[s] = run.subjects.size();
    run.subjects.push_back(s);
    run.labels.push_back(subject_label[s]);
    run.n_recordings.push_back(rows_per_subject[s]);
    keys.push_back({subject_ids[s], subject_label[s] == 1 ? Label::kPositive : Label::kNegative});
  }
  run.folds = speaker_disjoint_folds(keys, options.k, options.seed);

  std::vector<double> row_score(x.rows(), 0.0);
  run.models.resize(options.k);
  auto fit_fold = [&](std::size_t f, std::size_t train_jobs) {
    Matrix train(0, x.cols());
    std::vector<int> y;
    std::vector<std::size_t> test_rows;
    for (std::size_t r = 0; r < x.rows(); ++r) {
      const std::size_t p = position[row_subject[r]];
      if (run.folds.fold[p] == f) {
        test_rows.push_back(r);
      } else {
        train.append_row(x.row(r));
        y.push_back(run.labels[p]);
      }
    }
    run.models[f] = train_classifier(options.kind, options.params, train, y,
                                     derive_seed(options.seed, {f}), train_jobs);
    for (std::size_t r : test_rows) row_score[r] = score(run.models[f], x.row(r));
  };

  // A forest parallelises over its trees; the other models over folds.
  if (options.kind == ClassifierKind::kRandomForest) {
    for (std::size_t f = 0; f < options.k; ++f) fit_fold(f, options.jobs);
  } else {
    parallel_for(options.k, options.jobs, [&](std::size_t f) { fit_fold(f, 1); });
  }

  std::vector<std::vector<double>> per_subject(run.subjects.size());
  for (std::size_t r = 0; r < x.rows(); ++r) {
    per_subject[position[row_subject[r]]].push_back(row_score[r]);
  }
  for (const auto& scores : per_subject) run.scores.push_back(aggregate_subject_scores(scores));
  return run;
}

std::vector<Subgroup> default_subgroups(const CohortManifest& manifest) {
  std::vector<Subgroup> out;
  out.push_back({"all", [](const SubjectRecord&) { return true; }});
  out.push_back({"age<=30", [](const SubjectRecord& s) { return s.age && *s.age <= 30.0; }});
  out.push_back({"age30-40",
                 [](const SubjectRecord& s) { return s.age && *s.age > 30.0 && *s.age <= 40.0; }});
  out.push_back({"age>40", [](const SubjectRecord& s) { return s.age && *s.age > 40.0; }});
  out.push_back({"age_missing", [](const SubjectRecord& s) { return !s.age; }});
  for (const auto& token : manifest.symptom_vocabulary()) {
    out.push_back({"symptom:" + token,
                   [token](const SubjectRecord& s) { return s.symptoms.contains(token); }});
  }
  out.push_back({"asthma", [](const SubjectRecord& s) { return s.asthma.value_or(false); }});
  out.push_back({"smoker", [](const SubjectRecord& s) { return s.smoker.value_or(false); }});
  out.push_back({"diag<=7", [](const SubjectRecord& s) {
                   return s.diagnosis_offset_days && *s.diagnosis_offset_days <= 7;
                 }});
  out.push_back({"diag7-14", [](const SubjectRecord& s) {
                   return s.diagnosis_offset_days && *s.diagnosis_offset_days > 7 &&
                          *s.diagnosis_offset_days <= 14;
                 }});
  out.push_back({"diag>14", [](const SubjectRecord& s) {
                   return s.diagnosis_offset_days && *s.diagnosis_offset_days > 14;
                 }});
  out.push_back({"diag_unknown", [](const SubjectRecord& s) { return !s.diagnosis_offset_days; }});
  return out;
}

SubgroupMetric recall_within_subgroup(std::string name, std::span<const double> scores,
                                      std::span<const int> labels,
                                      const std::vector<bool>& members, double threshold) {
  if (scores.size() != labels.size() || scores.size() != members.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "subgroup inputs differ in length");
  }
  SubgroupMetric m;
  m.name = std::move(name);
  std::size_t hits = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (!members[i]) continue;
    ++m.members;
    if (labels[i] != 1) continue;
    ++m.support;
    if (scores[i] >= threshold) ++hits;
  }
  if (m.support > 0) {
    m.recall = static_cast<double>(hits) / static_cast<double>(m.support);
  }
  return m;
}

namespace {

std::vector<FeatureImportance> averaged_importances(const FoldRun& run, const FeatureSchema& schema,
                                                    std::size_t top) {
  std::vector<double> total(schema.dimension(), 0.0);
  const auto names = schema.names();
  for (const auto& model : run.models) {
    const auto* forest = std::get_if<RandomForestModel>(&model);
    if (forest == nullptr) return {};
    for (const auto& fi : rf_feature_importance(*forest, names)) total[fi.index] += fi.importance;
  }
  const double sum = std::accumulate(total.begin(), total.end(), 0.0);
  std::vector<FeatureImportance> out;
  for (std::size_t i = 0; i < total.size(); ++i) {
    out.push_back({i, names[i], sum > 0.0 ? total[i] / sum : 0.0});
  }
  std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    return a.importance > b.importance;
  });
  if (out.size() > top) out.resize(top);
  return out;
}

std::string config_fingerprint(const EvalReport& r, const CvOptions& options) {
  nlohmann::json j = {{"analysis", r.analysis},
                      {"classifier", classifier_kind_name(r.kind)},
                      {"params", r.params},
                      {"k", r.k},
                      {"seed", r.seed},
                      {"operating_fpr", r.operating_fpr},
                      {"top_importances", options.top_importances},
                      {"schema_fingerprint", r.schema_fingerprint}};
  return detail::fnv1a_hex(j.dump());
}

}  // namespace

EvalReport cross_validate(const CohortManifest& manifest, const FeatureMatrix& features,
                          const CvOptions& options, std::string analysis) {
  if (features.rows.size() != features.x.rows()) {
    throw Error(ErrorCode::kDimensionMismatch, "feature rows and matrix disagree");
  }
  std::vector<std::size_t> row_subject;
  for (const auto& r : features.rows) row_subject.push_back(r.subject);
  std::vector<int> subject_label;
  std::vector<std::string> subject_ids;
  for (const auto& s : manifest.subjects) {
    subject_label.push_back(label_value(s.label));
    subject_ids.push_back(s.subject_id);
  }

  const FoldRun run = run_folds(features.x, row_subject, subject_label, subject_ids, options);

  EvalReport report;
  report.analysis = std::move(analysis);
  report.kind = options.kind;
  report.params = options.params.describe(options.kind);
  report.k = options.k;
  report.seed = options.seed;
  report.operating_fpr = options.operating_fpr;
  report.schema_fingerprint = features.schema->fingerprint();
  report.n_features = features.schema->dimension();
  report.n_rows = features.x.rows();

  for (std::size_t f = 0; f < options.k; ++f) {
    std::vector<double> s;
    std::vector<int> l;
    for (std::size_t i : run.folds.members(f)) {
      s.push_back(run.scores[i]);
      l.push_back(run.labels[i]);
    }
    report.fold_auc.push_back(auc(s, l));
  }
  report.pooled_auc = auc(run.scores, run.labels);
  report.roc = roc_points(run.scores, run.labels);
  report.pr = pr_points(run.scores, run.labels);

  const auto chosen = operating_point_at_fpr(run.scores, run.labels, options.operating_fpr);
  const auto at10 = operating_point_at_fpr(run.scores, run.labels, 0.1);
  const auto at01 = operating_point_at_fpr(run.scores, run.labels, 0.01);
  report.operating.threshold = chosen.threshold;
  report.operating.precision_at_recall_50 = precision_at_recall(run.scores, run.labels, 0.5);
  report.operating.recall_at_fpr_10 = at10.recall;
  report.operating.recall_at_fpr_01 = at01.recall;
  report.operating.precision_at_fpr_10 = at10.precision;
  report.operating.precision_at_fpr_01 = at01.precision;

  for (std::size_t i = 0; i < run.subjects.size(); ++i) {
    report.subjects.push_back({subject_ids[run.subjects[i]], run.labels[i], run.folds.fold[i],
                               run.n_recordings[i], run.scores[i]});
  }

  for (const auto& group : default_subgroups(manifest)) {
    std::vector<bool> members;
    for (std::size_t s : run.subjects) members.push_back(group.contains(manifest.subjects[s]));
    report.subgroups.push_back(
        recall_within_subgroup(group.name, run.scores, run.labels, members, chosen.threshold));
  }

  report.importances = averaged_importances(run, *features.schema, options.top_importances);
  report.config_fingerprint = config_fingerprint(report, options);

  if (options.log != nullptr) {
    for (std::size_t f = 0; f < options.k; ++f) {
      *options.log << report.analysis << " fold " << (f + 1) << "/" << options.k
                   << ": subjects=" << run.folds.members(f).size()
                   << " auc=" << detail::format_double(report.fold_auc[f]) << "\n";
    }
    *options.log << report.analysis << " pooled auc=" << detail::format_double(report.pooled_auc)
                 << "\n";
  }
  return report;
}

EvalReport cross_validate(const CohortManifest& manifest, const ExtractOptions& extract,
                          const CvOptions& options) {
  return cross_validate(manifest, extract_features(manifest, extract), options);
}

std::map<AudioType, EvalReport> per_audio_type_eval(const CohortManifest& manifest,
                                                     const FeatureMatrix& features,
                                                     const CvOptions& options) {
  std::set<AudioType> present;
  for (const auto& r : features.rows) {
    if (r.audio_type) present.insert(*r.audio_type);
  }
  std::map<AudioType, EvalReport> out;
  for (AudioType type : present) {
    out.emplace(type, cross_validate(manifest, features.restricted_to(type), options,
                                     "per-type:" + std::string(audio_type_name(type))));
  }
  return out;
}

FeatureMatrix symptom_features(const CohortManifest& manifest) {
  const auto vocabulary = manifest.symptom_vocabulary();
  std::vector<FeatureName> names;
  for (const auto& token : vocabulary) names.push_back({"symptom:" + token, FeatureSource::kExternal});
  names.push_back({"asthma", FeatureSource::kExternal});
  names.push_back({"smoker", FeatureSource::kExternal});

  FeatureMatrix out;
  out.schema = std::make_shared<const FeatureSchema>(std::move(names));
  out.x = Matrix(manifest.subjects.size(), out.schema->dimension());
  for (std::size_t s = 0; s < manifest.subjects.size(); ++s) {
    const auto& subject = manifest.subjects[s];
    for (std::size_t t = 0; t < vocabulary.size(); ++t) {
      out.x(s, t) = subject.symptoms.contains(vocabulary[t]) ? 1.0 : 0.0;
    }
    out.x(s, vocabulary.size()) = subject.asthma.value_or(false) ? 1.0 : 0.0;
    out.x(s, vocabulary.size() + 1) = subject.smoker.value_or(false) ? 1.0 : 0.0;
    out.rows.push_back({s, std::nullopt, subject.subject_id});
  }
  return out;
}

EvalReport symptom_only_baseline(const CohortManifest& manifest, const CvOptions& options) {
  CvOptions rf = options;
  rf.kind = ClassifierKind::kRandomForest;
  rf.params = ClassifierParams{};
  return cross_validate(manifest, symptom_features(manifest), rf, "symptom-baseline");
}

}  // namespace vocalscreen
