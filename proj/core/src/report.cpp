#include <string>

#include "json.hpp"

#include "text_io.hpp"
#include "vocalscreen/error.hpp"
#include "vocalscreen/evaluation.hpp"

namespace vocalscreen {

using nlohmann::ordered_json;

namespace {

ordered_json optional_number(const std::optional<double>& v) {
  return v ? ordered_json(*v) : ordered_json(nullptr);
}

std::string csv_optional(const std::optional<double>& v) {
  return v ? detail::format_double(*v) : "NA";
}

}  // namespace

std::string report_to_json(const EvalReport& r) {
  ordered_json roc = ordered_json::array();
  for (const auto& p : r.roc) roc.push_back({p.fpr, p.tpr, p.threshold});

  ordered_json subjects = ordered_json::array();
  for (const auto& s : r.subjects) {
    subjects.push_back({{"subject_id", s.subject_id},
                        {"label", s.label},
                        {"fold", s.fold},
                        {"n_recordings", s.n_recordings},
                        {"score", s.score}});
  }

  ordered_json subgroups = ordered_json::array();
  for (const auto& g : r.subgroups) {
    subgroups.push_back({{"name", g.name},
                         {"members", g.members},
                         {"support", g.support},
                         {"recall", optional_number(g.recall)}});
  }

  ordered_json importances = ordered_json::array();
  for (const auto& fi : r.importances) {
    importances.push_back({{"feature", fi.name}, {"index", fi.index}, {"importance", fi.importance}});
  }

  ordered_json params = ordered_json::object();
  for (const auto& [name, value] : r.params) params[name] = value;

  const ordered_json doc = {
      {"analysis", r.analysis},
      {"config_fingerprint", r.config_fingerprint},
      {"classifier", classifier_kind_name(r.kind)},
      {"params", std::move(params)},
      {"k", r.k},
      {"seed", r.seed},
      {"schema_fingerprint", r.schema_fingerprint},
      {"n_features", r.n_features},
      {"n_rows", r.n_rows},
      {"n_subjects", r.subjects.size()},
      {"pooled_auc", r.pooled_auc},
      {"fold_auc", r.fold_auc},
      {"operating_points",
       {{"operating_fpr", r.operating_fpr},
        {"threshold", r.operating.threshold},
        {"precision_at_recall_0.5", r.operating.precision_at_recall_50},
        {"recall_at_fpr_0.1", r.operating.recall_at_fpr_10},
        {"precision_at_fpr_0.1", optional_number(r.operating.precision_at_fpr_10)},
        {"recall_at_fpr_0.01", r.operating.recall_at_fpr_01},
        {"precision_at_fpr_0.01", optional_number(r.operating.precision_at_fpr_01)}}},
      {"roc_points", std::move(roc)},
      {"subgroups", std::move(subgroups)},
      {"importances", std::move(importances)},
      {"subjects", std::move(subjects)}};
  return doc.dump(2) + "\n";
}

void write_report(const std::filesystem::path& dir, const EvalReport& r) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::kIoWriteFailure, "cannot create " + dir.string() + ": " + ec.message());

  detail::write_text(dir / "report.json", report_to_json(r));

  std::string roc = "fpr,tpr,threshold\n";
  for (const auto& p : r.roc) {
    roc += detail::format_double(p.fpr) + ',' + detail::format_double(p.tpr) + ',' +
           detail::format_double(p.threshold) + '\n';
  }
  detail::write_text(dir / "roc_points.csv", roc);

  std::string pr = "recall,precision,threshold\n";
  for (const auto& p : r.pr) {
    pr += detail::format_double(p.recall) + ',' + detail::format_double(p.precision) + ',' +
          detail::format_double(p.threshold) + '\n';
  }
  detail::write_text(dir / "pr_points.csv", pr);

  std::string groups = "subgroup,members,support,recall\n";
  for (const auto& g : r.subgroups) {
    groups += detail::csv_escape(g.name) + ',' + std::to_string(g.members) + ',' +
              std::to_string(g.support) + ',' + csv_optional(g.recall) + '\n';
  }
  detail::write_text(dir / "subgroups.csv", groups);

  std::string imp = "rank,feature,importance\n";
  for (std::size_t i = 0; i < r.importances.size(); ++i) {
    imp += std::to_string(i + 1) + ',' + detail::csv_escape(r.importances[i].name) + ',' +
           detail::format_double(r.importances[i].importance) + '\n';
  }
  detail::write_text(dir / "importances.csv", imp);
}

}  // namespace vocalscreen
