#include "vocalscreen/grid_search.hpp"

#include "json.hpp"

#include "text_io.hpp"
#include "vocalscreen/error.hpp"

namespace vocalscreen {

std::size_t ParamGrid::size() const {
  if (axes.empty()) return 0;
  std::size_t n = 1;
  for (const auto& [name, values] : axes) n *= values.size();
  return n;
}

std::vector<std::pair<std::string, double>> ParamGrid::cell(std::size_t i) const {
  std::vector<std::pair<std::string, double>> out(axes.size());
  for (std::size_t a = axes.size(); a-- > 0;) {
    const auto& values = axes[a].second;
    out[a] = {axes[a].first, values[i % values.size()]};
    i /= values.size();
  }
  return out;
}

ParamGrid default_grid(ClassifierKind kind) {
  switch (kind) {
    case ClassifierKind::kRandomForest:
      return {{{"n_trees", {100, 300}}, {"min_samples_leaf", {1, 5}}}};
    case ClassifierKind::kLogisticRegression:
      return {{{"l2_lambda", {0.01, 0.1, 1.0, 10.0}}}};
    case ClassifierKind::kSvmRbf:
      return {{{"C", {0.1, 1.0, 10.0}}, {"gamma", {0.0, 0.001, 0.01}}}};
  }
  return {};
}

ParamGrid parse_grid(std::string_view json_text) {
  nlohmann::ordered_json doc;
  try {
    doc = nlohmann::ordered_json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParseError, std::string("grid JSON: ") + e.what());
  }
  if (!doc.is_object() || doc.empty()) {
    throw Error(ErrorCode::kParseError, "grid must be a non-empty object of name -> [values]");
  }
  ParamGrid grid;
  ClassifierParams probe;
  for (const auto& [name, values] : doc.items()) {
    if (!values.is_array() || values.empty()) {
      throw Error(ErrorCode::kParseError, "grid axis '" + name + "' must be a non-empty list");
    }
    std::vector<double> axis;
    for (const auto& v : values) {
      if (!v.is_number()) throw Error(ErrorCode::kParseError, "grid axis '" + name + "' holds a non-number");
      axis.push_back(v.get<double>());
      probe.set(name, axis.back());  // validates name and value
    }
    grid.axes.emplace_back(name, std::move(axis));
  }
  return grid;
}

ParamGrid load_grid(const std::filesystem::path& path) {
  std::string text;
  for (const auto& line : detail::read_lines(path)) text += line + "\n";
  return parse_grid(text);
}

GridResult grid_search(ClassifierKind kind, const ParamGrid& grid, const ClassifierParams& base,
                       const Matrix& x, std::span<const std::size_t> row_subject,
                       std::span<const int> subject_label,
                       std::span<const std::string> subject_ids, std::size_t k,
                       std::uint64_t seed, std::size_t jobs) {
  if (grid.size() == 0) throw Error(ErrorCode::kInvalidArgument, "grid has no cells");
  GridResult result;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    CvOptions options;
    options.kind = kind;
    options.params = base;
    options.k = k;
    options.seed = seed;
    options.jobs = jobs;
    GridCellResult cell;
    cell.assignment = grid.cell(i);
    for (const auto& [name, value] : cell.assignment) options.params.set(name, value);

    const FoldRun run = run_folds(x, row_subject, subject_label, subject_ids, options);
    double sum = 0.0;
    for (std::size_t f = 0; f < k; ++f) {
      std::vector<double> s;
      std::vector<int> l;
      for (std::size_t m : run.folds.members(f)) {
        s.push_back(run.scores[m]);
        l.push_back(run.labels[m]);
      }
      cell.fold_auc.push_back(auc(s, l));
      sum += cell.fold_auc.back();
    }
    cell.mean_auc = sum / static_cast<double>(k);
    if (i == 0 || cell.mean_auc > result.cells[result.best].mean_auc) {
      result.best = i;
      result.best_params = options.params;
    }
    result.cells.push_back(std::move(cell));
  }
  return result;
}

GridResult grid_search(const CohortManifest& manifest, const FeatureMatrix& features,
                       const ParamGrid& grid, const CvOptions& options) {
  std::vector<std::size_t> row_subject;
  for (const auto& r : features.rows) row_subject.push_back(r.subject);
  std::vector<int> labels;
  std::vector<std::string> ids;
  for (const auto& s : manifest.subjects) {
    labels.push_back(label_value(s.label));
    ids.push_back(s.subject_id);
  }
  return grid_search(options.kind, grid, options.params, features.x, row_subject, labels, ids,
                     options.k, options.seed, options.jobs);
}

}  // namespace vocalscreen
