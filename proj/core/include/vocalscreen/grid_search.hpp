#ifndef VOCALSCREEN_GRID_SEARCH_HPP_
#define VOCALSCREEN_GRID_SEARCH_HPP_

#include <cstddef>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "vocalscreen/classifier.hpp"
#include "vocalscreen/evaluation.hpp"

namespace vocalscreen {

// Ordered axes; cells enumerate row-major (the last axis varies fastest).
struct ParamGrid {
  std::vector<std::pair<std::string, std::vector<double>>> axes;

  std::size_t size() const;
  // Parameter assignment of cell i.
  std::vector<std::pair<std::string, double>> cell(std::size_t i) const;
};

ParamGrid default_grid(ClassifierKind kind);

// JSON object of name -> list of numbers, e.g. {"n_trees": [100, 300]}.
// Key order in the document is the axis order. Throws PARSE_ERROR and
// UNKNOWN_PARAMETER.
ParamGrid parse_grid(std::string_view json_text);
ParamGrid load_grid(const std::filesystem::path& path);

struct GridCellResult {
  std::vector<std::pair<std::string, double>> assignment;
  std::vector<double> fold_auc;
  double mean_auc = 0.0;
};

struct GridResult {
  std::vector<GridCellResult> cells;
  std::size_t best = 0;
  ClassifierParams best_params;
};

// Speaker-disjoint k-fold CV of every cell on the same folds; the best mean
// fold AUC wins and ties go to the earliest cell. `base` supplies the
// parameters the grid does not mention.
GridResult grid_search(ClassifierKind kind, const ParamGrid& grid, const ClassifierParams& base,
                       const Matrix& x, std::span<const std::size_t> row_subject,
                       std::span<const int> subject_label,
                       std::span<const std::string> subject_ids, std::size_t k,
                       std::uint64_t seed, std::size_t jobs = 1);

// Convenience over a cohort's feature matrix.
GridResult grid_search(const CohortManifest& manifest, const FeatureMatrix& features,
                       const ParamGrid& grid, const CvOptions& options);

}  // namespace vocalscreen

#endif  // VOCALSCREEN_GRID_SEARCH_HPP_
