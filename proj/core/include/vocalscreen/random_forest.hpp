#ifndef VOCALSCREEN_RANDOM_FOREST_HPP_
#define VOCALSCREEN_RANDOM_FOREST_HPP_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "vocalscreen/matrix.hpp"

namespace vocalscreen {

struct RandomForestParams {
  std::size_t n_trees = 300;
  // 0 selects floor(sqrt(d)), at least 1.
  std::size_t max_features = 0;
  std::size_t min_samples_leaf = 1;
  // 0 grows until leaves are pure or too small to split.
  std::size_t max_depth = 0;

  friend bool operator==(const RandomForestParams&, const RandomForestParams&) = default;
};

struct TreeNode {
  std::int32_t feature = -1;  // -1 marks a leaf
  double threshold = 0.0;     // x[feature] <= threshold goes left
  std::int32_t left = -1;
  std::int32_t right = -1;
  std::uint32_t n_negative = 0;
  std::uint32_t n_positive = 0;
  // Sample-count-weighted Gini decrease achieved by this split.
  double impurity_decrease = 0.0;

  bool is_leaf() const noexcept { return feature < 0; }
  friend bool operator==(const TreeNode&, const TreeNode&) = default;
};

class DecisionTree {
 public:
  DecisionTree() = default;
  explicit DecisionTree(std::vector<TreeNode> nodes) : nodes_(std::move(nodes)) {}

  const std::vector<TreeNode>& nodes() const noexcept { return nodes_; }
  const TreeNode& root() const { return nodes_.front(); }
  const TreeNode& leaf_for(std::span<const double> x) const;
  // Fraction of positive training samples in the leaf reached by x.
  double predict_proba(std::span<const double> x) const;
  std::size_t depth() const;

  friend bool operator==(const DecisionTree&, const DecisionTree&) = default;

 private:
  std::vector<TreeNode> nodes_;
};

struct RandomForestModel {
  RandomForestParams params;
  std::uint64_t seed = 0;
  std::size_t n_features = 0;
  std::vector<DecisionTree> trees;

  friend bool operator==(const RandomForestModel&, const RandomForestModel&) = default;
};

// Bagged CART forest. Tree t bootstraps with an RNG derived from (seed, t),
// so the forest is identical for any job count. Labels are 0/1.
// Throws SINGLE_CLASS or NONFINITE_INPUT.
RandomForestModel train_random_forest(const Matrix& x, std::span<const int> y,
                                      const RandomForestParams& params, std::uint64_t seed,
                                      std::size_t jobs = 1);

// Mean over trees of the leaf positive fraction.
double rf_predict_proba(const RandomForestModel& model, std::span<const double> x);

struct FeatureImportance {
  std::size_t index;
  std::string name;
  double importance;
};

// Mean decrease in Gini impurity, normalised to sum to 1 and sorted in
// descending order (ties by index). `names` may be empty, in which case the
// index is used as the name.
std::vector<FeatureImportance> rf_feature_importance(const RandomForestModel& model,
                                                     std::span<const std::string> names = {});

}  // namespace vocalscreen

#endif  // VOCALSCREEN_RANDOM_FOREST_HPP_
