#include "vocalscreen/random_forest.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "vocalscreen/error.hpp"
#include "vocalscreen/parallel.hpp"
#include "vocalscreen/random.hpp"

namespace vocalscreen {

const TreeNode& DecisionTree::leaf_for(std::span<const double> x) const {
  std::size_t i = 0;
  while (!nodes_[i].is_leaf()) {
    const auto& n = nodes_[i];
    i = static_cast<std::size_t>(x[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left
                                                                                        : n.right);
  }
  return nodes_[i];
}

double DecisionTree::predict_proba(std::span<const double> x) const {
  const auto& leaf = leaf_for(x);
  return static_cast<double>(leaf.n_positive) /
         static_cast<double>(leaf.n_positive + leaf.n_negative);
}

std::size_t DecisionTree::depth() const {
  if (nodes_.empty()) return 0;
  std::vector<std::size_t> depth(nodes_.size(), 0);
  std::size_t deepest = 0;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    deepest = std::max(deepest, depth[i]);
    if (!nodes_[i].is_leaf()) {
      depth[static_cast<std::size_t>(nodes_[i].left)] = depth[i] + 1;
      depth[static_cast<std::size_t>(nodes_[i].right)] = depth[i] + 1;
    }
  }
  return deepest;
}

namespace {

struct Split {
  std::int32_t feature = -1;
  double threshold = 0.0;
  double score = -1.0;  // children purity term; larger is better
};

// Grows one tree on a bootstrap sample. Data is column-major so a feature's
// values are contiguous.
class TreeBuilder {
 public:
  TreeBuilder(const std::vector<double>& columns, std::size_t n_rows, std::size_t n_features,
              std::span<const int> y, const RandomForestParams& params, std::size_t mtry)
      : columns_(columns),
        n_rows_(n_rows),
        n_features_(n_features),
        y_(y),
        params_(params),
        mtry_(mtry) {}

  DecisionTree build(Rng& rng) {
    samples_.resize(n_rows_);
    for (auto& s : samples_) s = static_cast<std::uint32_t>(rng.below(n_rows_));
    permutation_.resize(n_features_);
    nodes_.clear();
    grow(0, samples_.size(), 0, rng);
    return DecisionTree(std::move(nodes_));
  }

 private:
  double value(std::uint32_t row, std::size_t feature) const {
    return columns_[feature * n_rows_ + row];
  }

  std::int32_t grow(std::size_t begin, std::size_t end, std::size_t depth, Rng& rng) {
    const auto id = static_cast<std::int32_t>(nodes_.size());
    nodes_.emplace_back();
    std::uint32_t pos = 0;
    for (std::size_t i = begin; i < end; ++i) pos += static_cast<std::uint32_t>(y_[samples_[i]]);
    const auto count = static_cast<std::uint32_t>(end - begin);
    nodes_[id].n_positive = pos;
    nodes_[id].n_negative = count - pos;

    const bool pure = pos == 0 || pos == count;
    const bool depth_capped = params_.max_depth > 0 && depth >= params_.max_depth;
    if (pure || depth_capped || count < 2 * params_.min_samples_leaf) return id;

    const Split split = best_split(begin, end, pos, rng);
    if (split.feature < 0) return id;

    const auto f = static_cast<std::size_t>(split.feature);
    const auto mid_it = std::partition(samples_.begin() + static_cast<std::ptrdiff_t>(begin),
                                       samples_.begin() + static_cast<std::ptrdiff_t>(end),
                                       [&](std::uint32_t s) { return value(s, f) <= split.threshold; });
    const auto mid = static_cast<std::size_t>(mid_it - samples_.begin());

    const double n = count;
    const double parent_term = (static_cast<double>(pos) * pos +
                                static_cast<double>(count - pos) * (count - pos)) / n;
    nodes_[id].feature = split.feature;
    nodes_[id].threshold = split.threshold;
    nodes_[id].impurity_decrease = split.score - parent_term;

    const std::int32_t left = grow(begin, mid, depth + 1, rng);
    const std::int32_t right = grow(mid, end, depth + 1, rng);
    nodes_[id].left = left;
    nodes_[id].right = right;
    return id;
  }

  // Visits features in a fresh random order until mtry of them admit a valid
  // split (or all are exhausted). Among the visited features the best split
  // wins; equal scores go to the lower feature index, then lower threshold.
  Split best_split(std::size_t begin, std::size_t end, std::uint32_t n_pos, Rng& rng) {
    std::iota(permutation_.begin(), permutation_.end(), 0u);
    Split best;
    std::size_t usable = 0;
    const std::size_t count = end - begin;
    const std::size_t min_leaf = std::max<std::size_t>(1, params_.min_samples_leaf);

    for (std::size_t k = 0; k < n_features_ && usable < mtry_; ++k) {
      const std::size_t pick = k + static_cast<std::size_t>(rng.below(n_features_ - k));
      std::swap(permutation_[k], permutation_[pick]);
      const std::size_t f = permutation_[k];

      sorted_.resize(count);
      for (std::size_t i = 0; i < count; ++i) {
        const std::uint32_t s = samples_[begin + i];
        sorted_[i] = {value(s, f), y_[s]};
      }
      std::sort(sorted_.begin(), sorted_.end());

      bool feature_usable = false;
      double left_pos = 0.0;
      double left_neg = 0.0;
      const double total_pos = n_pos;
      const double total_neg = static_cast<double>(count) - total_pos;
      for (std::size_t i = 0; i + 1 < count; ++i) {
        (sorted_[i].second ? left_pos : left_neg) += 1.0;
        const double a = sorted_[i].first;
        const double b = sorted_[i + 1].first;
        if (!(a < b)) continue;
        const std::size_t n_left = i + 1;
        if (n_left < min_leaf || count - n_left < min_leaf) continue;
        feature_usable = true;
        const double right_pos = total_pos - left_pos;
        const double right_neg = total_neg - left_neg;
        const double score =
            (left_pos * left_pos + left_neg * left_neg) / static_cast<double>(n_left) +
            (right_pos * right_pos + right_neg * right_neg) / static_cast<double>(count - n_left);
        double threshold = std::midpoint(a, b);
        if (!(threshold < b)) threshold = a;
        const auto fi = static_cast<std::int32_t>(f);
        const bool better =
            score > best.score ||
            (score == best.score && (fi < best.feature || (fi == best.feature && threshold < best.threshold)));
        if (better) best = {fi, threshold, score};
      }
      if (feature_usable) ++usable;
    }
    return best;
  }

  const std::vector<double>& columns_;
  std::size_t n_rows_;
  std::size_t n_features_;
  std::span<const int> y_;
  const RandomForestParams& params_;
  std::size_t mtry_;

  std::vector<std::uint32_t> samples_;
  std::vector<std::uint32_t> permutation_;
  std::vector<std::pair<double, int>> sorted_;
  std::vector<TreeNode> nodes_;
};

}  // namespace

RandomForestModel train_random_forest(const Matrix& x, std::span<const int> y,
                                      const RandomForestParams& params, std::uint64_t seed,
                                      std::size_t jobs) {
  const std::size_t n = x.rows();
  const std::size_t d = x.cols();
  if (n != y.size()) throw Error(ErrorCode::kDimensionMismatch, "row and label counts differ");
  if (n < 2 || d == 0) throw Error(ErrorCode::kInvalidArgument, "need at least 2 rows and 1 feature");
  if (params.n_trees == 0) throw Error(ErrorCode::kInvalidArgument, "n_trees must be >= 1");
  std::size_t positives = 0;
  for (int label : y) {
    if (label != 0 && label != 1) throw Error(ErrorCode::kInvalidArgument, "labels must be 0 or 1");
    positives += static_cast<std::size_t>(label);
  }
  if (positives == 0 || positives == n) {
    throw Error(ErrorCode::kSingleClass, "training labels contain a single class");
  }
  for (double v : x.data()) {
    if (!std::isfinite(v)) throw Error(ErrorCode::kNonfiniteInput, "feature matrix has NaN/Inf");
  }

  std::vector<double> columns(n * d);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < d; ++c) columns[c * n + r] = x(r, c);
  }
  const std::size_t mtry =
      params.max_features > 0
          ? std::min(params.max_features, d)
          : std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(std::sqrt(static_cast<double>(d)))));

  RandomForestModel model;
  model.params = params;
  model.seed = seed;
  model.n_features = d;
  model.trees.resize(params.n_trees);
  parallel_for(params.n_trees, jobs, [&](std::size_t t) {
    Rng rng(derive_seed(seed, {t}));
    TreeBuilder builder(columns, n, d, y, params, mtry);
    model.trees[t] = builder.build(rng);
  });
  return model;
}

double rf_predict_proba(const RandomForestModel& model, std::span<const double> x) {
  if (x.size() != model.n_features) {
    throw Error(ErrorCode::kDimensionMismatch, "input has " + std::to_string(x.size()) +
                                                   " features, model expects " +
                                                   std::to_string(model.n_features));
  }
  double acc = 0.0;
  for (const auto& tree : model.trees) acc += tree.predict_proba(x);
  return acc / static_cast<double>(model.trees.size());
}

std::vector<FeatureImportance> rf_feature_importance(const RandomForestModel& model,
                                                     std::span<const std::string> names) {
  if (!names.empty() && names.size() != model.n_features) {
    throw Error(ErrorCode::kDimensionMismatch, "feature name count does not match the model");
  }
  std::vector<double> totals(model.n_features, 0.0);
  std::vector<double> per_tree(model.n_features);
  for (const auto& tree : model.trees) {
    std::fill(per_tree.begin(), per_tree.end(), 0.0);
    const auto& root = tree.root();
    const double root_count = static_cast<double>(root.n_positive + root.n_negative);
    for (const auto& node : tree.nodes()) {
      if (!node.is_leaf()) per_tree[static_cast<std::size_t>(node.feature)] += node.impurity_decrease;
    }
    for (std::size_t f = 0; f < totals.size(); ++f) totals[f] += per_tree[f] / root_count;
  }
  double sum = 0.0;
  for (double v : totals) sum += v;

  std::vector<FeatureImportance> out;
  out.reserve(model.n_features);
  for (std::size_t f = 0; f < model.n_features; ++f) {
    out.push_back({f, names.empty() ? std::to_string(f) : names[f], sum > 0.0 ? totals[f] / sum : 0.0});
  }
  std::stable_sort(out.begin(), out.end(), [](const FeatureImportance& a, const FeatureImportance& b) {
    return a.importance > b.importance;
  });
  return out;
}

}  // namespace vocalscreen
