#ifndef VOCALSCREEN_CLASSIFIER_HPP_
#define VOCALSCREEN_CLASSIFIER_HPP_

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>

#include "vocalscreen/logistic_regression.hpp"
#include "vocalscreen/matrix.hpp"
#include "vocalscreen/random_forest.hpp"
#include "vocalscreen/svm.hpp"

namespace vocalscreen {

enum class ClassifierKind { kRandomForest, kLogisticRegression, kSvmRbf };

// "rf", "lr", "svm".
std::string_view classifier_kind_name(ClassifierKind kind);
std::optional<ClassifierKind> parse_classifier_kind(std::string_view token);

struct ClassifierParams {
  RandomForestParams rf;
  LogisticRegressionParams lr;
  SvmParams svm;

  // Grid-search hooks. Names: n_trees, max_features, min_samples_leaf,
  // max_depth, l2_lambda, C, gamma. Throws UNKNOWN_PARAMETER.
  void set(std::string_view name, double value);
  // The parameters that matter for `kind`, by name.
  std::map<std::string, double> describe(ClassifierKind kind) const;
};

using TrainedModel = std::variant<RandomForestModel, LogRegModel, SvmRbfModel>;

TrainedModel train_classifier(ClassifierKind kind, const ClassifierParams& params,
                              const Matrix& x, std::span<const int> y, std::uint64_t seed,
                              std::size_t jobs = 1);

// RF and LR return P(positive); SVM returns its decision value. All are
// monotone in the model's confidence, which is all ranking metrics need.
double score(const TrainedModel& model, std::span<const double> x);

ClassifierKind kind_of(const TrainedModel& model);

// Versioned JSON document binding a model to the fingerprint of the feature
// layout it was trained on.
struct SavedModel {
  TrainedModel model;
  std::string schema_fingerprint;
};

inline constexpr int kModelFormatVersion = 1;

std::string model_to_json(const SavedModel& saved);
// Throws PARSE_ERROR on malformed or unsupported documents.
SavedModel model_from_json(std::string_view text);
// Throws SCHEMA_MISMATCH when the caller's layout differs from training.
double score_checked(const SavedModel& saved, std::string_view schema_fingerprint,
                     std::span<const double> x);

}  // namespace vocalscreen

#endif  // VOCALSCREEN_CLASSIFIER_HPP_
