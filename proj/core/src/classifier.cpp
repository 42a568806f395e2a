#include "vocalscreen/classifier.hpp"

#include <cmath>

#include "json.hpp"

#include "text_io.hpp"
#include "vocalscreen/error.hpp"

namespace vocalscreen {

using nlohmann::json;

std::string_view classifier_kind_name(ClassifierKind kind) {
  switch (kind) {
    case ClassifierKind::kRandomForest: return "rf";
    case ClassifierKind::kLogisticRegression: return "lr";
    case ClassifierKind::kSvmRbf: return "svm";
  }
  return "unknown";
}

std::optional<ClassifierKind> parse_classifier_kind(std::string_view token) {
  const std::string t = detail::to_lower(token);
  if (t == "rf" || t == "random_forest") return ClassifierKind::kRandomForest;
  if (t == "lr" || t == "logistic_regression") return ClassifierKind::kLogisticRegression;
  if (t == "svm" || t == "svm_rbf") return ClassifierKind::kSvmRbf;
  return std::nullopt;
}

namespace {

std::size_t as_count(std::string_view name, double value, std::size_t min_value) {
  if (!(value >= static_cast<double>(min_value)) || value != std::floor(value) || value > 1e9) {
    throw Error(ErrorCode::kInvalidArgument,
                std::string(name) + " must be an integer >= " + std::to_string(min_value));
  }
  return static_cast<std::size_t>(value);
}

}  // namespace

void ClassifierParams::set(std::string_view name, double value) {
  if (name == "n_trees") {
    rf.n_trees = as_count(name, value, 1);
  } else if (name == "max_features") {
    rf.max_features = as_count(name, value, 0);
  } else if (name == "min_samples_leaf") {
    rf.min_samples_leaf = as_count(name, value, 1);
  } else if (name == "max_depth") {
    rf.max_depth = as_count(name, value, 0);
  } else if (name == "l2_lambda") {
    if (!(value >= 0.0)) throw Error(ErrorCode::kInvalidArgument, "l2_lambda must be >= 0");
    lr.l2_lambda = value;
  } else if (name == "C" || name == "c") {
    if (!(value > 0.0)) throw Error(ErrorCode::kInvalidArgument, "C must be > 0");
    svm.c = value;
  } else if (name == "gamma") {
    if (!(value >= 0.0)) throw Error(ErrorCode::kInvalidArgument, "gamma must be >= 0");
    svm.gamma = value;
  } else {
    throw Error(ErrorCode::kUnknownParameter, "unknown classifier parameter '" + std::string(name) + "'");
  }
}

std::map<std::string, double> ClassifierParams::describe(ClassifierKind kind) const {
  switch (kind) {
    case ClassifierKind::kRandomForest:
      return {{"n_trees", static_cast<double>(rf.n_trees)},
              {"max_features", static_cast<double>(rf.max_features)},
              {"min_samples_leaf", static_cast<double>(rf.min_samples_leaf)},
              {"max_depth", static_cast<double>(rf.max_depth)}};
    case ClassifierKind::kLogisticRegression:
      return {{"l2_lambda", lr.l2_lambda}};
    case ClassifierKind::kSvmRbf:
      return {{"C", svm.c}, {"gamma", svm.gamma}};
  }
  return {};
}

TrainedModel train_classifier(ClassifierKind kind, const ClassifierParams& params,
                              const Matrix& x, std::span<const int> y, std::uint64_t seed,
                              std::size_t jobs) {
  switch (kind) {
    case ClassifierKind::kRandomForest:
      return train_random_forest(x, y, params.rf, seed, jobs);
    case ClassifierKind::kLogisticRegression:
      return train_logistic_regression(x, y, params.lr);
    case ClassifierKind::kSvmRbf:
      return train_svm_rbf(x, y, params.svm);
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown classifier kind");
}

double score(const TrainedModel& model, std::span<const double> x) {
  struct Visitor {
    std::span<const double> x;
    double operator()(const RandomForestModel& m) const { return rf_predict_proba(m, x); }
    double operator()(const LogRegModel& m) const { return logreg_predict_proba(m, x); }
    double operator()(const SvmRbfModel& m) const { return svm_decision(m, x); }
  };
  return std::visit(Visitor{x}, model);
}

ClassifierKind kind_of(const TrainedModel& model) {
  switch (model.index()) {
    case 0: return ClassifierKind::kRandomForest;
    case 1: return ClassifierKind::kLogisticRegression;
    default: return ClassifierKind::kSvmRbf;
  }
}

namespace {

json node_to_json(const DecisionTree& tree, std::size_t i) {
  const auto& n = tree.nodes()[i];
  json j = {{"n_negative", n.n_negative}, {"n_positive", n.n_positive}};
  if (!n.is_leaf()) {
    j["feature"] = n.feature;
    j["threshold"] = n.threshold;
    j["impurity_decrease"] = n.impurity_decrease;
    j["left"] = node_to_json(tree, static_cast<std::size_t>(n.left));
    j["right"] = node_to_json(tree, static_cast<std::size_t>(n.right));
  }
  return j;
}

std::int32_t node_from_json(const json& j, std::vector<TreeNode>& nodes) {
  const auto id = static_cast<std::int32_t>(nodes.size());
  nodes.emplace_back();
  nodes[id].n_negative = j.at("n_negative").get<std::uint32_t>();
  nodes[id].n_positive = j.at("n_positive").get<std::uint32_t>();
  if (j.contains("feature")) {
    nodes[id].feature = j.at("feature").get<std::int32_t>();
    nodes[id].threshold = j.at("threshold").get<double>();
    nodes[id].impurity_decrease = j.at("impurity_decrease").get<double>();
    const std::int32_t left = node_from_json(j.at("left"), nodes);
    const std::int32_t right = node_from_json(j.at("right"), nodes);
    nodes[id].left = left;
    nodes[id].right = right;
  }
  return id;
}

json standardizer_to_json(const Standardizer& s) {
  return {{"mean", s.mean}, {"scale", s.scale}};
}

Standardizer standardizer_from_json(const json& j) {
  Standardizer s;
  s.mean = j.at("mean").get<std::vector<double>>();
  s.scale = j.at("scale").get<std::vector<double>>();
  if (s.mean.size() != s.scale.size()) {
    throw Error(ErrorCode::kParseError, "standardizer mean/scale lengths differ");
  }
  return s;
}

json to_json(const RandomForestModel& m) {
  json trees = json::array();
  for (const auto& t : m.trees) trees.push_back(node_to_json(t, 0));
  return {{"params",
           {{"n_trees", m.params.n_trees},
            {"max_features", m.params.max_features},
            {"min_samples_leaf", m.params.min_samples_leaf},
            {"max_depth", m.params.max_depth}}},
          {"seed", m.seed},
          {"n_features", m.n_features},
          {"trees", std::move(trees)}};
}

json to_json(const LogRegModel& m) {
  return {{"standardizer", standardizer_to_json(m.standardizer)},
          {"weights", m.weights},
          {"bias", m.bias},
          {"l2_lambda", m.l2_lambda},
          {"iterations", m.iterations},
          {"converged", m.converged}};
}

json to_json(const SvmRbfModel& m) {
  std::vector<double> flat(m.support_vectors.data().begin(), m.support_vectors.data().end());
  return {{"standardizer", standardizer_to_json(m.standardizer)},
          {"n_features", m.standardizer.mean.size()},
          {"support_vectors", std::move(flat)},
          {"dual_coef", m.dual_coef},
          {"bias", m.bias},
          {"gamma", m.gamma},
          {"C", m.c},
          {"dual_objective", m.dual_objective},
          {"iterations", m.iterations},
          {"converged", m.converged}};
}

RandomForestModel rf_from_json(const json& j) {
  RandomForestModel m;
  const auto& p = j.at("params");
  m.params.n_trees = p.at("n_trees").get<std::size_t>();
  m.params.max_features = p.at("max_features").get<std::size_t>();
  m.params.min_samples_leaf = p.at("min_samples_leaf").get<std::size_t>();
  m.params.max_depth = p.at("max_depth").get<std::size_t>();
  m.seed = j.at("seed").get<std::uint64_t>();
  m.n_features = j.at("n_features").get<std::size_t>();
  for (const auto& t : j.at("trees")) {
    std::vector<TreeNode> nodes;
    node_from_json(t, nodes);
    for (const auto& n : nodes) {
      if (!n.is_leaf() && static_cast<std::size_t>(n.feature) >= m.n_features) {
        throw Error(ErrorCode::kParseError, "tree splits on feature out of range");
      }
    }
    m.trees.emplace_back(std::move(nodes));
  }
  return m;
}

LogRegModel lr_from_json(const json& j) {
  LogRegModel m;
  m.standardizer = standardizer_from_json(j.at("standardizer"));
  m.weights = j.at("weights").get<std::vector<double>>();
  m.bias = j.at("bias").get<double>();
  m.l2_lambda = j.at("l2_lambda").get<double>();
  m.iterations = j.at("iterations").get<std::size_t>();
  m.converged = j.at("converged").get<bool>();
  if (m.weights.size() != m.standardizer.mean.size()) {
    throw Error(ErrorCode::kParseError, "weight count does not match standardizer");
  }
  return m;
}

SvmRbfModel svm_from_json(const json& j) {
  SvmRbfModel m;
  m.standardizer = standardizer_from_json(j.at("standardizer"));
  const auto d = j.at("n_features").get<std::size_t>();
  const auto flat = j.at("support_vectors").get<std::vector<double>>();
  m.dual_coef = j.at("dual_coef").get<std::vector<double>>();
  if (d != m.standardizer.mean.size() || flat.size() != d * m.dual_coef.size()) {
    throw Error(ErrorCode::kParseError, "support vector block has the wrong shape");
  }
  m.support_vectors = Matrix(m.dual_coef.size(), d);
  std::copy(flat.begin(), flat.end(), m.support_vectors.data().begin());
  m.bias = j.at("bias").get<double>();
  m.gamma = j.at("gamma").get<double>();
  m.c = j.at("C").get<double>();
  m.dual_objective = j.at("dual_objective").get<double>();
  m.iterations = j.at("iterations").get<std::size_t>();
  m.converged = j.at("converged").get<bool>();
  return m;
}

}  // namespace

std::string model_to_json(const SavedModel& saved) {
  json body = std::visit([](const auto& m) { return to_json(m); }, saved.model);
  json doc = {{"format_version", kModelFormatVersion},
              {"kind", classifier_kind_name(kind_of(saved.model))},
              {"schema_fingerprint", saved.schema_fingerprint},
              {"model", std::move(body)}};
  return doc.dump(1) + "\n";
}

SavedModel model_from_json(std::string_view text) {
  try {
    const json doc = json::parse(text);
    const int version = doc.at("format_version").get<int>();
    if (version != kModelFormatVersion) {
      throw Error(ErrorCode::kParseError, "unsupported model format version " + std::to_string(version));
    }
    const auto kind = parse_classifier_kind(doc.at("kind").get<std::string>());
    if (!kind) throw Error(ErrorCode::kParseError, "unknown model kind");
    SavedModel saved;
    saved.schema_fingerprint = doc.at("schema_fingerprint").get<std::string>();
    const auto& body = doc.at("model");
    switch (*kind) {
      case ClassifierKind::kRandomForest: saved.model = rf_from_json(body); break;
      case ClassifierKind::kLogisticRegression: saved.model = lr_from_json(body); break;
      case ClassifierKind::kSvmRbf: saved.model = svm_from_json(body); break;
    }
    return saved;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParseError, std::string("model JSON: ") + e.what());
  }
}

double score_checked(const SavedModel& saved, std::string_view schema_fingerprint,
                     std::span<const double> x) {
  if (saved.schema_fingerprint != schema_fingerprint) {
    throw Error(ErrorCode::kSchemaMismatch, "model trained on feature layout " +
                                                saved.schema_fingerprint + ", input is " +
                                                std::string(schema_fingerprint));
  }
  return score(saved.model, x);
}

}  // namespace vocalscreen
