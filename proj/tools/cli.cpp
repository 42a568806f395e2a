#include "cli.hpp"

#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "vocalscreen/classifier.hpp"
#include "vocalscreen/error.hpp"
#include "vocalscreen/evaluation.hpp"
#include "vocalscreen/grid_search.hpp"
#include "vocalscreen/parallel.hpp"
#include "vocalscreen/synth.hpp"

namespace vocalscreen::cli {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

// Raised for argument problems found after CLI11 parsing.
struct ValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Options {
  std::string manifest;
  std::string out;
  std::string features_cache;
  bool stats_on_deltas = false;
  int sample_rate = 8000;
  std::vector<std::string> embeddings;  // label=path
  std::string classifier = "rf";
  long long k = 5;
  std::uint64_t seed = 42;
  std::size_t jobs = 0;
  std::size_t top = 40;

  std::optional<double> n_trees, max_features, min_samples_leaf, max_depth, l2, c, gamma;
  std::string grid;

  std::string spec;
  std::string preset = "strong";
  std::optional<std::size_t> n_per_class;
  bool seed_given = false;
};

void write_file(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary);
  f << text;
  if (!f) throw Error(ErrorCode::kIoWriteFailure, "cannot write " + path.string());
}

std::size_t jobs_of(const Options& o) { return o.jobs > 0 ? o.jobs : default_jobs(); }

ClassifierKind kind_of(const Options& o) {
  const auto kind = parse_classifier_kind(o.classifier);
  if (!kind) throw ValidationError("unknown classifier '" + o.classifier + "' (rf, lr, svm)");
  return *kind;
}

void check_k(const Options& o) {
  if (o.k < 2) throw ValidationError("k must be ≥ 2");
}

ClassifierParams params_of(const Options& o) {
  ClassifierParams p;
  const std::pair<const char*, const std::optional<double>*> given[] = {
      {"n_trees", &o.n_trees}, {"max_features", &o.max_features},
      {"min_samples_leaf", &o.min_samples_leaf}, {"max_depth", &o.max_depth},
      {"l2_lambda", &o.l2}, {"C", &o.c}, {"gamma", &o.gamma}};
  for (const auto& [name, value] : given) {
    if (!*value) continue;
    try {
      p.set(name, **value);
    } catch (const Error& e) {
      throw ValidationError(e.what());
    }
  }
  return p;
}

FeatureConfig feature_config(const Options& o) {
  FeatureConfig c;
  c.stats_on_deltas = o.stats_on_deltas;
  c.dsp.sample_rate = o.sample_rate;
  return c;
}

std::vector<std::pair<std::string, std::string>> embedding_specs(const Options& o) {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& e : o.embeddings) {
    const auto eq = e.find('=');
    if (eq == std::string::npos || eq == 0 || eq + 1 == e.size()) {
      throw ValidationError("--embedding expects label=path, got '" + e + "'");
    }
    out.emplace_back(e.substr(0, eq), e.substr(eq + 1));
  }
  return out;
}

ordered_json features_json(const Options& o) {
  ordered_json emb = ordered_json::array();
  for (const auto& [label, path] : embedding_specs(o)) emb.push_back({{"label", label}, {"path", path}});
  return {{"stats_on_deltas", o.stats_on_deltas},
          {"sample_rate", o.sample_rate},
          {"embeddings", std::move(emb)}};
}

ordered_json params_json(ClassifierKind kind, const ClassifierParams& p) {
  ordered_json j = ordered_json::object();
  for (const auto& [name, value] : p.describe(kind)) j[name] = value;
  return j;
}

FeatureMatrix load_features(const CohortManifest& manifest, const Options& o) {
  if (!o.features_cache.empty()) {
    if (!o.embeddings.empty()) throw ValidationError("--embedding cannot be combined with --features-cache");
    return features_from_table(manifest, read_feature_cache(o.features_cache));
  }
  ExtractOptions x;
  x.features = feature_config(o);
  x.jobs = jobs_of(o);
  for (const auto& [label, path] : embedding_specs(o)) {
    x.embeddings.push_back(load_embedding_table(path, label));
  }
  return extract_features(manifest, x);
}

CvOptions cv_options(const Options& o, std::ostream& log) {
  CvOptions cv;
  cv.kind = kind_of(o);
  cv.params = params_of(o);
  cv.k = static_cast<std::size_t>(o.k);
  cv.seed = o.seed;
  cv.jobs = jobs_of(o);
  cv.top_importances = o.top;
  cv.log = &log;
  return cv;
}

ordered_json base_config(const std::string& sub, const Options& o) {
  return {{"subcommand", sub}, {"manifest", o.manifest}, {"seed", o.seed}, {"out", o.out}};
}

ordered_json model_config(const std::string& sub, const Options& o, const CvOptions& cv) {
  ordered_json j = base_config(sub, o);
  j["features"] = features_json(o);
  j["features_cache"] = o.features_cache;
  j["classifier"] = classifier_kind_name(cv.kind);
  j["params"] = params_json(cv.kind, cv.params);
  j["k"] = cv.k;
  j["top"] = cv.top_importances;
  return j;
}

void echo_config(const fs::path& dir, const ordered_json& config) {
  write_file(dir / "run_config.json", config.dump(2) + "\n");
}

// ---------------------------------------------------------------------------

int run_synth(const Options& o, std::ostream& out) {
  SynthSpec spec;
  if (!o.spec.empty()) {
    spec = load_synth_spec(o.spec);
  } else if (o.preset == "strong") {
    spec = SynthSpec::strong_voicing_contrast();
  } else if (o.preset == "null") {
    spec = SynthSpec::null_contrast();
  } else {
    throw ValidationError("--preset must be strong or null");
  }
  if (o.n_per_class) spec.n_positive = spec.n_negative = *o.n_per_class;
  if (o.seed_given || o.spec.empty()) spec.seed = o.seed;
  spec.validate();
  const auto manifest = generate_cohort(spec, o.out, jobs_of(o));
  ordered_json config = base_config("synth", o);
  config["spec"] = ordered_json::parse(synth_spec_to_json(spec));
  echo_config(o.out, config);
  out << "wrote " << manifest.subjects.size() << " subjects to " << (fs::path(o.out) / "manifest.csv").string()
      << "\n";
  return kExitOk;
}

int run_extract(const Options& o, std::ostream& out) {
  const auto manifest = load_manifest(o.manifest);
  Options no_cache = o;
  no_cache.features_cache.clear();
  const auto features = load_features(manifest, no_cache);
  write_feature_cache(o.out, to_feature_table(features));
  ordered_json config = base_config("extract", o);
  config["features"] = features_json(o);
  const fs::path dir = fs::path(o.out).has_parent_path() ? fs::path(o.out).parent_path() : fs::path(".");
  echo_config(dir, config);
  out << "wrote " << features.x.rows() << " x " << features.x.cols() << " features to " << o.out << "\n";
  return kExitOk;
}

int run_cv(const Options& o, std::ostream& out, std::ostream& err) {
  check_k(o);
  const CvOptions cv = cv_options(o, err);
  const auto manifest = load_manifest(o.manifest);
  const auto report = cross_validate(manifest, load_features(manifest, o), cv);
  write_report(o.out, report);
  echo_config(o.out, model_config("cv", o, cv));
  out << "pooled AUC " << report.pooled_auc << "\n";
  return kExitOk;
}

int run_per_type(const Options& o, std::ostream& out, std::ostream& err) {
  check_k(o);
  const CvOptions cv = cv_options(o, err);
  const auto manifest = load_manifest(o.manifest);
  const auto reports = per_audio_type_eval(manifest, load_features(manifest, o), cv);
  std::ostringstream csv;
  csv.precision(17);
  csv << "audio_type,auc,subjects\n";
  for (const auto& [type, report] : reports) {
    const std::string name(audio_type_name(type));
    write_report(fs::path(o.out) / name, report);
    csv << name << ',' << report.pooled_auc << ',' << report.subjects.size() << '\n';
    out << name << " AUC " << report.pooled_auc << "\n";
  }
  write_file(fs::path(o.out) / "per_type.csv", csv.str());
  echo_config(o.out, model_config("per-type", o, cv));
  return kExitOk;
}

int run_symptom_baseline(const Options& o, std::ostream& out, std::ostream& err) {
  check_k(o);
  CvOptions cv = cv_options(o, err);
  cv.kind = ClassifierKind::kRandomForest;
  cv.params = ClassifierParams{};
  const auto manifest = load_manifest(o.manifest);
  const auto report = symptom_only_baseline(manifest, cv);
  write_report(o.out, report);
  ordered_json config = base_config("symptom-baseline", o);
  config["classifier"] = "rf";
  config["params"] = params_json(cv.kind, cv.params);
  config["k"] = cv.k;
  echo_config(o.out, config);
  out << "symptom-only pooled AUC " << report.pooled_auc << "\n";
  return kExitOk;
}

int run_grid(const Options& o, std::ostream& out, std::ostream& err) {
  check_k(o);
  const CvOptions cv = cv_options(o, err);
  ParamGrid grid;
  try {
    grid = o.grid.empty() ? default_grid(cv.kind) : load_grid(o.grid);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kUnknownParameter) throw ValidationError(e.what());
    throw;
  }
  const auto manifest = load_manifest(o.manifest);
  const auto result = grid_search(manifest, load_features(manifest, o), grid, cv);

  std::ostringstream csv;
  csv.precision(17);
  csv << "cell";
  for (const auto& [name, values] : grid.axes) csv << ',' << name;
  csv << ",mean_auc\n";
  for (std::size_t i = 0; i < result.cells.size(); ++i) {
    csv << i;
    for (const auto& [name, value] : result.cells[i].assignment) csv << ',' << value;
    csv << ',' << result.cells[i].mean_auc << '\n';
  }
  write_file(fs::path(o.out) / "grid_results.csv", csv.str());

  ordered_json best = {{"cell", result.best},
                       {"mean_auc", result.cells[result.best].mean_auc},
                       {"classifier", classifier_kind_name(cv.kind)},
                       {"params", params_json(cv.kind, result.best_params)}};
  write_file(fs::path(o.out) / "best_params.json", best.dump(2) + "\n");

  ordered_json config = model_config("grid", o, cv);
  ordered_json axes = ordered_json::object();
  for (const auto& [name, values] : grid.axes) axes[name] = values;
  config["grid"] = std::move(axes);
  echo_config(o.out, config);
  out << "best cell " << result.best << " mean AUC " << result.cells[result.best].mean_auc << "\n";
  return kExitOk;
}

int run_importance(const Options& o, std::ostream& out, std::ostream& err) {
  const CvOptions cv = cv_options(o, err);
  if (cv.kind != ClassifierKind::kRandomForest) {
    throw ValidationError("importance needs --classifier rf");
  }
  const auto manifest = load_manifest(o.manifest);
  const auto features = load_features(manifest, o);
  std::vector<int> y;
  for (const auto& r : features.rows) y.push_back(label_value(manifest.subjects[r.subject].label));
  const auto model = train_classifier(cv.kind, cv.params, features.x, y, cv.seed, cv.jobs);
  const auto names = features.schema->names();
  auto importances = rf_feature_importance(std::get<RandomForestModel>(model), names);
  if (importances.size() > cv.top_importances) importances.resize(cv.top_importances);

  std::ostringstream csv;
  csv.precision(17);
  csv << "rank,feature,importance\n";
  for (std::size_t i = 0; i < importances.size(); ++i) {
    csv << (i + 1) << ',' << importances[i].name << ',' << importances[i].importance << '\n';
  }
  write_file(fs::path(o.out) / "importances.csv", csv.str());
  write_file(fs::path(o.out) / "model.json",
             model_to_json({model, features.schema->fingerprint()}));
  ordered_json config = model_config("importance", o, cv);
  config.erase("k");
  echo_config(o.out, config);
  out << "top feature " << (importances.empty() ? "-" : importances.front().name) << "\n";
  return kExitOk;
}

void add_feature_flags(CLI::App* app, Options& o) {
  app->add_flag("--stats-on-deltas", o.stats_on_deltas, "Also summarise delta and delta-delta MFCCs");
  app->add_option("--sample-rate", o.sample_rate, "Analysis sample rate (Hz)")->check(CLI::Range(1000, 192000));
  app->add_option("--embedding", o.embeddings, "External embedding table, label=path (repeatable)");
}

void add_model_flags(CLI::App* app, Options& o, bool with_k) {
  app->add_option("--manifest", o.manifest, "Cohort manifest CSV")->required();
  app->add_option("--out", o.out, "Output directory")->required();
  app->add_option("--features-cache", o.features_cache, "Feature cache written by extract");
  add_feature_flags(app, o);
  app->add_option("--classifier", o.classifier, "rf, lr or svm");
  if (with_k) app->add_option("--k", o.k, "Number of folds (default 5)");
  app->add_option("--seed", o.seed, "Random seed (default 42)");
  app->add_option("--jobs", o.jobs, "Worker threads (default: VOCALSCREEN_JOBS or 1)");
  app->add_option("--top", o.top, "Importances to keep (default 40)");
  app->add_option("--n-trees", o.n_trees, "Random forest size");
  app->add_option("--max-features", o.max_features, "Features tried per split (0 = sqrt(d))");
  app->add_option("--min-samples-leaf", o.min_samples_leaf, "Minimum rows per leaf");
  app->add_option("--max-depth", o.max_depth, "Maximum tree depth (0 = unlimited)");
  app->add_option("--l2", o.l2, "Logistic regression L2 strength");
  app->add_option("--C", o.c, "SVM box constraint");
  app->add_option("--gamma", o.gamma, "SVM RBF width (0 = 1/d)");
}

}  // namespace

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Voice-based screening: features, classifiers and speaker-disjoint evaluation",
               "vocalscreen"};
  app.require_subcommand(1);
  Options o;

  auto* synth = app.add_subcommand("synth", "Generate a synthetic cohort");
  synth->add_option("--out", o.out, "Output directory")->required();
  synth->add_option("--spec", o.spec, "Synth spec JSON");
  synth->add_option("--preset", o.preset, "strong or null (when no --spec)");
  synth->add_option("--n-per-class", o.n_per_class, "Subjects per class");
  synth->add_option("--seed", o.seed, "Random seed (default 42)");
  synth->add_option("--jobs", o.jobs, "Worker threads");

  auto* extract = app.add_subcommand("extract", "Write a feature cache CSV");
  extract->add_option("--manifest", o.manifest, "Cohort manifest CSV")->required();
  extract->add_option("--out", o.out, "Output CSV")->required();
  extract->add_option("--jobs", o.jobs, "Worker threads");
  add_feature_flags(extract, o);

  auto* cv = app.add_subcommand("cv", "Speaker-disjoint cross-validation");
  add_model_flags(cv, o, true);
  auto* grid = app.add_subcommand("grid", "Grid search over classifier parameters");
  add_model_flags(grid, o, true);
  grid->add_option("--grid", o.grid, "Grid JSON: {\"name\": [values...]}");
  auto* per_type = app.add_subcommand("per-type", "Cross-validation per audio type");
  add_model_flags(per_type, o, true);
  auto* baseline = app.add_subcommand("symptom-baseline", "Symptom and history features only");
  baseline->add_option("--manifest", o.manifest, "Cohort manifest CSV")->required();
  baseline->add_option("--out", o.out, "Output directory")->required();
  baseline->add_option("--k", o.k, "Number of folds (default 5)");
  baseline->add_option("--seed", o.seed, "Random seed (default 42)");
  baseline->add_option("--jobs", o.jobs, "Worker threads");
  auto* importance = app.add_subcommand("importance", "Train on all data; write importances and model");
  add_model_flags(importance, o, false);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n" << app.help();
    return kExitValidation;
  }

  try {
    if (synth->parsed()) {
      o.seed_given = synth->get_option("--seed")->count() > 0;
      return run_synth(o, out);
    }
    if (extract->parsed()) return run_extract(o, out);
    if (cv->parsed()) return run_cv(o, out, err);
    if (grid->parsed()) return run_grid(o, out, err);
    if (per_type->parsed()) return run_per_type(o, out, err);
    if (baseline->parsed()) return run_symptom_baseline(o, out, err);
    if (importance->parsed()) return run_importance(o, out, err);
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitValidation;
}

}  // namespace vocalscreen::cli
