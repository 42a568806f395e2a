// Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any
// criterion fails.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <regex>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "cli.hpp"
#include "oracles.hpp"
#include "reference_dsp.hpp"
#include "test_util.hpp"
#include "vocalscreen/classifier.hpp"
#include "vocalscreen/cohort.hpp"
#include "vocalscreen/dsp.hpp"
#include "vocalscreen/evaluation.hpp"
#include "vocalscreen/features.hpp"
#include "vocalscreen/metrics.hpp"
#include "vocalscreen/synth.hpp"

using namespace vocalscreen;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass;
  std::string detail;
};

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::size_t worker_count() { return std::max(1u, std::thread::hardware_concurrency()); }

// Relative error with an absolute floor for values that are zero up to
// rounding (silent frames, near-zero cepstral or delta values).
double rel_err(double got, double want, double floor) {
  return std::abs(got - want) / std::max(std::abs(want), floor);
}

// ---------------------------------------------------------------------------
// 1. DSP oracle equivalence

Outcome dsp_oracle() {
  const auto t0 = std::chrono::steady_clock::now();
  Rng rng(20240101);
  double worst_zcr = 0, worst_cent = 0, worst_roll = 0, worst_rms = 0, worst_mfcc = 0, worst_delta = 0;
  for (int clip = 0; clip < 100; ++clip) {
    const auto x = testutil::random_clip(rng, 2500 + rng.below(9500));
    const auto d = analyze_clip(AudioClip(x, 8000));
    const auto r = refdsp::analyze(x);
    if (d.zcr.values.size() != r.zcr.size()) return {false, "frame count differs on clip " + std::to_string(clip)};
    // Floors: 1e-9 of the clip-wide scale of each descriptor.
    auto scale_of = [](const std::vector<double>& v) {
      double m = 0.0;
      for (double e : v) m = std::max(m, std::abs(e));
      return std::max(m * 1e-9, 1e-300);
    };
    auto grid_scale = [](const refdsp::Grid& g) {
      double m = 0.0;
      for (const auto& row : g) for (double e : row) m = std::max(m, std::abs(e));
      return std::max(m * 1e-9, 1e-300);
    };
    const double fz = scale_of(r.zcr), fc = scale_of(r.centroid), fr = scale_of(r.rolloff), fe = scale_of(r.rms);
    const double fm = grid_scale(r.mfcc), f1 = grid_scale(r.delta1), f2 = grid_scale(r.delta2);
    for (std::size_t t = 0; t < r.zcr.size(); ++t) {
      worst_zcr = std::max(worst_zcr, rel_err(d.zcr.values[t], r.zcr[t], fz));
      worst_cent = std::max(worst_cent, rel_err(d.centroid.values[t], r.centroid[t], fc));
      worst_roll = std::max(worst_roll, rel_err(d.rolloff.values[t], r.rolloff[t], fr));
      worst_rms = std::max(worst_rms, rel_err(d.rms.values[t], r.rms[t], fe));
      for (std::size_t c = 0; c < 20; ++c) {
        worst_mfcc = std::max(worst_mfcc, rel_err(d.mfcc(t, c), r.mfcc[t][c], fm));
        worst_delta = std::max(worst_delta, rel_err(d.mfcc_delta(t, c), r.delta1[t][c], f1));
        worst_delta = std::max(worst_delta, rel_err(d.mfcc_delta2(t, c), r.delta2[t][c], f2));
      }
    }
  }
  const double elapsed = seconds_since(t0);
  const double worst = std::max({worst_zcr, worst_cent, worst_roll, worst_rms, worst_mfcc, worst_delta});
  std::ostringstream os;
  os << "100 clips, max rel err zcr " << worst_zcr << " centroid " << worst_cent << " rolloff " << worst_roll
     << " rms " << worst_rms << " mfcc " << worst_mfcc << " deltas " << worst_delta << ", " << fmt("%.1f", elapsed)
     << " s";
  return {worst <= 1e-6 && elapsed < 60.0, os.str()};
}

// ---------------------------------------------------------------------------
// 2. Statistics oracle

Outcome stats_oracle() {
  Rng rng(7);
  std::size_t mismatches = 0, constant = 0, tiny = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    std::size_t n;
    if (trial < 300) n = 1 + trial % 3;  // n in {1, 2, 3}
    else n = 4 + rng.below(400);
    std::vector<double> x(n);
    const int kind = trial % 4;
    if (kind == 0 && trial >= 3) {
      std::fill(x.begin(), x.end(), rng.normal() * 10.0);
      ++constant;
    } else if (kind == 1) {
      for (double& v : x) v = static_cast<double>(static_cast<int>(rng.below(9)) - 4) / 8.0;  // dyadic, tied
    } else {
      for (double& v : x) v = rng.normal(rng.uniform(-5, 5), rng.uniform(1e-3, 100));
    }
    if (n <= 3) ++tiny;
    const auto got = summarize_series(x).values();
    const auto want = oracle::stats(x);
    for (std::size_t i = 0; i < 14; ++i) {
      if (std::memcmp(&got[i], &want[i], sizeof(double)) != 0) ++mismatches;
    }
  }
  return {mismatches == 0, "1000 series (" + std::to_string(tiny) + " with n<=3, " + std::to_string(constant) +
                               " constant), bitwise mismatches " + std::to_string(mismatches)};
}

// ---------------------------------------------------------------------------
// 3. AUC oracle

Outcome auc_oracle() {
  Rng rng(11);
  std::size_t exact_misses = 0;
  double worst_trap = 0.0;
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t n = 2 + rng.below(199);
    const std::uint64_t levels = 2 + rng.below(40);  // few levels: heavy ties
    std::vector<double> s(n);
    std::vector<int> y(n);
    for (std::size_t i = 0; i < n; ++i) {
      y[i] = i < 2 ? static_cast<int>(i) : static_cast<int>(rng.below(2));
      s[i] = static_cast<double>(rng.below(levels)) * 0.37 + 0.25 * y[i] * rng.uniform();
    }
    const double a = auc(s, y);
    if (a != oracle::pairwise_auc(s, y)) ++exact_misses;
    worst_trap = std::max(worst_trap, std::abs(trapezoid_area(roc_points(s, y)) - a));
  }
  return {exact_misses == 0 && worst_trap <= 1e-12,
          "500 sets, exact mismatches " + std::to_string(exact_misses) + ", max |trapezoid - auc| " +
              fmt("%.3g", worst_trap)};
}

// ---------------------------------------------------------------------------
// 4. Fold properties

Outcome fold_properties() {
  Rng rng(13);
  std::size_t failures = 0;
  const std::size_t ks[] = {3, 5, 10};
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t k = ks[trial % 3];
    const std::size_t n_pos = k + rng.below(60), n_neg = k + rng.below(60);
    CohortManifest m;
    for (std::size_t i = 0; i < n_pos + n_neg; ++i) {
      SubjectRecord s;
      s.subject_id = "subj" + std::to_string(rng.below(1000000)) + "_" + std::to_string(i);
      s.label = i < n_pos ? Label::kPositive : Label::kNegative;
      m.subjects.push_back(std::move(s));
    }
    // Interleave classes so input order carries no class structure.
    for (std::size_t i = m.subjects.size(); i > 1; --i) std::swap(m.subjects[i - 1], m.subjects[rng.below(i)]);
    const std::uint64_t seed = rng.next_u64();
    const auto f = speaker_disjoint_folds(m, k, seed);
    bool ok = f.k == k && f.fold.size() == m.subjects.size();
    std::vector<std::size_t> pos(k), neg(k);
    for (std::size_t i = 0; ok && i < m.subjects.size(); ++i) {
      ok = f.fold[i] < k && f.subject_ids[i] == m.subjects[i].subject_id;
      if (ok) (m.subjects[i].label == Label::kPositive ? pos : neg)[f.fold[i]]++;
    }
    for (std::size_t fold = 0; ok && fold < k; ++fold) {
      const auto test = f.members(fold);
      std::set<std::string> test_ids, train_ids;
      for (std::size_t i : test) test_ids.insert(m.subjects[i].subject_id);
      for (std::size_t i = 0; i < m.subjects.size(); ++i) {
        if (f.fold[i] != fold) train_ids.insert(m.subjects[i].subject_id);
      }
      for (const auto& id : test_ids) ok = ok && !train_ids.count(id);
      ok = ok && test_ids.size() + train_ids.size() == m.subjects.size() && !test_ids.empty();
    }
    ok = ok && *std::max_element(pos.begin(), pos.end()) - *std::min_element(pos.begin(), pos.end()) <= 1;
    ok = ok && *std::max_element(neg.begin(), neg.end()) - *std::min_element(neg.begin(), neg.end()) <= 1;
    ok = ok && speaker_disjoint_folds(m, k, seed).fold == f.fold;
    failures += !ok;
  }
  return {failures == 0, "200 manifests, k in {3,5,10}, failing manifests " + std::to_string(failures)};
}

// ---------------------------------------------------------------------------
// Shared synthetic cohorts for criteria 5, 6, 7, 10, 11.

struct Cohorts {
  testutil::TempDir dir{"acceptance"};
  CohortManifest strong, null, iy_only;
  FeatureMatrix strong_x, null_x, iy_x;
  double build_seconds = 0.0;
};

SynthSpec sized(SynthSpec s) {
  s.n_positive = 75;
  s.n_negative = 75;
  s.seed = 42;
  return s;
}

void build(Cohorts& out) {
  const auto t0 = std::chrono::steady_clock::now();
  const std::size_t jobs = worker_count();
  auto iy = sized(SynthSpec::strong_voicing_contrast());
  iy.contrast_types = {AudioType::kVowelIy};
  out.strong = generate_cohort(sized(SynthSpec::strong_voicing_contrast()), out.dir / "strong", jobs);
  out.null = generate_cohort(sized(SynthSpec::null_contrast()), out.dir / "null", jobs);
  out.iy_only = generate_cohort(iy, out.dir / "iy", jobs);
  ExtractOptions ex;
  ex.jobs = jobs;
  out.strong_x = extract_features(out.strong, ex);
  out.null_x = extract_features(out.null, ex);
  out.iy_x = extract_features(out.iy_only, ex);
  out.build_seconds = seconds_since(t0);
}

Cohorts& cohorts() {
  static Cohorts c;
  static const bool built = (build(c), true);
  (void)built;
  return c;
}

CvOptions cv_options(ClassifierKind kind) {
  CvOptions o;
  o.kind = kind;
  o.k = 5;
  o.seed = 42;
  o.jobs = worker_count();
  return o;
}

EvalReport& strong_rf() {
  static EvalReport r = cross_validate(cohorts().strong, cohorts().strong_x, cv_options(ClassifierKind::kRandomForest));
  return r;
}

// ---------------------------------------------------------------------------
// 5. End-to-end signal recovery

Outcome signal_recovery() {
  const auto t0 = std::chrono::steady_clock::now();
  auto& c = cohorts();
  const double strong = strong_rf().pooled_auc;
  const double null =
      cross_validate(c.null, c.null_x, cv_options(ClassifierKind::kRandomForest)).pooled_auc;
  const double elapsed = seconds_since(t0);
  std::ostringstream os;
  os << "contrast AUC " << fmt("%.4f", strong) << " (>= 0.90), null AUC " << fmt("%.4f", null)
     << " (in [0.4, 0.6]), " << fmt("%.1f", elapsed) << " s incl. synthesis and extraction of 3 cohorts on "
     << worker_count() << " workers";
  return {strong >= 0.90 && null >= 0.4 && null <= 0.6 && elapsed < 300.0, os.str()};
}

// ---------------------------------------------------------------------------
// 6. Random forest soft dominance

Outcome rf_dominance() {
  auto& c = cohorts();
  const double rf = strong_rf().pooled_auc;
  const double lr = cross_validate(c.strong, c.strong_x, cv_options(ClassifierKind::kLogisticRegression)).pooled_auc;
  const double svm = cross_validate(c.strong, c.strong_x, cv_options(ClassifierKind::kSvmRbf)).pooled_auc;
  std::ostringstream os;
  os << "RF " << fmt("%.4f", rf) << ", LR " << fmt("%.4f", lr) << ", SVM " << fmt("%.4f", svm);
  return {rf >= lr - 0.02 && rf >= svm - 0.02, os.str()};
}

// ---------------------------------------------------------------------------
// 7. Voicing-related importances

Outcome voicing_importances() {
  const auto& imp = strong_rf().importances;
  static const std::regex voicing(R"(^(zcr|rms|mfcc0[0-4])\.)");
  std::size_t hits = 0;
  const std::size_t top = std::min<std::size_t>(40, imp.size());
  for (std::size_t i = 0; i < top; ++i) hits += std::regex_search(imp[i].name, voicing);
  return {top == 40 && hits >= 5, std::to_string(hits) + " of top " + std::to_string(top) +
                                      " importances are zcr/rms/mfcc00-04 statistics (need >= 5)"};
}

// ---------------------------------------------------------------------------
// 8. Logistic regression gradient

Outcome lr_gradient() {
  Rng rng(17);
  double worst_rel = 0.0, worst_inf = 0.0;
  std::size_t unconverged = 0;
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 20 + rng.below(80), d = 1 + rng.below(10);
    Matrix x(n, d);
    std::vector<int> y(n);
    std::vector<std::vector<double>> rows(n, std::vector<double>(d));
    for (std::size_t i = 0; i < n; ++i) {
      y[i] = i < 2 ? static_cast<int>(i) : static_cast<int>(rng.below(2));
      for (std::size_t j = 0; j < d; ++j) rows[i][j] = x(i, j) = rng.normal() + (j == 0 ? 0.8 * y[i] : 0.0);
    }
    std::vector<double> w(d);
    for (double& v : w) v = rng.normal();
    const double b = rng.normal(), lambda = rng.uniform(0.01, 1.0);
    const auto obj = logistic_objective(x, y, w, b, lambda);
    const auto fd = oracle::logistic_fd_gradient(rows, y, w, b, lambda, 1e-5);
    double diff = 0.0, norm = 0.0;
    for (std::size_t j = 0; j <= d; ++j) {
      const double g = j < d ? obj.grad_w[j] : obj.grad_b;
      diff += (g - fd[j]) * (g - fd[j]);
      norm += fd[j] * fd[j];
    }
    worst_rel = std::max(worst_rel, std::sqrt(diff / norm));

    LogisticRegressionParams p;
    p.l2_lambda = lambda;
    const auto model = train_logistic_regression(x, y, p);
    unconverged += !model.converged;
    const auto at = logistic_objective(model.standardizer.apply(x), y, model.weights, model.bias, lambda);
    double inf = std::abs(at.grad_b);
    for (double g : at.grad_w) inf = std::max(inf, std::abs(g));
    worst_inf = std::max(worst_inf, inf);
  }
  return {worst_rel <= 1e-5 && worst_inf < 1e-6 && unconverged == 0,
          "50 instances, max relative gradient error " + fmt("%.3g", worst_rel) + ", max converged |grad|_inf " +
              fmt("%.3g", worst_inf)};
}

// ---------------------------------------------------------------------------
// 9. SVM constraints and dual optimality

Outcome svm_dual() {
  Rng rng(19);
  double worst_bound = 0.0, worst_balance = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 20 + rng.below(60);
    Matrix x(n, 3);
    std::vector<int> y(n);
    for (std::size_t i = 0; i < n; ++i) {
      y[i] = static_cast<int>(i % 2);
      for (std::size_t j = 0; j < 3; ++j) x(i, j) = rng.normal() + (j == 0 ? 1.2 * y[i] : 0.0);
    }
    SvmParams p;
    p.c = rng.uniform(0.1, 10.0);
    const auto m = train_svm_rbf(x, y, p);
    double balance = 0.0;
    for (double a : m.dual_coef) {
      worst_bound = std::max(worst_bound, std::abs(a) - p.c);
      worst_bound = std::max(worst_bound, a == 0.0 ? 1.0 : 0.0);  // support vectors carry alpha > 0
      balance += a;
    }
    worst_balance = std::max(worst_balance, std::abs(balance));
  }

  double worst_gap = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    Matrix x(4, 2);
    for (double& v : x.data()) v = rng.normal();
    const std::vector<int> y{0, 1, 1, 0};
    SvmParams p;
    p.c = rng.uniform(0.2, 4.0);
    p.gamma = rng.uniform(0.1, 2.0);
    p.tolerance = 1e-6;
    const auto m = train_svm_rbf(x, y, p);
    const auto z = Standardizer::fit(x).apply(x);
    std::vector<std::vector<double>> k(4, std::vector<double>(4));
    for (std::size_t i = 0; i < 4; ++i) {
      for (std::size_t j = 0; j < 4; ++j) {
        double d2 = 0.0;
        for (std::size_t c = 0; c < 2; ++c) d2 += (z(i, c) - z(j, c)) * (z(i, c) - z(j, c));
        k[i][j] = std::exp(-p.gamma * d2);
      }
    }
    worst_gap = std::max(worst_gap, std::abs(m.dual_objective - oracle::svm_dual_lattice(k, {-1, 1, 1, -1}, p.c)));
  }
  return {worst_bound <= 1e-12 && worst_balance <= 1e-9 && worst_gap <= 1e-3,
          "bound excess " + fmt("%.3g", std::max(0.0, worst_bound)) + ", |sum alpha y| " +
              fmt("%.3g", worst_balance) + ", max 4-point dual gap vs lattice " + fmt("%.3g", worst_gap)};
}

// ---------------------------------------------------------------------------
// 10. Determinism of full cv runs

Outcome cv_determinism() {
  auto& c = cohorts();
  const auto manifest = (c.dir / "strong/manifest.csv").string();
  for (const char* run : {"run_a", "run_b"}) {
    std::ostringstream out, err;
    const int code = cli::dispatch({"cv", "--manifest", manifest, "--classifier", "rf", "--k", "5", "--seed", "42",
                                    "--jobs", run[4] == 'a' ? "1" : "4", "--out",
                                    (c.dir / run).string()},
                                   out, err);
    if (code != 0) return {false, std::string("cv exited ") + std::to_string(code) + ": " + err.str()};
  }
  std::size_t compared = 0, differing = 0;
  for (const auto& entry : fs::directory_iterator(c.dir / "run_a")) {
    const auto name = entry.path().filename();
    if (name == "run_config.json") continue;  // records its own output directory
    ++compared;
    differing += testutil::read_file(entry.path()) != testutil::read_file(c.dir / "run_b" / name);
  }
  return {compared >= 5 && differing == 0, std::to_string(compared) + " report files compared (1 vs 4 workers), " +
                                               std::to_string(differing) + " differ"};
}

// ---------------------------------------------------------------------------
// 11. Per-type analysis

Outcome per_type() {
  auto& c = cohorts();
  const auto reports = per_audio_type_eval(c.iy_only, c.iy_x, cv_options(ClassifierKind::kRandomForest));
  bool ok = reports.size() == 6;
  const double iy = reports.at(AudioType::kVowelIy).pooled_auc;
  std::ostringstream os;
  for (const auto& [type, r] : reports) {
    os << audio_type_name(type) << ' ' << fmt("%.3f", r.pooled_auc) << ' ';
    if (type == AudioType::kVowelIy) continue;
    ok = ok && r.pooled_auc < iy && r.pooled_auc >= 0.35 && r.pooled_auc <= 0.65;
  }
  return {ok && iy >= 0.9, os.str()};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"1  dsp oracle equivalence", dsp_oracle},
      {"2  statistics oracle", stats_oracle},
      {"3  auc oracle", auc_oracle},
      {"4  fold properties", fold_properties},
      {"5  end-to-end signal recovery", signal_recovery},
      {"6  random forest soft dominance", rf_dominance},
      {"7  voicing importances", voicing_importances},
      {"8  logistic gradient check", lr_gradient},
      {"9  svm constraints and dual", svm_dual},
      {"10 cv determinism", cv_determinism},
      {"11 per-type analysis", per_type},
  };
  std::size_t failed = 0;
  for (const auto& [name, check] : criteria) {
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    failed += !o.pass;
    std::printf("[%s] %-32s %s\n", o.pass ? "PASS" : "FAIL", name.c_str(), o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%zu of %zu criteria passed\n", criteria.size() - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
