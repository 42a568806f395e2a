#include <algorithm>
#include <limits>
#include <set>

#include "check_error.hpp"
#include "doctest.h"
#include "oracles.hpp"
#include "vocalscreen/metrics.hpp"
#include "vocalscreen/random.hpp"

using namespace vocalscreen;

namespace {

struct Scored {
  std::vector<double> s;
  std::vector<int> y;
};

// Coarse score grid so ties are common.
Scored random_set(Rng& rng, std::size_t n) {
  Scored d;
  for (std::size_t i = 0; i < n; ++i) {
    d.y.push_back(i < 2 ? static_cast<int>(i) : static_cast<int>(rng.below(2)));
    d.s.push_back(static_cast<double>(rng.below(12)) / 4.0 + 0.3 * d.y.back());
  }
  return d;
}

struct Counts {
  double tp = 0, fp = 0, pos = 0, neg = 0;
};

Counts count_at(const Scored& d, double thr) {
  Counts c;
  for (std::size_t i = 0; i < d.s.size(); ++i) {
    (d.y[i] ? c.pos : c.neg) += 1;
    if (d.s[i] >= thr) (d.y[i] ? c.tp : c.fp) += 1;
  }
  return c;
}

// Every distinct score plus one threshold above them all.
std::vector<double> all_thresholds(const Scored& d) {
  std::set<double> t(d.s.begin(), d.s.end());
  t.insert(std::numeric_limits<double>::infinity());
  return {t.begin(), t.end()};
}

}  // namespace

TEST_CASE("auc basics") {
  CHECK(auc(std::vector<double>{0.9, 0.8, 0.1, 0.2}, std::vector<int>{1, 1, 0, 0}) == 1.0);
  CHECK(auc(std::vector<double>(10, 0.3), std::vector<int>{1, 0, 1, 0, 1, 0, 1, 0, 1, 1}) == 0.5);
  CHECK_ERROR_CODE(auc(std::vector<double>{1, 2}, std::vector<int>{1, 1}), ErrorCode::kSingleClass);
  CHECK_ERROR_CODE(auc(std::vector<double>{1, std::nan("")}, std::vector<int>{1, 0}), ErrorCode::kNonfiniteInput);
}

TEST_CASE("auc equals the pairwise oracle and the roc trapezoid") {
  Rng rng(1);
  for (int trial = 0; trial < 100; ++trial) {
    const auto d = random_set(rng, 2 + rng.below(200));
    const double a = auc(d.s, d.y);
    CHECK(a == oracle::pairwise_auc(d.s, d.y));
    CHECK(std::abs(trapezoid_area(roc_points(d.s, d.y)) - a) <= 1e-12);
  }
}

TEST_CASE("auc is invariant under increasing transforms") {
  Rng rng(2);
  const auto d = random_set(rng, 80);
  std::vector<double> t;
  for (double v : d.s) t.push_back(std::exp(3.0 * v) - 7.0);
  CHECK(auc(t, d.y) == auc(d.s, d.y));
}

TEST_CASE("roc points of a single-threshold set") {
  const auto pts = roc_points(std::vector<double>{1.0, 0.0}, std::vector<int>{1, 0});
  REQUIRE(pts.size() == 3);
  CHECK(pts[0].fpr == 0.0);
  CHECK(pts[0].tpr == 0.0);
  CHECK(pts[0].threshold == 2.0);
  CHECK(pts[1].fpr == 0.0);
  CHECK(pts[1].tpr == 1.0);
  CHECK(pts[2].fpr == 1.0);
  CHECK(pts[2].tpr == 1.0);
}

TEST_CASE("roc and pr points agree with direct counting") {
  Rng rng(3);
  const auto d = random_set(rng, 60);
  for (const auto& p : roc_points(d.s, d.y)) {
    const auto c = count_at(d, p.threshold);
    CHECK(p.tpr == c.tp / c.pos);
    CHECK(p.fpr == c.fp / c.neg);
  }
  for (const auto& p : pr_points(d.s, d.y)) {
    const auto c = count_at(d, p.threshold);
    CHECK(p.recall == c.tp / c.pos);
    CHECK(p.precision == c.tp / (c.tp + c.fp));
  }
}

TEST_CASE("precision at recall") {
  CHECK(precision_at_recall(std::vector<double>{4, 3, 2, 1}, std::vector<int>{1, 1, 0, 0}, 0.5) == 1.0);
  // Only the lowest threshold reaches full recall: everything predicted positive.
  CHECK(precision_at_recall(std::vector<double>{1, 4, 3, 2}, std::vector<int>{1, 0, 0, 0}, 1.0) == 0.25);
  Rng rng(4);
  for (int trial = 0; trial < 50; ++trial) {
    const auto d = random_set(rng, 20);
    const double target = rng.uniform(0.05, 1.0);
    double best = 0.0;
    for (double thr : all_thresholds(d)) {
      const auto c = count_at(d, thr);
      if (c.tp + c.fp > 0 && c.tp / c.pos >= target) best = std::max(best, c.tp / (c.tp + c.fp));
    }
    CHECK(precision_at_recall(d.s, d.y, target) == best);
  }
}

TEST_CASE("recall at fpr") {
  CHECK(recall_at_fpr(std::vector<double>{4, 3, 2, 1}, std::vector<int>{1, 1, 0, 0}, 0.01) == 1.0);
  CHECK(recall_at_fpr(std::vector<double>(6, 0.5), std::vector<int>{1, 0, 1, 0, 1, 0}, 0.1) == 0.0);
  Rng rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    const auto d = random_set(rng, 20 + rng.below(40));
    const double max_fpr = rng.uniform(0.0, 0.5);
    double best = 0.0, best_thr = std::numeric_limits<double>::infinity();
    for (double thr : all_thresholds(d)) {
      const auto c = count_at(d, thr);
      if (c.fp / c.neg > max_fpr) continue;
      const double r = c.tp / c.pos;
      if (r > best || (r == best && thr > best_thr)) {
        best = r;
        best_thr = thr;
      }
    }
    CHECK(recall_at_fpr(d.s, d.y, max_fpr) == best);
    const auto op = operating_point_at_fpr(d.s, d.y, max_fpr);
    CHECK(op.recall == best);
    CHECK(op.fpr <= max_fpr);
    if (best > 0.0) CHECK(op.threshold == best_thr);
  }
}

TEST_CASE("subject aggregation is the mean") {
  CHECK(aggregate_subject_scores(std::vector<double>(6, 0.7)) == doctest::Approx(0.7));
  CHECK(aggregate_subject_scores(std::vector<double>{0.2, 0.4, 0.9}) == doctest::Approx(0.5));
  CHECK(aggregate_subject_scores(std::map<AudioType, double>{{AudioType::kCough, 0.3}}) == 0.3);
  CHECK_ERROR_CODE(aggregate_subject_scores(std::vector<double>{}), ErrorCode::kEmptySeries);
}
