#include "vocalscreen/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>

#include "vocalscreen/error.hpp"

namespace vocalscreen {

namespace {

struct Counts {
  std::size_t positives = 0;
  std::size_t negatives = 0;
};

Counts validate(std::span<const double> scores, std::span<const int> labels, bool need_both) {
  if (scores.size() != labels.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "score and label counts differ");
  }
  Counts c;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (!std::isfinite(scores[i])) throw Error(ErrorCode::kNonfiniteInput, "score is NaN/Inf");
    if (labels[i] == 1) {
      ++c.positives;
    } else if (labels[i] == 0) {
      ++c.negatives;
    } else {
      throw Error(ErrorCode::kInvalidArgument, "labels must be 0 or 1");
    }
  }
  if (need_both && (c.positives == 0 || c.negatives == 0)) {
    throw Error(ErrorCode::kSingleClass, "metric needs both classes");
  }
  return c;
}

// Indices ordered by descending score.
std::vector<std::size_t> descending_order(std::span<const double> scores) {
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  return order;
}

// Cumulative (tp, fp) at each unique threshold, highest first.
struct Sweep {
  double threshold;
  std::size_t tp;
  std::size_t fp;
};

std::vector<Sweep> sweep(std::span<const double> scores, std::span<const int> labels) {
  const auto order = descending_order(scores);
  std::vector<Sweep> out;
  std::size_t tp = 0, fp = 0;
  for (std::size_t i = 0; i < order.size();) {
    const double t = scores[order[i]];
    while (i < order.size() && scores[order[i]] == t) {
      (labels[order[i]] == 1 ? tp : fp) += 1;
      ++i;
    }
    out.push_back({t, tp, fp});
  }
  return out;
}

}  // namespace

double auc(std::span<const double> scores, std::span<const int> labels) {
  const Counts c = validate(scores, labels, true);
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  // Twice the Mann-Whitney U, kept integral so the result is exact.
  std::uint64_t twice_u = 0;
  std::uint64_t negatives_below = 0;
  for (std::size_t i = 0; i < order.size();) {
    const double s = scores[order[i]];
    std::uint64_t pos = 0, neg = 0;
    while (i < order.size() && scores[order[i]] == s) {
      (labels[order[i]] == 1 ? pos : neg) += 1;
      ++i;
    }
    twice_u += 2 * pos * negatives_below + pos * neg;
    negatives_below += neg;
  }
  return static_cast<double>(twice_u) /
         (2.0 * static_cast<double>(c.positives) * static_cast<double>(c.negatives));
}

std::vector<RocPoint> roc_points(std::span<const double> scores, std::span<const int> labels) {
  const Counts c = validate(scores, labels, true);
  const auto steps = sweep(scores, labels);
  const double p = static_cast<double>(c.positives);
  const double n = static_cast<double>(c.negatives);
  std::vector<RocPoint> out;
  out.reserve(steps.size() + 1);
  out.push_back({0.0, 0.0, steps.front().threshold + 1.0});
  for (const auto& s : steps) {
    out.push_back({static_cast<double>(s.fp) / n, static_cast<double>(s.tp) / p, s.threshold});
  }
  return out;
}

double trapezoid_area(std::span<const RocPoint> points) {
  double area = 0.0;
  for (std::size_t i = 1; i < points.size(); ++i) {
    area += (points[i].fpr - points[i - 1].fpr) * (points[i].tpr + points[i - 1].tpr) * 0.5;
  }
  return area;
}

std::vector<PrPoint> pr_points(std::span<const double> scores, std::span<const int> labels) {
  const Counts c = validate(scores, labels, false);
  if (c.positives == 0) throw Error(ErrorCode::kSingleClass, "recall needs positive samples");
  std::vector<PrPoint> out;
  for (const auto& s : sweep(scores, labels)) {
    out.push_back({static_cast<double>(s.tp) / static_cast<double>(c.positives),
                   static_cast<double>(s.tp) / static_cast<double>(s.tp + s.fp), s.threshold});
  }
  return out;
}

double precision_at_recall(std::span<const double> scores, std::span<const int> labels,
                           double target_recall) {
  double best = 0.0;
  for (const auto& p : pr_points(scores, labels)) {
    if (p.recall >= target_recall) best = std::max(best, p.precision);
  }
  return best;
}

FprOperatingPoint operating_point_at_fpr(std::span<const double> scores,
                                         std::span<const int> labels, double max_fpr) {
  const auto roc = roc_points(scores, labels);
  const auto steps = sweep(scores, labels);
  FprOperatingPoint best{0.0, 0.0, roc.front().threshold, std::nullopt};
  for (std::size_t i = 1; i < roc.size(); ++i) {
    if (roc[i].fpr <= max_fpr && roc[i].tpr > best.recall) {
      const auto& s = steps[i - 1];
      best = {roc[i].tpr, roc[i].fpr, roc[i].threshold,
              static_cast<double>(s.tp) / static_cast<double>(s.tp + s.fp)};
    }
  }
  return best;
}

double recall_at_fpr(std::span<const double> scores, std::span<const int> labels, double max_fpr) {
  return operating_point_at_fpr(scores, labels, max_fpr).recall;
}

double aggregate_subject_scores(std::span<const double> recording_scores) {
  if (recording_scores.empty()) {
    throw Error(ErrorCode::kEmptySeries, "subject has no recording scores");
  }
  double sum = 0.0;
  for (double s : recording_scores) sum += s;
  return sum / static_cast<double>(recording_scores.size());
}

double aggregate_subject_scores(const std::map<AudioType, double>& recording_scores) {
  std::vector<double> values;
  for (const auto& [type, s] : recording_scores) values.push_back(s);
  return aggregate_subject_scores(values);
}

}  // namespace vocalscreen
