#ifndef VOCALSCREEN_METRICS_HPP_
#define VOCALSCREEN_METRICS_HPP_

#include <map>
#include <optional>
#include <span>
#include <vector>

#include "vocalscreen/audio_io.hpp"

namespace vocalscreen {

// Labels are 0/1 throughout. A sample is predicted positive when its score
// is >= the threshold.

// Mann-Whitney: (#{pos > neg} + 0.5 #{pos == neg}) / (n_pos n_neg).
// Throws SINGLE_CLASS, NONFINITE_INPUT.
double auc(std::span<const double> scores, std::span<const int> labels);

struct RocPoint {
  double fpr;
  double tpr;
  double threshold;
};

// One point per unique score (descending) after a sentinel (0, 0) point at
// max score + 1. The trapezoid area under the points equals auc().
std::vector<RocPoint> roc_points(std::span<const double> scores, std::span<const int> labels);
double trapezoid_area(std::span<const RocPoint> points);

struct PrPoint {
  double recall;
  double precision;
  double threshold;
};

// One point per unique score, descending.
std::vector<PrPoint> pr_points(std::span<const double> scores, std::span<const int> labels);

// Best precision among thresholds reaching the target recall.
double precision_at_recall(std::span<const double> scores, std::span<const int> labels,
                           double target_recall);

struct FprOperatingPoint {
  double recall;
  double fpr;
  double threshold;
  // nullopt when the point predicts no positives.
  std::optional<double> precision;
};

// Highest-recall threshold whose false positive rate is <= max_fpr; among
// equal recalls the highest threshold wins.
FprOperatingPoint operating_point_at_fpr(std::span<const double> scores,
                                         std::span<const int> labels, double max_fpr);

double recall_at_fpr(std::span<const double> scores, std::span<const int> labels, double max_fpr);

// Arithmetic mean over whatever recordings the subject has.
double aggregate_subject_scores(std::span<const double> recording_scores);
double aggregate_subject_scores(const std::map<AudioType, double>& recording_scores);

}  // namespace vocalscreen

#endif  // VOCALSCREEN_METRICS_HPP_
