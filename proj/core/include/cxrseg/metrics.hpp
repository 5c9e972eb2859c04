#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cxrseg/curation.hpp"
#include "cxrseg/labels.hpp"
#include "cxrseg/model.hpp"

namespace cxrseg {

/// Rank-based AUROC: (wins + ties / 2) / (positives * negatives) over all
/// positive-negative pairs. Throws UndefinedMetricError when only one class is present.
double auroc(std::span<const double> scores, const std::vector<bool>& labels);

/// Unweighted mean of the five per-label AUROCs.
double macro_auroc(const std::array<double, kNumAbnormalities>& per_label);

struct RocPoint {
  double fpr = 0.0;
  double tpr = 0.0;
  friend bool operator==(const RocPoint&, const RocPoint&) = default;
};

/// Operating points from (0,0) to (1,1), one per distinct score threshold.
struct RocCurve {
  std::vector<RocPoint> points;
  double trapezoid_area() const;
};

RocCurve roc_points(std::span<const double> scores, const std::vector<bool>& labels);

struct Prf1 {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

/// Precision, recall, F1 with every 0/0 taken as 0. F1 is evaluated as
/// 2TP / (2TP + FP + FN), identical to 2PR / (P + R) when either is nonzero.
Prf1 prf1(const std::vector<bool>& predictions, const std::vector<bool>& labels);
Prf1 prf1_from_counts(std::size_t tp, std::size_t fp, std::size_t fn) noexcept;

struct ThresholdChoice {
  double threshold = 0.0;
  double f1 = 0.0;
};

/// Among the distinct observed scores t, the one whose predictions (score >= t)
/// maximise F1; ties go to the largest t. Throws UndefinedMetricError without positives.
ThresholdChoice select_threshold_f1(std::span<const double> scores, const std::vector<bool>& labels);

struct ThresholdSet {
  std::array<double, kNumAbnormalities> abnormal{};
  double no_finding = 0.5;
};

struct ThresholdSelection {
  ThresholdSet thresholds;
  std::vector<std::string> notes;  // labels whose selection was undefined
};

/// Per-label F1-max thresholds on validation scores, plus a No Finding
/// threshold chosen the same way on the 1 - max(p) score. A label without
/// validation positives falls back to threshold 1.0 and is noted.
ThresholdSelection select_thresholds(const std::vector<ScoreVector>& scores, const std::vector<LabelVector>& labels);

struct SplitMetrics {
  std::array<std::optional<double>, kNumAbnormalities> auroc{};
  std::optional<double> macro_auroc;
  std::array<Prf1, kNumAbnormalities> per_label{};
  Prf1 macro;
  /// AUROC of the continuous 1 - max(p) score against the No Finding label.
  std::optional<double> no_finding_auroc;
  /// No Finding predicted by the complement rule (no abnormality above threshold).
  Prf1 no_finding_complement;
  /// No Finding predicted by thresholding 1 - max(p) at ThresholdSet::no_finding.
  Prf1 no_finding_threshold;
  CooccurrenceMatrix predicted_cooccurrence;
  std::size_t test_count = 0;
  std::vector<std::string> notes;
};

/// Scores a test split with thresholds fixed beforehand on validation data.
SplitMetrics evaluate_split(const std::vector<ScoreVector>& scores, const std::vector<LabelVector>& labels,
                            const ThresholdSet& thresholds);

/// Thresholded abnormality predictions with the complement-rule No Finding flag.
LabelVector predict_labels(const ScoreVector& scores, const ThresholdSet& thresholds);

struct NamedValue {
  std::string name;
  std::optional<double> value;
};

/// Every scalar of a SplitMetrics in a fixed order with stable names.
std::vector<NamedValue> flatten(const SplitMetrics& m);

struct MetricSummary {
  std::string name;
  std::vector<std::optional<double>> values;  // one per split
  std::optional<double> mean;                 // over defined values
  std::optional<double> stddev;               // sample (n-1); needs >= 2 defined values
};

struct ExperimentReport {
  std::vector<std::uint64_t> split_seeds;
  std::vector<SplitMetrics> splits;
  std::vector<MetricSummary> summary;

  const MetricSummary* find(std::string_view name) const;
};

ExperimentReport aggregate(const std::vector<SplitMetrics>& splits, const std::vector<std::uint64_t>& seeds = {});

}  // namespace cxrseg
