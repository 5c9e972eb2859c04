#include "cxrseg/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

#include "cxrseg/error.hpp"

namespace cxrseg {

namespace {

void check_inputs(std::span<const double> scores, const std::vector<bool>& labels) {
  if (scores.size() != labels.size()) throw ArgumentError("scores and labels differ in length");
  for (double s : scores) {
    if (std::isnan(s)) throw ArgumentError("score is NaN");
  }
}

// Indices sorted by descending score.
std::vector<std::size_t> order_desc(std::span<const double> scores) {
  std::vector<std::size_t> idx(scores.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  return idx;
}

std::pair<std::size_t, std::size_t> class_counts(const std::vector<bool>& labels) {
  const auto pos = static_cast<std::size_t>(std::count(labels.begin(), labels.end(), true));
  return {pos, labels.size() - pos};
}

double safe_div(double a, double b) noexcept { return b == 0.0 ? 0.0 : a / b; }

}  // namespace

double auroc(std::span<const double> scores, const std::vector<bool>& labels) {
  check_inputs(scores, labels);
  const auto [pos, neg] = class_counts(labels);
  if (pos == 0 || neg == 0) {
    throw UndefinedMetricError(fmt::format("AUROC is undefined with {} positives and {} negatives", pos, neg));
  }
  // Ascending sweep over tie groups: each positive beats every negative below its group.
  const auto desc = order_desc(scores);
  double wins = 0.0;
  double ties = 0.0;
  double neg_below = 0.0;
  for (std::size_t end = desc.size(); end > 0;) {
    std::size_t begin = end - 1;
    while (begin > 0 && scores[desc[begin - 1]] == scores[desc[end - 1]]) --begin;
    double gp = 0.0;
    double gn = 0.0;
    for (std::size_t i = begin; i < end; ++i) (labels[desc[i]] ? gp : gn) += 1.0;
    wins += gp * neg_below;
    ties += gp * gn;
    neg_below += gn;
    end = begin;
  }
  return (wins + 0.5 * ties) / (static_cast<double>(pos) * static_cast<double>(neg));
}

double macro_auroc(const std::array<double, kNumAbnormalities>& per_label) {
  double sum = 0.0;
  for (double v : per_label) {
    if (!std::isfinite(v)) throw ArgumentError("macro AUROC needs finite per-label values");
    sum += v;
  }
  return sum / static_cast<double>(kNumAbnormalities);
}

double RocCurve::trapezoid_area() const {
  double area = 0.0;
  for (std::size_t i = 1; i < points.size(); ++i) {
    area += (points[i].fpr - points[i - 1].fpr) * (points[i].tpr + points[i - 1].tpr) / 2.0;
  }
  return area;
}

RocCurve roc_points(std::span<const double> scores, const std::vector<bool>& labels) {
  check_inputs(scores, labels);
  const auto [pos, neg] = class_counts(labels);
  if (pos == 0 || neg == 0) {
    throw UndefinedMetricError(fmt::format("ROC is undefined with {} positives and {} negatives", pos, neg));
  }
  const auto desc = order_desc(scores);
  RocCurve curve;
  curve.points.push_back({0.0, 0.0});
  std::size_t tp = 0;
  std::size_t fp = 0;
  for (std::size_t begin = 0; begin < desc.size();) {
    std::size_t end = begin;
    while (end < desc.size() && scores[desc[end]] == scores[desc[begin]]) {
      (labels[desc[end]] ? tp : fp) += 1;
      ++end;
    }
    curve.points.push_back({static_cast<double>(fp) / static_cast<double>(neg),
                            static_cast<double>(tp) / static_cast<double>(pos)});
    begin = end;
  }
  return curve;
}

Prf1 prf1_from_counts(std::size_t tp, std::size_t fp, std::size_t fn) noexcept {
  Prf1 r;
  r.precision = safe_div(static_cast<double>(tp), static_cast<double>(tp + fp));
  r.recall = safe_div(static_cast<double>(tp), static_cast<double>(tp + fn));
  r.f1 = safe_div(2.0 * static_cast<double>(tp), static_cast<double>(2 * tp + fp + fn));
  return r;
}

Prf1 prf1(const std::vector<bool>& predictions, const std::vector<bool>& labels) {
  if (predictions.size() != labels.size()) throw ArgumentError("predictions and labels differ in length");
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (predictions[i] && labels[i]) ++tp;
    if (predictions[i] && !labels[i]) ++fp;
    if (!predictions[i] && labels[i]) ++fn;
  }
  return prf1_from_counts(tp, fp, fn);
}

ThresholdChoice select_threshold_f1(std::span<const double> scores, const std::vector<bool>& labels) {
  check_inputs(scores, labels);
  const auto [pos, neg] = class_counts(labels);
  (void)neg;
  if (pos == 0) throw UndefinedMetricError("F1-max threshold is undefined without positive labels");
  const auto desc = order_desc(scores);
  std::size_t tp = 0;
  std::size_t fp = 0;
  // Best F1 kept as the exact fraction num/den to make tie-breaking exact.
  std::size_t best_num = 0;
  std::size_t best_den = 1;
  std::size_t best_tp = 0;
  std::size_t best_fp = 0;
  double best_t = scores[desc.front()];
  for (std::size_t begin = 0; begin < desc.size();) {
    std::size_t end = begin;
    while (end < desc.size() && scores[desc[end]] == scores[desc[begin]]) {
      (labels[desc[end]] ? tp : fp) += 1;
      ++end;
    }
    const std::size_t num = 2 * tp;
    const std::size_t den = 2 * tp + fp + (pos - tp);
    if (num * best_den > best_num * den) {
      best_num = num;
      best_den = den;
      best_t = scores[desc[begin]];
      best_tp = tp;
      best_fp = fp;
    }
    begin = end;
  }
  return {best_t, prf1_from_counts(best_tp, best_fp, pos - best_tp).f1};
}

namespace {

std::vector<double> column(const std::vector<ScoreVector>& scores, std::size_t k) {
  std::vector<double> out;
  out.reserve(scores.size());
  for (const auto& s : scores) out.push_back(s.p[k]);
  return out;
}

std::vector<bool> label_column(const std::vector<LabelVector>& labels, std::size_t k) {
  std::vector<bool> out;
  out.reserve(labels.size());
  for (const auto& l : labels) out.push_back(l[k]);
  return out;
}

std::vector<double> no_finding_scores(const std::vector<ScoreVector>& scores) {
  std::vector<double> out;
  out.reserve(scores.size());
  for (const auto& s : scores) out.push_back(no_finding_score(s));
  return out;
}

}  // namespace

ThresholdSelection select_thresholds(const std::vector<ScoreVector>& scores, const std::vector<LabelVector>& labels) {
  if (scores.size() != labels.size()) throw ArgumentError("scores and labels differ in length");
  ThresholdSelection sel;
  auto pick = [&](std::span<const double> s, const std::vector<bool>& y, std::string_view name) {
    try {
      return select_threshold_f1(s, y).threshold;
    } catch (const UndefinedMetricError& e) {
      sel.notes.push_back(fmt::format("{}: {}; threshold set to 1", name, e.what()));
      return 1.0;
    }
  };
  for (std::size_t k = 0; k < kNumAbnormalities; ++k) {
    sel.thresholds.abnormal[k] = pick(column(scores, k), label_column(labels, k), kLabelNames[k]);
  }
  const std::size_t nf = index_of(Label::NoFinding);
  sel.thresholds.no_finding = pick(no_finding_scores(scores), label_column(labels, nf), kLabelNames[nf]);
  return sel;
}

LabelVector predict_labels(const ScoreVector& scores, const ThresholdSet& thresholds) {
  AbnormalityFlags flags{};
  for (std::size_t k = 0; k < kNumAbnormalities; ++k) flags[k] = scores.p[k] >= thresholds.abnormal[k];
  return LabelVector::from_abnormalities(flags);
}

SplitMetrics evaluate_split(const std::vector<ScoreVector>& scores, const std::vector<LabelVector>& labels,
                            const ThresholdSet& thresholds) {
  if (scores.size() != labels.size()) throw ArgumentError("scores and labels differ in length");
  for (double t : thresholds.abnormal) {
    if (!(t >= 0.0 && t <= 1.0)) throw ArgumentError("threshold outside [0, 1]");
  }
  if (!(thresholds.no_finding >= 0.0 && thresholds.no_finding <= 1.0)) {
    throw ArgumentError("No Finding threshold outside [0, 1]");
  }

  SplitMetrics m;
  m.test_count = scores.size();
  std::vector<LabelVector> predicted;
  predicted.reserve(scores.size());
  for (const auto& s : scores) predicted.push_back(predict_labels(s, thresholds));

  std::array<double, kNumAbnormalities> defined{};
  bool all_defined = true;
  Prf1 macro;
  for (std::size_t k = 0; k < kNumAbnormalities; ++k) {
    const auto s = column(scores, k);
    const auto y = label_column(labels, k);
    try {
      m.auroc[k] = auroc(s, y);
      defined[k] = *m.auroc[k];
    } catch (const UndefinedMetricError& e) {
      all_defined = false;
      m.notes.push_back(fmt::format("{}: {}", kLabelNames[k], e.what()));
    }
    m.per_label[k] = prf1(label_column(predicted, k), y);
    macro.precision += m.per_label[k].precision;
    macro.recall += m.per_label[k].recall;
    macro.f1 += m.per_label[k].f1;
  }
  if (all_defined) m.macro_auroc = macro_auroc(defined);
  const auto n = static_cast<double>(kNumAbnormalities);
  m.macro = {macro.precision / n, macro.recall / n, macro.f1 / n};

  const std::size_t nf = index_of(Label::NoFinding);
  const auto nf_scores = no_finding_scores(scores);
  const auto nf_labels = label_column(labels, nf);
  try {
    m.no_finding_auroc = auroc(nf_scores, nf_labels);
  } catch (const UndefinedMetricError& e) {
    m.notes.push_back(fmt::format("{}: {}", kLabelNames[nf], e.what()));
  }
  m.no_finding_complement = prf1(label_column(predicted, nf), nf_labels);
  std::vector<bool> nf_thresholded;
  nf_thresholded.reserve(nf_scores.size());
  for (double s : nf_scores) nf_thresholded.push_back(s >= thresholds.no_finding);
  m.no_finding_threshold = prf1(nf_thresholded, nf_labels);
  m.predicted_cooccurrence = cooccurrence(predicted);
  return m;
}

std::vector<NamedValue> flatten(const SplitMetrics& m) {
  std::vector<NamedValue> out;
  for (std::size_t k = 0; k < kNumAbnormalities; ++k) out.push_back({fmt::format("auroc_{}", kLabelKeys[k]), m.auroc[k]});
  out.push_back({"macro_auroc", m.macro_auroc});
  out.push_back({"no_finding_auroc", m.no_finding_auroc});
  for (std::size_t k = 0; k < kNumAbnormalities; ++k) {
    out.push_back({fmt::format("precision_{}", kLabelKeys[k]), m.per_label[k].precision});
    out.push_back({fmt::format("recall_{}", kLabelKeys[k]), m.per_label[k].recall});
    out.push_back({fmt::format("f1_{}", kLabelKeys[k]), m.per_label[k].f1});
  }
  out.push_back({"macro_precision", m.macro.precision});
  out.push_back({"macro_recall", m.macro.recall});
  out.push_back({"macro_f1", m.macro.f1});
  out.push_back({"no_finding_precision_complement", m.no_finding_complement.precision});
  out.push_back({"no_finding_recall_complement", m.no_finding_complement.recall});
  out.push_back({"no_finding_f1_complement", m.no_finding_complement.f1});
  out.push_back({"no_finding_precision_threshold", m.no_finding_threshold.precision});
  out.push_back({"no_finding_recall_threshold", m.no_finding_threshold.recall});
  out.push_back({"no_finding_f1_threshold", m.no_finding_threshold.f1});
  return out;
}

const MetricSummary* ExperimentReport::find(std::string_view name) const {
  for (const auto& s : summary) {
    if (s.name == name) return &s;
  }
  return nullptr;
}

ExperimentReport aggregate(const std::vector<SplitMetrics>& splits, const std::vector<std::uint64_t>& seeds) {
  if (splits.empty()) throw ArgumentError("aggregate needs at least one split");
  if (!seeds.empty() && seeds.size() != splits.size()) throw ArgumentError("one seed per split is required");
  ExperimentReport r;
  r.splits = splits;
  r.split_seeds = seeds;
  if (r.split_seeds.empty()) {
    for (std::size_t i = 0; i < splits.size(); ++i) r.split_seeds.push_back(i);
  }
  const auto first = flatten(splits.front());
  r.summary.resize(first.size());
  for (std::size_t j = 0; j < first.size(); ++j) r.summary[j].name = first[j].name;
  for (const auto& s : splits) {
    const auto flat = flatten(s);
    for (std::size_t j = 0; j < flat.size(); ++j) r.summary[j].values.push_back(flat[j].value);
  }
  for (auto& ms : r.summary) {
    std::vector<double> v;
    for (const auto& x : ms.values) {
      if (x) v.push_back(*x);
    }
    if (v.empty()) continue;
    // Averaging offsets from the first value keeps identical inputs exact.
    double offset = 0.0;
    for (double x : v) offset += x - v.front();
    const double mean = v.front() + offset / static_cast<double>(v.size());
    ms.mean = mean;
    if (v.size() >= 2) {
      double ss = 0.0;
      for (double x : v) ss += (x - mean) * (x - mean);
      ms.stddev = std::sqrt(ss / static_cast<double>(v.size() - 1));
    }
  }
  return r;
}

}  // namespace cxrseg
