#include "cxrseg/report.hpp"

#include <algorithm>

#include <fmt/format.h>

#include "cxrseg/error.hpp"

namespace cxrseg {

namespace {

std::string number(const std::optional<double>& v) { return v ? fmt::format("{:.17g}", *v) : "NA"; }

std::string mean_std(const MetricSummary* s, double scale, int decimals) {
  if (!s || !s->mean) return "NA";
  if (!s->stddev) return fmt::format("{:.{}f}", *s->mean * scale, decimals);
  return fmt::format("{:.{}f} ± {:.{}f}", *s->mean * scale, decimals, *s->stddev * scale, decimals);
}

// Display width: "±" is two bytes in UTF-8 but one column.
std::size_t display_width(const std::string& s) {
  std::size_t w = 0;
  for (unsigned char c : s) w += (c & 0xC0) != 0x80 ? 1 : 0;
  return w;
}

std::string pad(const std::string& s, std::size_t width) {
  return s + std::string(width > display_width(s) ? width - display_width(s) : 0, ' ');
}

std::string render(const std::string& corner, const std::vector<ReportColumn>& columns,
                   const std::vector<std::pair<std::string, std::vector<std::string>>>& rows) {
  std::vector<std::size_t> widths(columns.size() + 1, display_width(corner));
  for (const auto& [label, cells] : rows) widths[0] = std::max(widths[0], display_width(label));
  for (std::size_t c = 0; c < columns.size(); ++c) {
    widths[c + 1] = display_width(columns[c].first);
    for (const auto& row : rows) widths[c + 1] = std::max(widths[c + 1], display_width(row.second[c]));
  }
  std::string out = pad(corner, widths[0]);
  for (std::size_t c = 0; c < columns.size(); ++c) out += "  " + pad(columns[c].first, widths[c + 1]);
  out += '\n';
  std::size_t total = widths[0];
  for (std::size_t c = 1; c < widths.size(); ++c) total += 2 + widths[c];
  out += std::string(total, '-') + '\n';
  for (const auto& [label, cells] : rows) {
    out += pad(label, widths[0]);
    for (std::size_t c = 0; c < cells.size(); ++c) out += "  " + pad(cells[c], widths[c + 1]);
    out += '\n';
  }
  return out;
}

void check_columns(const std::vector<ReportColumn>& columns) {
  if (columns.empty()) throw ArgumentError("a table needs at least one report column");
  for (const auto& c : columns) {
    if (!c.second) throw ArgumentError("null report in table column " + c.first);
  }
}

}  // namespace

std::string split_metrics_csv(const ExperimentReport& report) {
  std::string out = "split_seed";
  for (const auto& s : report.summary) out += "," + s.name;
  out += '\n';
  for (std::size_t i = 0; i < report.splits.size(); ++i) {
    out += fmt::format("{}", report.split_seeds.at(i));
    for (const auto& s : report.summary) out += "," + number(s.values.at(i));
    out += '\n';
  }
  return out;
}

std::string summary_csv(const ExperimentReport& report) {
  std::string out = "metric,mean,std,defined_splits\n";
  for (const auto& s : report.summary) {
    const auto defined = std::count_if(s.values.begin(), s.values.end(), [](const auto& v) { return v.has_value(); });
    out += fmt::format("{},{},{},{}\n", s.name, number(s.mean), s.stddev ? number(s.stddev) : "", defined);
  }
  return out;
}

std::string auroc_table_text(const std::vector<ReportColumn>& columns) {
  check_columns(columns);
  std::vector<std::pair<std::string, std::vector<std::string>>> rows;
  auto add = [&](std::string label, const std::string& metric) {
    std::vector<std::string> cells;
    for (const auto& c : columns) cells.push_back(mean_std(c.second->find(metric), 100.0, 1));
    rows.emplace_back(std::move(label), std::move(cells));
  };
  for (std::size_t k = 0; k < kNumAbnormalities; ++k) {
    add(std::string(kLabelNames[k]), fmt::format("auroc_{}", kLabelKeys[k]));
  }
  add("Macro AUROC", "macro_auroc");
  add("No Finding", "no_finding_auroc");
  return render("Label", columns, rows);
}

std::string threshold_table_text(const std::vector<ReportColumn>& columns) {
  check_columns(columns);
  std::vector<std::pair<std::string, std::vector<std::string>>> rows;
  auto add = [&](std::string label, const std::string& metric) {
    std::vector<std::string> cells;
    for (const auto& c : columns) cells.push_back(mean_std(c.second->find(metric), 1.0, 3));
    rows.emplace_back(std::move(label), std::move(cells));
  };
  add("Macro P", "macro_precision");
  add("Macro R", "macro_recall");
  add("Macro F1", "macro_f1");
  add("No Finding P (complement rule)", "no_finding_precision_complement");
  add("No Finding R (complement rule)", "no_finding_recall_complement");
  add("No Finding F1 (complement rule)", "no_finding_f1_complement");
  add("No Finding P (score threshold)", "no_finding_precision_threshold");
  add("No Finding R (score threshold)", "no_finding_recall_threshold");
  add("No Finding F1 (score threshold)", "no_finding_f1_threshold");
  return render("Metric", columns, rows);
}

std::string roc_csv(const RocCurve& curve) {
  std::string out = "fpr,tpr\n";
  for (const auto& p : curve.points) out += fmt::format("{:.17g},{:.17g}\n", p.fpr, p.tpr);
  return out;
}

}  // namespace cxrseg
