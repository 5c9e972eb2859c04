#pragma once

#include <string>
#include <utility>
#include <vector>

#include "cxrseg/metrics.hpp"

namespace cxrseg {

/// One row per split: split_seed followed by every flattened metric. Undefined values are "NA".
std::string split_metrics_csv(const ExperimentReport& report);

/// metric,mean,std,defined_splits. std is empty with fewer than two defined values.
std::string summary_csv(const ExperimentReport& report);

using ReportColumn = std::pair<std::string, const ExperimentReport*>;

/// AUROC x 100 per abnormality, macro AUROC, and No Finding AUROC, one column
/// per report, formatted "mean ± std".
std::string auroc_table_text(const std::vector<ReportColumn>& columns);

/// Macro P/R/F1 over the abnormalities and No Finding P/R/F1 under both
/// derivation rules, three decimals.
std::string threshold_table_text(const std::vector<ReportColumn>& columns);

/// fpr,tpr rows.
std::string roc_csv(const RocCurve& curve);

}  // namespace cxrseg
