#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "cli/config.hpp"
#include "cli/report_io.hpp"
#include "cxrseg/curation.hpp"
#include "cxrseg/metrics.hpp"
#include "cxrseg/stats.hpp"

namespace cxrseg::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInternal = 1;
inline constexpr int kExitUser = 2;

struct CurateOutputs {
  CuratedDataset dataset;
  std::vector<SplitAssignment> splits;
  CooccurrenceMatrix cooccurrence;
};

/// Writes <output_dir>/curated.csv, cooccurrence.csv, and curation_summary.csv.
CurateOutputs cmd_curate(const PipelineConfig& cfg, std::ostream& log);

struct MaskSummary {
  std::size_t written = 0;  // masked image files written
  std::size_t processed = 0;
  std::size_t skipped = 0;  // no mask available
  std::size_t failed = 0;   // unreadable image or mismatched mask
};

/// Writes <output_dir>/masked/{tight,loose}/<stem>.png per source image and mask_report.csv.
MaskSummary cmd_mask(const PipelineConfig& cfg, std::ostream& log);

/// Trains (or ingests external scores) per split seed, selects thresholds on
/// validation, evaluates on test, and writes the report directory.
ExperimentReport cmd_train_eval(const PipelineConfig& cfg, std::ostream& log);

/// Paired t-tests on macro and No Finding AUROC plus Mantel tests between the
/// pooled predicted co-occurrence matrices and against the dataset matrix.
/// Throws ArgumentError when the reports do not share split seeds in order.
std::vector<StatRow> cmd_compare(const StoredReport& a, const StoredReport& b, double alpha,
                                 std::size_t mantel_permutations = kDefaultMantelPermutations,
                                 std::uint64_t seed = 0);

/// Entry point shared by the executable and the tests. Returns the exit code.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Where masked outputs for a variant live.
std::filesystem::path variant_dir(const PipelineConfig& cfg, MaskVariant v);

/// File name a masked image is stored under: the id's stem plus ".png".
std::string masked_file_name(const std::string& image_id);

}  // namespace cxrseg::cli
