#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cxrseg/curation.hpp"
#include "cxrseg/metrics.hpp"

namespace cxrseg::cli {

/// The machine-readable half of a train-eval run, consumed by `compare`.
struct StoredReport {
  std::string name;
  std::vector<std::uint64_t> split_seeds;
  std::map<std::string, std::vector<std::optional<double>>> metrics;
  std::vector<CooccurrenceMatrix> predicted_cooccurrence;  // one per split
  CooccurrenceMatrix dataset_cooccurrence;
  std::vector<std::string> notes;

  /// Element-wise sum of the per-split predicted matrices.
  CooccurrenceMatrix pooled_predicted() const;
};

StoredReport to_stored(const std::string& name, const ExperimentReport& report, const CooccurrenceMatrix& dataset);

std::string report_json(const StoredReport& report);
StoredReport parse_report_json(std::string_view text);
StoredReport load_report(const std::filesystem::path& path);

}  // namespace cxrseg::cli
