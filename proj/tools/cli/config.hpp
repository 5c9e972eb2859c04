#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "cxrseg/curation.hpp"
#include "cxrseg/error.hpp"
#include "cxrseg/imaging.hpp"
#include "cxrseg/model.hpp"
#include "cxrseg/morphology.hpp"
#include "cxrseg/segmenter.hpp"

namespace cxrseg::cli {

/// Bad or inconsistent user configuration; maps to exit code 2.
class ConfigError : public Error {
 public:
  using Error::Error;
};

enum class MaskVariant { None, Tight, Loose };

std::string_view variant_name(MaskVariant v) noexcept;
MaskVariant parse_variant(std::string_view s);

struct PipelineConfig {
  std::filesystem::path manifest;
  std::filesystem::path image_dir;
  std::filesystem::path mask_dir;
  std::filesystem::path output_dir = "cxrseg_out";
  std::filesystem::path curated_manifest;  // defaults to <output_dir>/curated.csv
  /// May contain "{seed}", replaced by each split seed.
  std::string external_scores;
  std::string report_name;  // defaults to the variant name, or "external"

  std::uint64_t seed = 0;
  std::size_t curation_cap = kDefaultPerLabelCap;
  ExpansionRadii radii;
  MaskVariant variant = MaskVariant::None;
  TrainConfig train;
  AugmentationConfig augmentation;
  std::vector<std::uint64_t> split_seeds = {0, 1, 2, 3, 4};
  SplitFractions split_fractions;
  double alpha = 0.05;
  bool fallback_segmenter = false;
  double fallback_threshold = kFallbackThreshold;
  double fallback_box_margin = 0.05;
  std::size_t workers = 1;
  std::size_t mantel_permutations = 10000;

  std::filesystem::path curated_path() const;
  std::filesystem::path report_dir() const;
  std::string effective_report_name() const;
};

/// Parses the JSON document. Unknown keys are rejected.
PipelineConfig parse_config(std::string_view json_text);
PipelineConfig load_config(const std::filesystem::path& path);

/// Checks invariants: non-empty split seeds, non-negative radii, input paths
/// that are set must exist. Throws ConfigError.
void validate(const PipelineConfig& cfg);

/// JSON key reference, published in the README.
std::string config_reference();

}  // namespace cxrseg::cli

