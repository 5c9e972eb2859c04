#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "cxrseg/labels.hpp"

namespace cxrseg {

struct ManifestRecord {
  std::string image_id;
  std::set<std::string> labels;
};

/// Reads a metadata CSV with "Image Index" and "Finding Labels" columns;
/// labels are '|'-separated. Other columns are ignored.
std::vector<ManifestRecord> parse_manifest(std::string_view csv_text);

struct CuratedRecord {
  std::string image_id;
  LabelVector labels;
};

struct CuratedDataset {
  std::vector<CuratedRecord> records;  // manifest order, unique ids
  std::uint64_t seed = 0;
  std::size_t per_label_cap = 0;
  /// Images drawn from each label's candidate pool (before deduplication).
  std::array<std::size_t, kNumLabels> drawn{};
  /// Size of each label's candidate pool.
  std::array<std::size_t, kNumLabels> pool_size{};
};

inline constexpr std::size_t kDefaultPerLabelCap = 2000;

/// Samples up to `cap` images from each label's pool without replacement, merges
/// the draws, and drops duplicates. An abnormality pool holds every record
/// carrying that label (other labels allowed); the No Finding pool holds records
/// labeled exactly {No Finding}. Throws CurationError when a pool is empty.
CuratedDataset curate(const std::vector<ManifestRecord>& records, std::size_t cap, std::uint64_t seed);

/// Per-label prevalence of a curated dataset.
std::array<std::size_t, kNumLabels> label_counts(const CuratedDataset& ds);

struct SplitFractions {
  double train = 0.70;
  double validation = 0.15;
  double test = 0.15;
};

enum class SplitRole { Train, Validation, Test };

std::string_view split_role_name(SplitRole r) noexcept;

struct SplitAssignment {
  std::uint64_t seed = 0;
  std::vector<std::string> train;
  std::vector<std::string> validation;
  std::vector<std::string> test;
};

struct SplitSizes {
  std::size_t train = 0;
  std::size_t validation = 0;
  std::size_t test = 0;
  friend bool operator==(const SplitSizes&, const SplitSizes&) = default;
};

/// round(train * n), round(validation * n), remainder.
SplitSizes split_sizes(std::size_t n, const SplitFractions& fractions = {});

/// Seeded shuffle of the curated ids, cut by split_sizes. Needs at least 3 images.
SplitAssignment split(const CuratedDataset& ds, const SplitFractions& fractions, std::uint64_t seed);
SplitAssignment split_ids(const std::vector<std::string>& ids, const SplitFractions& fractions,
                          std::uint64_t seed);

/// Symmetric label-by-label joint counts; the diagonal is per-label prevalence.
struct CooccurrenceMatrix {
  std::array<std::array<std::size_t, kNumLabels>, kNumLabels> counts{};

  std::size_t operator()(std::size_t i, std::size_t j) const { return counts[i][j]; }
  friend bool operator==(const CooccurrenceMatrix&, const CooccurrenceMatrix&) = default;
};

CooccurrenceMatrix cooccurrence(const std::vector<LabelVector>& labels);

std::string cooccurrence_csv(const CooccurrenceMatrix& m);

/// Curated manifest: image_id, six 0/1 flag columns named by label, then one
/// split column per assignment ("split_<seed>").
std::string curated_csv(const CuratedDataset& ds, const std::vector<SplitAssignment>& splits);

/// Parsed curated manifest (the inverse of curated_csv).
struct CuratedManifest {
  std::vector<CuratedRecord> records;
  std::vector<std::uint64_t> split_seeds;
  /// roles[s][i] is the role of records[i] under split_seeds[s].
  std::vector<std::vector<SplitRole>> roles;

  SplitAssignment assignment(std::size_t split_index) const;
};

CuratedManifest parse_curated_csv(std::string_view csv_text);

}  // namespace cxrseg
