#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string_view>

namespace cxrseg {

/// Fixed label order used by every file and vector in the pipeline.
enum class Label : std::size_t { Mass = 0, Nodule, Pneumonia, Edema, Fibrosis, NoFinding };

inline constexpr std::size_t kNumLabels = 6;
inline constexpr std::size_t kNumAbnormalities = 5;

inline constexpr std::array<std::string_view, kNumLabels> kLabelNames = {
    "Mass", "Nodule", "Pneumonia", "Edema", "Fibrosis", "No Finding"};

/// Lower-case, underscore-separated names for CSV columns and file names.
inline constexpr std::array<std::string_view, kNumLabels> kLabelKeys = {
    "mass", "nodule", "pneumonia", "edema", "fibrosis", "no_finding"};

constexpr std::size_t index_of(Label l) noexcept { return static_cast<std::size_t>(l); }

/// Exact match against kLabelNames.
std::optional<Label> parse_label(std::string_view name) noexcept;

/// Six flags in the fixed order. No Finding excludes every abnormality.
class LabelVector {
 public:
  LabelVector() = default;
  /// Throws ArgumentError if No Finding is set together with an abnormality.
  explicit LabelVector(const std::array<bool, kNumLabels>& flags);

  /// Abnormality flags only; No Finding is set iff none are true.
  static LabelVector from_abnormalities(const std::array<bool, kNumAbnormalities>& abn);

  bool operator[](std::size_t i) const { return flags_[i]; }
  bool has(Label l) const { return flags_[index_of(l)]; }
  const std::array<bool, kNumLabels>& flags() const noexcept { return flags_; }
  bool any_abnormality() const noexcept;

  friend bool operator==(const LabelVector&, const LabelVector&) = default;

 private:
  std::array<bool, kNumLabels> flags_{};
};

}  // namespace cxrseg
