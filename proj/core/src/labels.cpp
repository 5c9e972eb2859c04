#include "cxrseg/labels.hpp"

#include "cxrseg/error.hpp"

namespace cxrseg {

std::optional<Label> parse_label(std::string_view name) noexcept {
  for (std::size_t i = 0; i < kNumLabels; ++i) {
    if (kLabelNames[i] == name) return static_cast<Label>(i);
  }
  return std::nullopt;
}

LabelVector::LabelVector(const std::array<bool, kNumLabels>& flags) : flags_(flags) {
  if (flags_[index_of(Label::NoFinding)] && any_abnormality()) {
    throw ArgumentError("No Finding cannot be combined with an abnormality label");
  }
}

LabelVector LabelVector::from_abnormalities(const std::array<bool, kNumAbnormalities>& abn) {
  std::array<bool, kNumLabels> f{};
  bool any = false;
  for (std::size_t k = 0; k < kNumAbnormalities; ++k) {
    f[k] = abn[k];
    any = any || abn[k];
  }
  f[index_of(Label::NoFinding)] = !any;
  return LabelVector(f);
}

bool LabelVector::any_abnormality() const noexcept {
  for (std::size_t k = 0; k < kNumAbnormalities; ++k) {
    if (flags_[k]) return true;
  }
  return false;
}

}  // namespace cxrseg
