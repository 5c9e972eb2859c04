#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>

#include "cxrseg/imaging.hpp"
#include "cxrseg/morphology.hpp"

namespace cxrseg {

/// Inclusive pixel rectangle used to prompt a segmenter.
struct BoxPrompt {
  std::size_t x0 = 0;
  std::size_t y0 = 0;
  std::size_t x1 = 0;
  std::size_t y1 = 0;

  /// 0 <= x0 < x1 < width and 0 <= y0 < y1 < height.
  bool valid_for(std::size_t width, std::size_t height) const noexcept;
  bool contains(std::size_t x, std::size_t y) const noexcept {
    return x >= x0 && x <= x1 && y >= y0 && y <= y1;
  }
  friend bool operator==(const BoxPrompt&, const BoxPrompt&) = default;
};

/// Box inset from the image border by `margin_fraction` of each side.
BoxPrompt inset_box(std::size_t width, std::size_t height, double margin_fraction);

/// Shifts each edge by an independent integer in [-max_shift, max_shift], then
/// clamps x0 to [0, w-2] and x1 to [x0+1, w-1] (likewise for y). Draw
/// `draw_index` of the stream keyed by `seed`.
BoxPrompt jitter_box(const BoxPrompt& box, int max_shift, std::size_t width, std::size_t height,
                     std::uint64_t seed, std::uint64_t draw_index);

/// Decodes a mask PNG (nonzero = foreground) and checks its dimensions.
/// `source_name` appears in the IngestionError raised on a mismatch.
BinaryMask load_mask(std::span<const std::uint8_t> bytes, std::size_t expected_width,
                     std::size_t expected_height, const std::string& source_name);

inline constexpr double kFallbackThreshold = 0.4;

/// Stand-in lung segmenter: pixels inside the box darker than `threshold`.
BinaryMask fallback_segment(const GrayImage& img, const BoxPrompt& box, double threshold = kFallbackThreshold);

}  // namespace cxrseg
