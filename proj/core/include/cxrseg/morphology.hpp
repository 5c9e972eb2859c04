#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "cxrseg/imaging.hpp"

namespace cxrseg {

/// Boolean raster aligned to an image, row-major. One byte per pixel (0 or 1).
class BinaryMask {
 public:
  BinaryMask() = default;
  BinaryMask(std::size_t width, std::size_t height, bool fill = false);
  /// Any nonzero entry of `bits` is taken as true.
  BinaryMask(std::size_t width, std::size_t height, std::vector<std::uint8_t> bits);

  std::size_t width() const noexcept { return width_; }
  std::size_t height() const noexcept { return height_; }
  std::size_t size() const noexcept { return bits_.size(); }

  bool at(std::size_t x, std::size_t y) const { return bits_[y * width_ + x] != 0; }
  void set(std::size_t x, std::size_t y, bool v) { bits_[y * width_ + x] = v ? 1 : 0; }
  std::span<const std::uint8_t> bits() const noexcept { return bits_; }

  std::size_t count() const noexcept;
  bool same_shape(const BinaryMask& other) const noexcept {
    return width_ == other.width_ && height_ == other.height_;
  }

  friend bool operator==(const BinaryMask&, const BinaryMask&) = default;

 private:
  std::size_t width_ = 0;
  std::size_t height_ = 0;
  std::vector<std::uint8_t> bits_;
};

BinaryMask complement(const BinaryMask& m);
/// True when every true pixel of `inner` is true in `outer`. Shapes must match.
bool is_subset(const BinaryMask& inner, const BinaryMask& outer);

struct Offset {
  int dx = 0;
  int dy = 0;
  friend bool operator==(const Offset&, const Offset&) = default;
};

/// Euclidean disk: every integer offset with dx^2 + dy^2 <= radius^2.
struct DiskSE {
  int radius = 0;
  std::vector<Offset> offsets;
  /// Half-width of the disk's row at vertical offset dy, for |dy| <= radius.
  int half_width(int dy) const;
};

DiskSE disk_se(int radius);

/// Output pixel is true iff every offset lands on a true pixel; pixels outside
/// the image count as false, so masks shrink away from the border.
BinaryMask erode(const BinaryMask& mask, const DiskSE& se);

/// Output pixel is true iff some offset lands on a true pixel; clipped at the border.
BinaryMask dilate(const BinaryMask& mask, const DiskSE& se);

struct MaskVariants {
  BinaryMask refined;  // eroded raw mask
  BinaryMask tight;    // refined dilated by the small radius (M-15)
  BinaryMask loose;    // refined dilated by the large radius (M-50)
};

struct ExpansionRadii {
  int erode = 5;
  int tight = 15;
  int loose = 50;
};

/// Erode once, then dilate the eroded mask independently with each radius.
MaskVariants expand_mask(const BinaryMask& raw, const ExpansionRadii& radii = {});

/// Copies pixels under the mask and zeroes the rest. Shapes must match.
GrayImage apply_mask(const GrayImage& img, const BinaryMask& mask);

/// 8-bit PNG, 0 = background, 255 = foreground.
std::vector<std::uint8_t> encode_mask_png(const BinaryMask& mask);

}  // namespace cxrseg
