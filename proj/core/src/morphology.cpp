#include "cxrseg/morphology.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "cxrseg/codec.hpp"
#include "cxrseg/error.hpp"

namespace cxrseg {

BinaryMask::BinaryMask(std::size_t width, std::size_t height, bool fill)
    : width_(width), height_(height), bits_(width * height, fill ? 1 : 0) {
  if (width == 0 || height == 0) throw ArgumentError("mask dimensions must be positive");
}

BinaryMask::BinaryMask(std::size_t width, std::size_t height, std::vector<std::uint8_t> bits)
    : width_(width), height_(height), bits_(std::move(bits)) {
  if (width == 0 || height == 0) throw ArgumentError("mask dimensions must be positive");
  if (bits_.size() != width * height) throw ArgumentError("mask bit count does not match dimensions");
  for (auto& b : bits_) b = b ? 1 : 0;
}

std::size_t BinaryMask::count() const noexcept {
  return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), std::uint8_t{1}));
}

BinaryMask complement(const BinaryMask& m) {
  std::vector<std::uint8_t> bits(m.bits().begin(), m.bits().end());
  for (auto& b : bits) b = b ? 0 : 1;
  return BinaryMask(m.width(), m.height(), std::move(bits));
}

bool is_subset(const BinaryMask& inner, const BinaryMask& outer) {
  if (!inner.same_shape(outer)) throw ArgumentError("mask shapes differ");
  const auto a = inner.bits();
  const auto b = outer.bits();
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] && !b[i]) return false;
  }
  return true;
}

int DiskSE::half_width(int dy) const {
  const long rem = static_cast<long>(radius) * radius - static_cast<long>(dy) * dy;
  auto hw = static_cast<int>(std::sqrt(static_cast<double>(rem)));
  // Guard the floating sqrt against off-by-one at perfect squares.
  while (static_cast<long>(hw + 1) * (hw + 1) <= rem) ++hw;
  while (static_cast<long>(hw) * hw > rem) --hw;
  return hw;
}

DiskSE disk_se(int radius) {
  if (radius < 0) throw ArgumentError("disk radius must be non-negative");
  DiskSE se;
  se.radius = radius;
  for (int dy = -radius; dy <= radius; ++dy) {
    const int hw = se.half_width(dy);
    for (int dx = -hw; dx <= hw; ++dx) se.offsets.push_back({dx, dy});
  }
  return se;
}

namespace {

// Per-row inclusive prefix counts: prefix[y][x + 1] = number of true pixels in row y before column x+1.
std::vector<std::uint32_t> row_prefix(const BinaryMask& m) {
  const std::size_t w = m.width();
  std::vector<std::uint32_t> prefix((w + 1) * m.height(), 0);
  const auto bits = m.bits();
  for (std::size_t y = 0; y < m.height(); ++y) {
    std::uint32_t* p = prefix.data() + y * (w + 1);
    for (std::size_t x = 0; x < w; ++x) p[x + 1] = p[x] + bits[y * w + x];
  }
  return prefix;
}

}  // namespace

// Both operations decompose the disk into horizontal runs, one per dy, and test
// each run in O(1) with row prefix sums.
BinaryMask erode(const BinaryMask& mask, const DiskSE& se) {
  const auto w = static_cast<long>(mask.width());
  const auto h = static_cast<long>(mask.height());
  const auto prefix = row_prefix(mask);
  std::vector<int> hw(2 * se.radius + 1);
  for (int dy = -se.radius; dy <= se.radius; ++dy) hw[dy + se.radius] = se.half_width(dy);

  std::vector<std::uint8_t> out(mask.size(), 0);
  for (long y = 0; y < h; ++y) {
    if (y - se.radius < 0 || y + se.radius >= h) continue;
    for (long x = 0; x < w; ++x) {
      if (!mask.at(static_cast<std::size_t>(x), static_cast<std::size_t>(y))) continue;
      bool keep = true;
      for (int dy = -se.radius; dy <= se.radius && keep; ++dy) {
        const int r = hw[dy + se.radius];
        if (x - r < 0 || x + r >= w) {
          keep = false;
          break;
        }
        const std::uint32_t* p = prefix.data() + (y + dy) * (w + 1);
        keep = p[x + r + 1] - p[x - r] == static_cast<std::uint32_t>(2 * r + 1);
      }
      out[y * w + x] = keep ? 1 : 0;
    }
  }
  return BinaryMask(mask.width(), mask.height(), std::move(out));
}

BinaryMask dilate(const BinaryMask& mask, const DiskSE& se) {
  const auto w = static_cast<long>(mask.width());
  const auto h = static_cast<long>(mask.height());
  const auto prefix = row_prefix(mask);
  std::vector<int> hw(2 * se.radius + 1);
  for (int dy = -se.radius; dy <= se.radius; ++dy) hw[dy + se.radius] = se.half_width(dy);

  std::vector<std::uint8_t> out(mask.size(), 0);
  for (long y = 0; y < h; ++y) {
    const int dy_lo = static_cast<int>(std::max<long>(-se.radius, -y));
    const int dy_hi = static_cast<int>(std::min<long>(se.radius, h - 1 - y));
    for (long x = 0; x < w; ++x) {
      bool hit = false;
      for (int dy = dy_lo; dy <= dy_hi && !hit; ++dy) {
        const int r = hw[dy + se.radius];
        const long lo = std::max<long>(0, x - r);
        const long hi = std::min<long>(w - 1, x + r);
        const std::uint32_t* p = prefix.data() + (y + dy) * (w + 1);
        hit = p[hi + 1] > p[lo];
      }
      out[y * w + x] = hit ? 1 : 0;
    }
  }
  return BinaryMask(mask.width(), mask.height(), std::move(out));
}

MaskVariants expand_mask(const BinaryMask& raw, const ExpansionRadii& radii) {
  MaskVariants v;
  v.refined = erode(raw, disk_se(radii.erode));
  v.tight = dilate(v.refined, disk_se(radii.tight));
  v.loose = dilate(v.refined, disk_se(radii.loose));
  return v;
}

GrayImage apply_mask(const GrayImage& img, const BinaryMask& mask) {
  if (img.width() != mask.width() || img.height() != mask.height()) {
    throw ArgumentError("mask " + std::to_string(mask.width()) + "x" + std::to_string(mask.height()) +
                        " does not match image " + std::to_string(img.width()) + "x" +
                        std::to_string(img.height()));
  }
  std::vector<double> out(img.pixels().begin(), img.pixels().end());
  const auto bits = mask.bits();
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (!bits[i]) out[i] = 0.0;
  }
  return GrayImage(img.width(), img.height(), std::move(out));
}

std::vector<std::uint8_t> encode_mask_png(const BinaryMask& mask) {
  codec::RawImage raw;
  raw.width = static_cast<std::uint32_t>(mask.width());
  raw.height = static_cast<std::uint32_t>(mask.height());
  raw.channels = 1;
  raw.bit_depth = 8;
  raw.samples.reserve(mask.size());
  for (auto b : mask.bits()) raw.samples.push_back(b ? 255 : 0);
  return codec::encode_png(raw);
}

}  // namespace cxrseg
