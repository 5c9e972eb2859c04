#include "cxrseg/imaging.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iterator>
#include <numbers>
#include <string>

#include "cxrseg/codec.hpp"
#include "cxrseg/error.hpp"
#include "cxrseg/rng.hpp"

namespace cxrseg {

namespace {

void check_unit_range(std::span<const double> px) {
  for (double v : px) {
    if (!(v >= 0.0 && v <= 1.0)) throw ArgumentError("pixel intensity outside [0, 1]");
  }
}

// Bilinear sample at (sx, sy), both already inside [0, w-1] x [0, h-1].
double bilinear(const GrayImage& img, double sx, double sy) {
  const std::size_t w = img.width();
  const std::size_t h = img.height();
  const auto x0 = static_cast<std::size_t>(std::floor(sx));
  const auto y0 = static_cast<std::size_t>(std::floor(sy));
  const std::size_t x1 = std::min(x0 + 1, w - 1);
  const std::size_t y1 = std::min(y0 + 1, h - 1);
  const double fx = sx - static_cast<double>(x0);
  const double fy = sy - static_cast<double>(y0);
  const double top = (1.0 - fx) * img.at(x0, y0) + fx * img.at(x1, y0);
  const double bottom = (1.0 - fx) * img.at(x0, y1) + fx * img.at(x1, y1);
  return std::clamp((1.0 - fy) * top + fy * bottom, 0.0, 1.0);
}

constexpr std::uint64_t kAugmentationStream = 0x6175676dULL;  // "augm"

}  // namespace

GrayImage::GrayImage(std::size_t width, std::size_t height, double fill)
    : width_(width), height_(height) {
  if (width == 0 || height == 0) throw ArgumentError("image dimensions must be positive");
  if (!(fill >= 0.0 && fill <= 1.0)) throw ArgumentError("fill intensity outside [0, 1]");
  pixels_.assign(width * height, fill);
}

GrayImage::GrayImage(std::size_t width, std::size_t height, std::vector<double> pixels)
    : width_(width), height_(height), pixels_(std::move(pixels)) {
  if (width == 0 || height == 0) throw ArgumentError("image dimensions must be positive");
  if (pixels_.size() != width * height) {
    throw ArgumentError("pixel count " + std::to_string(pixels_.size()) + " does not match " +
                        std::to_string(width) + "x" + std::to_string(height));
  }
  check_unit_range(pixels_);
}

GrayImage decode_image(std::span<const std::uint8_t> bytes) {
  const codec::RawImage raw = codec::decode(bytes);
  const double max_value = raw.max_value();
  std::vector<double> px(static_cast<std::size_t>(raw.width) * raw.height);
  for (std::uint32_t y = 0; y < raw.height; ++y) {
    for (std::uint32_t x = 0; x < raw.width; ++x) {
      double v = 0.0;
      if (raw.channels <= 2) {
        v = raw.at(x, y, 0) / max_value;
      } else {
        const std::uint16_t r = raw.at(x, y, 0);
        const std::uint16_t g = raw.at(x, y, 1);
        const std::uint16_t b = raw.at(x, y, 2);
        // Identical channels are taken verbatim so gray-in-RGB files decode exactly.
        v = (r == g && g == b) ? r / max_value : (0.299 * r + 0.587 * g + 0.114 * b) / max_value;
      }
      px[static_cast<std::size_t>(y) * raw.width + x] = std::clamp(v, 0.0, 1.0);
    }
  }
  return GrayImage(raw.width, raw.height, std::move(px));
}

namespace {

codec::RawImage to_raw(const GrayImage& img, std::uint32_t depth) {
  codec::RawImage raw;
  raw.width = static_cast<std::uint32_t>(img.width());
  raw.height = static_cast<std::uint32_t>(img.height());
  raw.channels = 1;
  raw.bit_depth = depth;
  const double max_value = raw.max_value();
  raw.samples.reserve(img.size());
  for (double v : img.pixels()) {
    raw.samples.push_back(static_cast<std::uint16_t>(std::lround(v * max_value)));
  }
  return raw;
}

}  // namespace

std::vector<std::uint8_t> encode_png(const GrayImage& img) { return codec::encode_png(to_raw(img, 8)); }

std::vector<std::uint8_t> encode_png16(const GrayImage& img) { return codec::encode_png(to_raw(img, 16)); }

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IngestionError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error("write failed for " + path.string());
}

GrayImage load_image(const std::filesystem::path& path) {
  const auto bytes = read_file(path);
  try {
    return decode_image(bytes);
  } catch (const DecodeError& e) {
    throw DecodeError(path.string() + ": " + e.what(), e.offset());
  }
}

void save_png(const std::filesystem::path& path, const GrayImage& img) { write_file(path, encode_png(img)); }

GrayImage resize(const GrayImage& img, std::size_t width, std::size_t height) {
  if (width == 0 || height == 0) throw ArgumentError("resize target dimensions must be positive");
  if (width == img.width() && height == img.height()) return img;
  const double sx_scale = static_cast<double>(img.width()) / static_cast<double>(width);
  const double sy_scale = static_cast<double>(img.height()) / static_cast<double>(height);
  const double max_x = static_cast<double>(img.width() - 1);
  const double max_y = static_cast<double>(img.height() - 1);
  std::vector<double> out(width * height);
  for (std::size_t y = 0; y < height; ++y) {
    const double sy = std::clamp((static_cast<double>(y) + 0.5) * sy_scale - 0.5, 0.0, max_y);
    for (std::size_t x = 0; x < width; ++x) {
      const double sx = std::clamp((static_cast<double>(x) + 0.5) * sx_scale - 0.5, 0.0, max_x);
      out[y * width + x] = bilinear(img, sx, sy);
    }
  }
  return GrayImage(width, height, std::move(out));
}

GrayImage horizontal_flip(const GrayImage& img) {
  std::vector<double> out(img.pixels().begin(), img.pixels().end());
  for (std::size_t y = 0; y < img.height(); ++y) {
    std::reverse(out.begin() + static_cast<std::ptrdiff_t>(y * img.width()),
                 out.begin() + static_cast<std::ptrdiff_t>((y + 1) * img.width()));
  }
  return GrayImage(img.width(), img.height(), std::move(out));
}

GrayImage rotate(const GrayImage& img, double degrees) {
  if (!(std::abs(degrees) <= 45.0)) throw ArgumentError("rotation is limited to +/-45 degrees");
  if (degrees == 0.0) return img;
  const double theta = degrees * std::numbers::pi / 180.0;
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  const double cx = (static_cast<double>(img.width()) - 1.0) / 2.0;
  const double cy = (static_cast<double>(img.height()) - 1.0) / 2.0;
  const double max_x = static_cast<double>(img.width() - 1);
  const double max_y = static_cast<double>(img.height() - 1);
  constexpr double kEdge = 1e-9;
  std::vector<double> out(img.size(), 0.0);
  for (std::size_t y = 0; y < img.height(); ++y) {
    const double dy = static_cast<double>(y) - cy;
    for (std::size_t x = 0; x < img.width(); ++x) {
      const double dx = static_cast<double>(x) - cx;
      // Inverse mapping: where does this output pixel come from?
      const double sx = cx + c * dx + s * dy;
      const double sy = cy - s * dx + c * dy;
      if (sx < -kEdge || sy < -kEdge || sx > max_x + kEdge || sy > max_y + kEdge) continue;
      out[y * img.width() + x] = bilinear(img, std::clamp(sx, 0.0, max_x), std::clamp(sy, 0.0, max_y));
    }
  }
  return GrayImage(img.width(), img.height(), std::move(out));
}

GrayImage perturb_intensity(const GrayImage& img, double factor, double max_fraction) {
  if (!(factor >= 1.0 - max_fraction && factor <= 1.0 + max_fraction)) {
    throw ArgumentError("intensity factor " + std::to_string(factor) + " outside the configured band");
  }
  std::vector<double> out;
  out.reserve(img.size());
  for (double v : img.pixels()) out.push_back(std::clamp(v * factor, 0.0, 1.0));
  return GrayImage(img.width(), img.height(), std::move(out));
}

Augmentation sample_augmentation(const AugmentationConfig& cfg, std::uint64_t draw_index) {
  CounterRng rng(derive_stream(cfg.rng_seed, kAugmentationStream), draw_index);
  Augmentation aug;
  aug.flip = rng.bernoulli(cfg.flip_probability);
  aug.degrees = rng.uniform(-cfg.max_rotation_degrees, cfg.max_rotation_degrees);
  aug.factor = rng.uniform(1.0 - cfg.max_intensity_fraction, 1.0 + cfg.max_intensity_fraction);
  return aug;
}

GrayImage apply_augmentation(const GrayImage& img, const Augmentation& aug, double max_intensity_fraction) {
  GrayImage out = aug.flip ? horizontal_flip(img) : img;
  out = rotate(out, aug.degrees);
  return perturb_intensity(out, aug.factor, max_intensity_fraction);
}

}  // namespace cxrseg
