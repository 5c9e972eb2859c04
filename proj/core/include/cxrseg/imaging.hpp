#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace cxrseg {

/// Single-channel raster with row-major intensities in [0, 1].
class GrayImage {
 public:
  GrayImage() = default;
  /// Constant image. Throws ArgumentError on zero dimensions or a value outside [0, 1].
  GrayImage(std::size_t width, std::size_t height, double fill = 0.0);
  /// Throws ArgumentError if `pixels.size() != width * height` or any value is outside [0, 1].
  GrayImage(std::size_t width, std::size_t height, std::vector<double> pixels);

  std::size_t width() const noexcept { return width_; }
  std::size_t height() const noexcept { return height_; }
  std::size_t size() const noexcept { return pixels_.size(); }
  bool empty() const noexcept { return pixels_.empty(); }

  double at(std::size_t x, std::size_t y) const { return pixels_[y * width_ + x]; }
  std::span<const double> pixels() const noexcept { return pixels_; }

  friend bool operator==(const GrayImage&, const GrayImage&) = default;

 private:
  std::size_t width_ = 0;
  std::size_t height_ = 0;
  std::vector<double> pixels_;
};

/// Decodes PNG (8/16-bit gray, gray+alpha, RGB, RGBA) or BMP (8/24/32-bit).
/// Alpha is discarded, color collapses through BT.601 luma, and samples are
/// divided by the container's maximum sample value.
GrayImage decode_image(std::span<const std::uint8_t> bytes);

/// 8-bit grayscale PNG; intensities are rounded to the nearest of 256 levels.
std::vector<std::uint8_t> encode_png(const GrayImage& img);

/// 16-bit grayscale PNG, used for probability masks that need more than 8 bits.
std::vector<std::uint8_t> encode_png16(const GrayImage& img);

std::vector<std::uint8_t> read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

GrayImage load_image(const std::filesystem::path& path);
void save_png(const std::filesystem::path& path, const GrayImage& img);

/// Bilinear resampling with half-pixel-centred sample positions.
GrayImage resize(const GrayImage& img, std::size_t width, std::size_t height);

GrayImage horizontal_flip(const GrayImage& img);

/// Rotation about the image centre with bilinear sampling. Samples that fall
/// outside the source are 0. |degrees| must not exceed 45.
GrayImage rotate(const GrayImage& img, double degrees);

/// clamp(pixel * factor, 0, 1). `factor` must lie in [1 - max_fraction, 1 + max_fraction].
GrayImage perturb_intensity(const GrayImage& img, double factor, double max_fraction = 0.10);

struct AugmentationConfig {
  double flip_probability = 0.5;
  double max_rotation_degrees = 7.0;
  double max_intensity_fraction = 0.10;
  std::uint64_t rng_seed = 0;
};

struct Augmentation {
  bool flip = false;
  double degrees = 0.0;
  double factor = 1.0;

  friend bool operator==(const Augmentation&, const Augmentation&) = default;
};

/// Draw number `draw_index` from the seeded augmentation stream. Independent of
/// any other draw, so augmentation does not depend on iteration order.
Augmentation sample_augmentation(const AugmentationConfig& cfg, std::uint64_t draw_index);

/// Flip, then rotate, then intensity perturbation.
GrayImage apply_augmentation(const GrayImage& img, const Augmentation& aug,
                             double max_intensity_fraction = 0.10);

}  // namespace cxrseg
