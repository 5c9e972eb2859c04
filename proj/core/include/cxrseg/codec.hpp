#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace cxrseg::codec {

/// Undecoded raster samples as stored in the container, interleaved per pixel.
struct RawImage {
  std::uint32_t width = 0;
  std::uint32_t height = 0;
  std::uint32_t channels = 1;   // 1 gray, 2 gray+alpha, 3 RGB, 4 RGBA
  std::uint32_t bit_depth = 8;  // 8 or 16
  std::vector<std::uint16_t> samples;

  std::uint32_t max_value() const noexcept { return bit_depth == 16 ? 65535u : 255u; }
  std::uint16_t at(std::uint32_t x, std::uint32_t y, std::uint32_t c) const {
    return samples[(static_cast<std::size_t>(y) * width + x) * channels + c];
  }
};

bool looks_like_png(std::span<const std::uint8_t> bytes) noexcept;
bool looks_like_bmp(std::span<const std::uint8_t> bytes) noexcept;

/// Non-interlaced PNG, color types gray/gray+alpha/RGB/RGBA at 8 or 16 bits.
/// Throws DecodeError (with byte offset) or UnsupportedFormatError.
RawImage decode_png(std::span<const std::uint8_t> bytes);

/// Uncompressed BMP at 8 (palettized), 24, or 32 bits per pixel.
RawImage decode_bmp(std::span<const std::uint8_t> bytes);

/// Dispatches on the file signature.
RawImage decode(std::span<const std::uint8_t> bytes);

/// Writes a PNG with the image's channel count and bit depth, filter type 0 on every row.
std::vector<std::uint8_t> encode_png(const RawImage& img);

/// Writes a bottom-up BMP. Supports 8-bit samples with 1 (grayscale palette), 3, or 4 channels.
std::vector<std::uint8_t> encode_bmp(const RawImage& img);

}  // namespace cxrseg::codec
