#include "cxrseg/segmenter.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "cxrseg/codec.hpp"
#include "cxrseg/error.hpp"
#include "cxrseg/rng.hpp"

namespace cxrseg {

namespace {
constexpr std::uint64_t kJitterStream = 0x6a697474ULL;  // "jitt"
}

bool BoxPrompt::valid_for(std::size_t width, std::size_t height) const noexcept {
  return x0 < x1 && x1 < width && y0 < y1 && y1 < height;
}

BoxPrompt inset_box(std::size_t width, std::size_t height, double margin_fraction) {
  if (width < 2 || height < 2) throw ArgumentError("box prompts need an image of at least 2x2");
  if (!(margin_fraction >= 0.0 && margin_fraction < 0.5)) throw ArgumentError("box margin must be in [0, 0.5)");
  const auto mx = static_cast<std::size_t>(std::floor(margin_fraction * static_cast<double>(width)));
  const auto my = static_cast<std::size_t>(std::floor(margin_fraction * static_cast<double>(height)));
  BoxPrompt b{mx, my, width - 1 - mx, height - 1 - my};
  if (!b.valid_for(width, height)) b = {0, 0, width - 1, height - 1};
  return b;
}

BoxPrompt jitter_box(const BoxPrompt& box, int max_shift, std::size_t width, std::size_t height,
                     std::uint64_t seed, std::uint64_t draw_index) {
  if (max_shift < 0) throw ArgumentError("max_shift must be non-negative");
  if (!box.valid_for(width, height)) throw ArgumentError("box prompt is not valid for the image");
  CounterRng rng(derive_stream(seed, kJitterStream), draw_index);
  auto shifted = [&](std::size_t v) {
    return static_cast<long>(v) + rng.between(-max_shift, max_shift);
  };
  const long x0 = shifted(box.x0);
  const long y0 = shifted(box.y0);
  const long x1 = shifted(box.x1);
  const long y1 = shifted(box.y1);
  const auto w = static_cast<long>(width);
  const auto h = static_cast<long>(height);
  BoxPrompt out;
  out.x0 = static_cast<std::size_t>(std::clamp(x0, 0L, w - 2));
  out.x1 = static_cast<std::size_t>(std::clamp(x1, static_cast<long>(out.x0) + 1, w - 1));
  out.y0 = static_cast<std::size_t>(std::clamp(y0, 0L, h - 2));
  out.y1 = static_cast<std::size_t>(std::clamp(y1, static_cast<long>(out.y0) + 1, h - 1));
  return out;
}

BinaryMask load_mask(std::span<const std::uint8_t> bytes, std::size_t expected_width,
                     std::size_t expected_height, const std::string& source_name) {
  codec::RawImage raw;
  try {
    raw = codec::decode(bytes);
  } catch (const DecodeError& e) {
    throw DecodeError(source_name + ": " + e.what(), e.offset());
  }
  if (raw.width != expected_width || raw.height != expected_height) {
    throw IngestionError(fmt::format("{}: mask is {}x{}, expected {}x{}", source_name, raw.width, raw.height,
                                     expected_width, expected_height));
  }
  // Alpha is ignored; any nonzero color sample marks foreground.
  const std::uint32_t color_channels = raw.channels == 2 || raw.channels == 4 ? raw.channels - 1 : raw.channels;
  std::vector<std::uint8_t> bits(static_cast<std::size_t>(raw.width) * raw.height);
  for (std::uint32_t y = 0; y < raw.height; ++y) {
    for (std::uint32_t x = 0; x < raw.width; ++x) {
      bool on = false;
      for (std::uint32_t c = 0; c < color_channels; ++c) on = on || raw.at(x, y, c) != 0;
      bits[static_cast<std::size_t>(y) * raw.width + x] = on ? 1 : 0;
    }
  }
  return BinaryMask(raw.width, raw.height, std::move(bits));
}

BinaryMask fallback_segment(const GrayImage& img, const BoxPrompt& box, double threshold) {
  if (!box.valid_for(img.width(), img.height())) throw ArgumentError("box prompt is not valid for the image");
  BinaryMask m(img.width(), img.height());
  for (std::size_t y = box.y0; y <= box.y1; ++y) {
    for (std::size_t x = box.x0; x <= box.x1; ++x) {
      if (img.at(x, y) < threshold) m.set(x, y, true);
    }
  }
  return m;
}

}  // namespace cxrseg
