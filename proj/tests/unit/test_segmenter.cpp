#include <gtest/gtest.h>

#include "cxrseg/codec.hpp"
#include "cxrseg/error.hpp"
#include "cxrseg/segmenter.hpp"

using namespace cxrseg;

namespace {

std::vector<std::uint8_t> gray_png(std::uint32_t w, std::uint32_t h, std::vector<std::uint16_t> samples) {
  return codec::encode_png(codec::RawImage{w, h, 1, 8, std::move(samples)});
}

}  // namespace

TEST(BoxPrompt, InsetAndValidity) {
  const BoxPrompt b = inset_box(100, 50, 0.05);
  EXPECT_EQ(b, (BoxPrompt{5, 2, 94, 47}));
  EXPECT_TRUE(b.valid_for(100, 50));
  EXPECT_FALSE((BoxPrompt{3, 0, 3, 5}).valid_for(10, 10));
  EXPECT_FALSE((BoxPrompt{0, 0, 10, 5}).valid_for(10, 10));
}

TEST(JitterBox, ZeroShiftIsIdentity) {
  const BoxPrompt b{10, 12, 40, 44};
  for (std::uint64_t i = 0; i < 20; ++i) EXPECT_EQ(jitter_box(b, 0, 64, 64, 3, i), b);
}

TEST(JitterBox, CornerBoxStaysValid) {
  const BoxPrompt corner{0, 0, 1, 1};
  for (std::uint64_t i = 0; i < 2000; ++i) {
    const BoxPrompt j = jitter_box(corner, 5, 8, 8, 1, i);
    ASSERT_TRUE(j.valid_for(8, 8));
  }
  const BoxPrompt far{6, 6, 7, 7};
  for (std::uint64_t i = 0; i < 2000; ++i) ASSERT_TRUE(jitter_box(far, 5, 8, 8, 2, i).valid_for(8, 8));
}

TEST(JitterBox, EdgesWithinShift) {
  const BoxPrompt b{40, 40, 88, 88};
  for (std::uint64_t i = 0; i < 10000; ++i) {
    const BoxPrompt j = jitter_box(b, 6, 128, 128, 9, i);
    ASSERT_LE(std::abs(static_cast<long>(j.x0) - 40), 6);
    ASSERT_LE(std::abs(static_cast<long>(j.y0) - 40), 6);
    ASSERT_LE(std::abs(static_cast<long>(j.x1) - 88), 6);
    ASSERT_LE(std::abs(static_cast<long>(j.y1) - 88), 6);
  }
  EXPECT_EQ(jitter_box(b, 6, 128, 128, 9, 17), jitter_box(b, 6, 128, 128, 9, 17));
}

TEST(LoadMask, NonzeroIsForeground) {
  EXPECT_EQ(load_mask(gray_png(2, 2, {255, 255, 255, 255}), 2, 2, "m").count(), 4u);
  EXPECT_EQ(load_mask(gray_png(2, 2, {0, 0, 0, 0}), 2, 2, "m").count(), 0u);
  const BinaryMask m = load_mask(gray_png(3, 1, {0, 128, 255}), 3, 1, "m");
  EXPECT_FALSE(m.at(0, 0));
  EXPECT_TRUE(m.at(1, 0));
  EXPECT_TRUE(m.at(2, 0));
}

TEST(LoadMask, DimensionMismatchNamesFile) {
  try {
    load_mask(gray_png(2, 2, {0, 0, 0, 0}), 3, 2, "lung_007.mask.png");
    FAIL();
  } catch (const IngestionError& e) {
    EXPECT_NE(std::string(e.what()).find("lung_007.mask.png"), std::string::npos);
  }
}

TEST(FallbackSegment, Examples) {
  const GrayImage img(10, 8, 0.3);
  const BoxPrompt box{2, 1, 7, 6};
  EXPECT_EQ(fallback_segment(img, box, 0.0).count(), 0u);
  const BinaryMask all = fallback_segment(img, box, 1.5);
  EXPECT_EQ(all.count(), 6u * 6u);
  for (std::size_t y = 0; y < 8; ++y)
    for (std::size_t x = 0; x < 10; ++x) EXPECT_EQ(all.at(x, y), box.contains(x, y));
}

TEST(FallbackSegment, FindsDarkRectangle) {
  std::vector<double> px(20 * 20, 0.8);
  for (std::size_t y = 5; y <= 12; ++y)
    for (std::size_t x = 4; x <= 15; ++x) px[y * 20 + x] = 0.1;
  const GrayImage img(20, 20, px);
  const BinaryMask m = fallback_segment(img, inset_box(20, 20, 0.05));
  for (std::size_t y = 0; y < 20; ++y)
    for (std::size_t x = 0; x < 20; ++x) EXPECT_EQ(m.at(x, y), x >= 4 && x <= 15 && y >= 5 && y <= 12);
}

TEST(FallbackSegment, SubsetOfBox) {
  std::vector<double> px(16 * 16);
  for (std::size_t i = 0; i < px.size(); ++i) px[i] = static_cast<double>(i % 7) / 7.0;
  const GrayImage img(16, 16, px);
  const BoxPrompt box{3, 4, 9, 12};
  const BinaryMask m = fallback_segment(img, box, 0.5);
  for (std::size_t y = 0; y < 16; ++y)
    for (std::size_t x = 0; x < 16; ++x)
      if (m.at(x, y)) EXPECT_TRUE(box.contains(x, y));
}
