#include <gtest/gtest.h>

#include "cxrseg/codec.hpp"
#include "cxrseg/error.hpp"
#include "cxrseg/morphology.hpp"
#include "cxrseg/rng.hpp"
#include "oracles.hpp"

using namespace cxrseg;

namespace {

BinaryMask random_mask(std::size_t w, std::size_t h, double p, std::uint64_t seed) {
  CounterRng r(seed, 21);
  BinaryMask m(w, h);
  for (std::size_t y = 0; y < h; ++y)
    for (std::size_t x = 0; x < w; ++x) m.set(x, y, r.bernoulli(p));
  return m;
}

oracle::Mask to_oracle(const BinaryMask& m) {
  return {static_cast<int>(m.width()), static_cast<int>(m.height()),
          std::vector<std::uint8_t>(m.bits().begin(), m.bits().end())};
}

BinaryMask from_oracle(const oracle::Mask& m) {
  return BinaryMask(static_cast<std::size_t>(m.w), static_cast<std::size_t>(m.h), m.bits);
}

BinaryMask rect(std::size_t w, std::size_t h, std::size_t x0, std::size_t y0, std::size_t x1, std::size_t y1) {
  BinaryMask m(w, h);
  for (std::size_t y = y0; y <= y1; ++y)
    for (std::size_t x = x0; x <= x1; ++x) m.set(x, y, true);
  return m;
}

}  // namespace

TEST(DiskSE, Sizes) {
  EXPECT_EQ(disk_se(0).offsets.size(), 1u);
  EXPECT_EQ(disk_se(0).offsets[0], (Offset{0, 0}));
  EXPECT_EQ(disk_se(1).offsets.size(), 5u);
  EXPECT_EQ(disk_se(2).offsets.size(), 13u);
  for (int r = 0; r <= 20; ++r) EXPECT_EQ(disk_se(r).offsets.size(), oracle::disk(r).size()) << r;
  EXPECT_THROW(disk_se(-1), ArgumentError);
}

TEST(DiskSE, HalfWidths) {
  const DiskSE se = disk_se(5);
  EXPECT_EQ(se.half_width(0), 5);
  EXPECT_EQ(se.half_width(3), 4);
  EXPECT_EQ(se.half_width(-5), 0);
}

TEST(Erode, Examples) {
  const BinaryMask empty(6, 6);
  EXPECT_EQ(erode(empty, disk_se(2)), empty);
  const BinaryMask m = random_mask(9, 7, 0.5, 1);
  EXPECT_EQ(erode(m, disk_se(0)), m);
  const BinaryMask full(5, 5, true);
  const BinaryMask e = erode(full, disk_se(1));
  EXPECT_EQ(e.count(), 9u);
  EXPECT_EQ(e, rect(5, 5, 1, 1, 3, 3));
}

TEST(Dilate, Examples) {
  const BinaryMask empty(6, 6);
  EXPECT_EQ(dilate(empty, disk_se(3)), empty);
  BinaryMask dot(7, 7);
  dot.set(3, 3, true);
  const BinaryMask d = dilate(dot, disk_se(1));
  EXPECT_EQ(d.count(), 5u);
  for (auto [x, y] : {std::pair{3, 3}, {2, 3}, {4, 3}, {3, 2}, {3, 4}}) EXPECT_TRUE(d.at(x, y));
  const BinaryMask m = random_mask(9, 7, 0.5, 2);
  EXPECT_EQ(dilate(m, disk_se(0)), m);
}

TEST(Morphology, MatchesOracleOnRandomMasks) {
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    CounterRng r(seed, 22);
    const auto w = static_cast<std::size_t>(r.between(1, 40));
    const auto h = static_cast<std::size_t>(r.between(1, 40));
    const BinaryMask m = random_mask(w, h, r.uniform(0.2, 0.9), seed);
    const int rad = static_cast<int>(r.between(0, 9));
    EXPECT_EQ(erode(m, disk_se(rad)), from_oracle(oracle::erode(to_oracle(m), rad))) << seed;
    EXPECT_EQ(dilate(m, disk_se(rad)), from_oracle(oracle::dilate(to_oracle(m), rad))) << seed;
  }
}

TEST(Morphology, DualityOnPaddedInterior) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const int r = static_cast<int>(seed % 4);
    const BinaryMask m = random_mask(24, 24, 0.6, 100 + seed);
    const BinaryMask e = erode(m, disk_se(r));
    const BinaryMask d = complement(dilate(complement(m), disk_se(r)));
    for (int y = r; y < 24 - r; ++y)
      for (int x = r; x < 24 - r; ++x)
        ASSERT_EQ(e.at(static_cast<std::size_t>(x), static_cast<std::size_t>(y)),
                  d.at(static_cast<std::size_t>(x), static_cast<std::size_t>(y)));
  }
}

TEST(Morphology, MonotoneExtensiveAntiExtensive) {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const BinaryMask small = random_mask(20, 15, 0.4, 200 + seed);
    BinaryMask big = small;
    const BinaryMask extra = random_mask(20, 15, 0.3, 300 + seed);
    for (std::size_t y = 0; y < 15; ++y)
      for (std::size_t x = 0; x < 20; ++x)
        if (extra.at(x, y)) big.set(x, y, true);
    const DiskSE se = disk_se(static_cast<int>(seed % 5));
    EXPECT_TRUE(is_subset(erode(small, se), erode(big, se)));
    EXPECT_TRUE(is_subset(dilate(small, se), dilate(big, se)));
    EXPECT_TRUE(is_subset(small, dilate(small, se)));
    EXPECT_TRUE(is_subset(erode(small, se), small));
  }
}

TEST(ExpandMask, Examples) {
  const BinaryMask empty(40, 40);
  const MaskVariants v0 = expand_mask(empty);
  EXPECT_EQ(v0.refined.count() + v0.tight.count() + v0.loose.count(), 0u);

  BinaryMask dot(40, 40);
  dot.set(20, 20, true);
  const MaskVariants v1 = expand_mask(dot);
  EXPECT_EQ(v1.refined.count(), 0u);
  EXPECT_EQ(v1.tight.count(), 0u);
  EXPECT_EQ(v1.loose.count(), 0u);
}

TEST(ExpandMask, RingWidthAlongFlatEdge) {
  // 200 x 200 canvas, rectangle well away from the border.
  const BinaryMask raw = rect(200, 200, 70, 70, 129, 129);
  const MaskVariants v = expand_mask(raw);
  EXPECT_TRUE(is_subset(v.refined, v.tight));
  EXPECT_TRUE(is_subset(v.tight, v.loose));
  // Along row 100 the right edge of refined sits at 124; tight reaches 139, loose 174.
  std::size_t tight_right = 0, loose_right = 0;
  for (std::size_t x = 0; x < 200; ++x) {
    if (v.tight.at(x, 100)) tight_right = x;
    if (v.loose.at(x, 100)) loose_right = x;
  }
  EXPECT_EQ(tight_right, 139u);
  EXPECT_EQ(loose_right, 174u);
  EXPECT_EQ(loose_right - tight_right, 35u);
}

TEST(ExpandMask, IndependentDilations) {
  const BinaryMask raw = random_mask(60, 60, 0.8, 5);
  const ExpansionRadii radii{2, 3, 6};
  const MaskVariants v = expand_mask(raw, radii);
  const BinaryMask refined = erode(raw, disk_se(2));
  EXPECT_EQ(v.refined, refined);
  EXPECT_EQ(v.tight, dilate(refined, disk_se(3)));
  EXPECT_EQ(v.loose, dilate(refined, disk_se(6)));
}

TEST(ApplyMask, Examples) {
  const GrayImage img(4, 2, 0.6);
  EXPECT_EQ(apply_mask(img, BinaryMask(4, 2, true)), img);
  const GrayImage blank = apply_mask(img, BinaryMask(4, 2, false));
  for (double p : blank.pixels()) EXPECT_EQ(p, 0.0);
  const GrayImage half = apply_mask(img, rect(4, 2, 0, 0, 1, 1));
  EXPECT_EQ(half.at(1, 1), 0.6);
  EXPECT_EQ(half.at(2, 0), 0.0);
  EXPECT_THROW(apply_mask(img, BinaryMask(2, 4)), ArgumentError);
}

TEST(MaskPng, ZeroAnd255) {
  BinaryMask m(3, 1);
  m.set(1, 0, true);
  const auto raw = codec::decode(encode_mask_png(m));
  EXPECT_EQ(raw.samples, (std::vector<std::uint16_t>{0, 255, 0}));
}
