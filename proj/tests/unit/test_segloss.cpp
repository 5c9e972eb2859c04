#include <gtest/gtest.h>

#include <cmath>

#include "cxrseg/error.hpp"
#include "cxrseg/rng.hpp"
#include "cxrseg/segloss.hpp"

using namespace cxrseg;

namespace {

BinaryMask from_bits(std::size_t w, std::size_t h, std::vector<std::uint8_t> bits) {
  return BinaryMask(w, h, std::move(bits));
}

ProbMask constant(std::size_t w, std::size_t h, double p) { return ProbMask(w, h, std::vector<double>(w * h, p)); }

}  // namespace

TEST(Dice, Examples) {
  const BinaryMask a = from_bits(4, 2, {1, 1, 1, 1, 0, 0, 0, 0});
  EXPECT_EQ(dice_loss(a, a), 0.0);
  const BinaryMask b = from_bits(4, 2, {0, 0, 0, 0, 1, 1, 1, 1});
  EXPECT_EQ(dice_loss(a, b), 1.0);
  const BinaryMask c = from_bits(4, 2, {0, 0, 1, 1, 1, 1, 0, 0});
  EXPECT_EQ(dice_loss(a, c), 0.5);
  const BinaryMask none(4, 2);
  EXPECT_EQ(dice_loss(none, none), 0.0);
  EXPECT_THROW(dice_loss(a, BinaryMask(2, 4)), ArgumentError);
}

TEST(Dice, SymmetricAndBounded) {
  CounterRng r(1, 1);
  for (int i = 0; i < 200; ++i) {
    std::vector<std::uint8_t> x(30), y(30);
    for (auto& v : x) v = r.bernoulli(0.4);
    for (auto& v : y) v = r.bernoulli(0.4);
    const BinaryMask a(6, 5, x), b(6, 5, y);
    const double d = dice_loss(a, b);
    EXPECT_EQ(d, dice_loss(b, a));
    EXPECT_GE(d, 0.0);
    EXPECT_LE(d, 1.0);
  }
}

TEST(PixelBce, Examples) {
  const double eps = kDefaultProbEpsilon;
  const BinaryMask all(3, 3, true);
  const BinaryMask none(3, 3, false);
  EXPECT_LE(pixel_bce_loss(constant(3, 3, 1 - eps), all), 2 * eps);
  EXPECT_NEAR(pixel_bce_loss(constant(3, 3, 0.5), all), std::log(2.0), 1e-12);
  EXPECT_NEAR(pixel_bce_loss(constant(3, 3, 0.5), none), std::log(2.0), 1e-12);
  EXPECT_NEAR(pixel_bce_loss(constant(3, 3, 1 - eps), none), -std::log(eps), 1e-6);
  EXPECT_NEAR(pixel_bce_loss(constant(3, 3, 1 - eps), none), 16.118, 1e-3);
  // Clamping keeps exact 0/1 predictions finite.
  EXPECT_TRUE(std::isfinite(pixel_bce_loss(constant(3, 3, 0.0), all)));
  EXPECT_THROW(pixel_bce_loss(constant(2, 2, 0.5), all), ArgumentError);
}

TEST(PixelBce, HandComputedMixture) {
  const ProbMask p(2, 1, {0.8, 0.3});
  const BinaryMask y = from_bits(2, 1, {1, 0});
  const double want = -(std::log(0.8) + std::log(0.7)) / 2;
  EXPECT_NEAR(pixel_bce_loss(p, y), want, 1e-12);
}

TEST(PixelBce, MonotoneTowardTruth) {
  const BinaryMask y = from_bits(2, 1, {1, 0});
  double prev = INFINITY;
  for (double t = 0.1; t <= 0.9; t += 0.1) {
    const double l = pixel_bce_loss(ProbMask(2, 1, {t, 1 - t}), y);
    EXPECT_LT(l, prev);
    EXPECT_GE(l, 0.0);
    prev = l;
  }
}

TEST(SegLossReport, Examples) {
  const double eps = kDefaultProbEpsilon;
  const BinaryMask gt = from_bits(3, 1, {1, 0, 1});
  const ProbMask exact(3, 1, {1 - eps, eps, 1 - eps});
  const SegLossReport r0 = seg_loss_report(exact, gt);
  EXPECT_EQ(r0.dice, 0.0);
  EXPECT_LT(r0.bce, 1e-6);
  EXPECT_LT(r0.average, 1e-6);

  const SegLossReport r1 = seg_loss_report(constant(3, 3, 0.5), BinaryMask(3, 3, true));
  EXPECT_EQ(r1.dice, 0.0);  // 0.5 >= 0.5 counts as foreground
  EXPECT_NEAR(r1.bce, std::log(2.0), 1e-12);
  EXPECT_NEAR(r1.average, std::log(2.0) / 2, 1e-12);
  EXPECT_NEAR(r1.average, 0.3466, 1e-4);
}

TEST(SegLossReport, ReportedTestLossesAverage) {
  const SegLossReport r = combine_losses(0.016, 0.020);
  EXPECT_NEAR(r.average, 0.018, 1e-15);
}

TEST(SegLossReport, AverageIsExactMean) {
  CounterRng r(4, 4);
  for (int i = 0; i < 100; ++i) {
    std::vector<double> p(16);
    std::vector<std::uint8_t> g(16);
    for (auto& v : p) v = r.uniform01();
    for (auto& v : g) v = r.bernoulli(0.5);
    const auto rep = seg_loss_report(ProbMask(4, 4, p), BinaryMask(4, 4, g));
    EXPECT_EQ(rep.average, (rep.dice + rep.bce) / 2);
  }
}

TEST(ProbMask, FromImageAndBinarize) {
  const GrayImage img(3, 1, std::vector<double>{0.2, 0.5, 0.9});
  const BinaryMask b = ProbMask(img).binarize(0.5);
  EXPECT_FALSE(b.at(0, 0));
  EXPECT_TRUE(b.at(1, 0));
  EXPECT_TRUE(b.at(2, 0));
  EXPECT_THROW(ProbMask(2, 1, {0.5, 1.5}), ArgumentError);
}
