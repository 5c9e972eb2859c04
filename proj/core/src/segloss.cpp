#include "cxrseg/segloss.hpp"

#include <algorithm>
#include <cmath>

#include "cxrseg/error.hpp"

namespace cxrseg {

ProbMask::ProbMask(std::size_t width, std::size_t height, std::vector<double> probs)
    : width_(width), height_(height), probs_(std::move(probs)) {
  if (width == 0 || height == 0) throw ArgumentError("probability mask dimensions must be positive");
  if (probs_.size() != width * height) throw ArgumentError("probability count does not match dimensions");
  for (double p : probs_) {
    if (!(p >= 0.0 && p <= 1.0)) throw ArgumentError("probability outside [0, 1]");
  }
}

ProbMask::ProbMask(const GrayImage& img)
    : ProbMask(img.width(), img.height(), std::vector<double>(img.pixels().begin(), img.pixels().end())) {}

BinaryMask ProbMask::binarize(double threshold) const {
  std::vector<std::uint8_t> bits(probs_.size());
  for (std::size_t i = 0; i < probs_.size(); ++i) bits[i] = probs_[i] >= threshold ? 1 : 0;
  return BinaryMask(width_, height_, std::move(bits));
}

double dice_loss(const BinaryMask& a, const BinaryMask& b) {
  if (!a.same_shape(b)) throw ArgumentError("dice_loss: mask shapes differ");
  std::size_t inter = 0;
  std::size_t na = 0;
  std::size_t nb = 0;
  const auto ba = a.bits();
  const auto bb = b.bits();
  for (std::size_t i = 0; i < ba.size(); ++i) {
    na += ba[i];
    nb += bb[i];
    inter += ba[i] & bb[i];
  }
  if (na + nb == 0) return 0.0;
  return 1.0 - 2.0 * static_cast<double>(inter) / static_cast<double>(na + nb);
}

double pixel_bce_loss(const ProbMask& pred, const BinaryMask& gt, double epsilon) {
  if (pred.width() != gt.width() || pred.height() != gt.height()) {
    throw ArgumentError("pixel_bce_loss: shapes differ");
  }
  const auto p = pred.probs();
  const auto y = gt.bits();
  double sum = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double q = std::clamp(p[i], epsilon, 1.0 - epsilon);
    sum -= y[i] ? std::log(q) : std::log1p(-q);
  }
  return sum / static_cast<double>(p.size());
}

SegLossReport combine_losses(double dice, double bce) { return {dice, bce, (dice + bce) / 2.0}; }

SegLossReport seg_loss_report(const ProbMask& pred, const BinaryMask& gt, double threshold, double epsilon) {
  return combine_losses(dice_loss(pred.binarize(threshold), gt), pixel_bce_loss(pred, gt, epsilon));
}

}  // namespace cxrseg
