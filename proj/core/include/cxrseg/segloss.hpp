#pragma once

#include <cstddef>
#include <vector>

#include "cxrseg/imaging.hpp"
#include "cxrseg/morphology.hpp"

namespace cxrseg {

/// Per-pixel predicted foreground probability, row-major, values in [0, 1].
class ProbMask {
 public:
  ProbMask() = default;
  ProbMask(std::size_t width, std::size_t height, std::vector<double> probs);
  /// Probabilities read from an intensity image (e.g. a decoded 16-bit PNG).
  explicit ProbMask(const GrayImage& img);

  std::size_t width() const noexcept { return width_; }
  std::size_t height() const noexcept { return height_; }
  std::span<const double> probs() const noexcept { return probs_; }

  /// p >= threshold is foreground.
  BinaryMask binarize(double threshold) const;

 private:
  std::size_t width_ = 0;
  std::size_t height_ = 0;
  std::vector<double> probs_;
};

inline constexpr double kDefaultProbEpsilon = 1e-7;

/// 1 - 2|A n B| / (|A| + |B|). Two empty masks agree perfectly and give 0.
double dice_loss(const BinaryMask& a, const BinaryMask& b);

/// Pixel-averaged binary cross entropy with probabilities clamped to [eps, 1 - eps].
double pixel_bce_loss(const ProbMask& pred, const BinaryMask& gt, double epsilon = kDefaultProbEpsilon);

struct SegLossReport {
  double dice = 0.0;
  double bce = 0.0;
  double average = 0.0;
};

/// Average of two already-computed components.
SegLossReport combine_losses(double dice, double bce);

/// Dice on `pred` binarized at `threshold`, BCE on the raw probabilities.
SegLossReport seg_loss_report(const ProbMask& pred, const BinaryMask& gt, double threshold = 0.5,
                              double epsilon = kDefaultProbEpsilon);

}  // namespace cxrseg
