#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cxrseg/imaging.hpp"
#include "cxrseg/labels.hpp"

namespace cxrseg {

/// Abnormality probabilities in label order [Mass, Nodule, Pneumonia, Edema, Fibrosis].
struct ScoreVector {
  std::array<double, kNumAbnormalities> p{};

  double operator[](std::size_t k) const { return p[k]; }
  friend bool operator==(const ScoreVector&, const ScoreVector&) = default;
};

using AbnormalityFlags = std::array<bool, kNumAbnormalities>;
using Logits = std::array<double, kNumAbnormalities>;

/// Score CSV with header image_id,p_mass,p_nodule,p_pneumonia,p_edema,p_fibrosis.
/// Throws IngestionError on out-of-range probabilities (naming the line) or duplicate ids.
std::map<std::string, ScoreVector> load_scores(std::string_view csv_text);

std::string scores_csv(const std::map<std::string, ScoreVector>& scores);

/// Derived normality score: 1 - max_k p_k.
double no_finding_score(const ScoreVector& p) noexcept;

/// Complement rule: normal iff no abnormality was predicted.
bool no_finding_binary(const AbnormalityFlags& predicted) noexcept;

// ---------------------------------------------------------------------------
// Reference classifier: one ReLU hidden layer over an input_side^2 downsample,
// five sigmoid outputs.

struct RefModelParams {
  std::size_t input_side = 32;
  std::size_t hidden_units = 64;
  std::vector<double> w1;  // hidden_units x input_side^2, row-major
  std::vector<double> b1;  // hidden_units
  std::vector<double> w2;  // 5 x hidden_units, row-major
  std::vector<double> b2;  // 5

  std::size_t input_size() const noexcept { return input_side * input_side; }

  /// Zero-filled parameters of the given shape.
  static RefModelParams zeros(std::size_t input_side, std::size_t hidden_units);
  /// He-uniform weights, zero biases, drawn from a seeded stream.
  static RefModelParams random(std::size_t input_side, std::size_t hidden_units, std::uint64_t seed);

  /// The four parameter arrays in declaration order.
  std::array<std::span<double>, 4> tensors();
  std::array<std::span<const double>, 4> tensors() const;
  std::size_t parameter_count() const noexcept;
  bool same_shape(const RefModelParams& other) const noexcept;

  friend bool operator==(const RefModelParams&, const RefModelParams&) = default;
};

struct ForwardResult {
  Logits logits{};
  ScoreVector probs;
};

/// Resizes `img` to input_side x input_side when needed.
ForwardResult forward(const RefModelParams& params, const GrayImage& img);

double sigmoid(double z) noexcept;

/// Mean over labels of max(z, 0) - z*y + log(1 + exp(-|z|)).
double bce_with_logits(const Logits& logits, const AbnormalityFlags& y) noexcept;

/// Analytic gradient of bce_with_logits(forward(params, img), y). ReLU'(0) = 0.
RefModelParams gradients(const RefModelParams& params, const GrayImage& img, const AbnormalityFlags& y);

struct TrainConfig {
  double learning_rate = 1e-4;
  std::size_t batch_size = 4;
  std::size_t max_epochs = 30;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_epsilon = 1e-8;
  std::size_t early_stop_patience = 5;
  std::uint64_t seed = 0;
  std::size_t input_side = 32;
  std::size_t hidden_units = 64;

  /// Throws ArgumentError when a field breaks its precondition.
  void validate() const;
};

struct AdamState {
  std::uint64_t t = 0;
  RefModelParams m;
  RefModelParams v;

  static AdamState for_params(const RefModelParams& params);
};

/// One bias-corrected Adam update in place; increments state.t.
void adam_step(RefModelParams& params, const RefModelParams& grads, AdamState& state, const TrainConfig& cfg);

struct LabeledImage {
  GrayImage image;
  AbnormalityFlags labels{};
};

struct EpochLog {
  std::size_t epoch = 0;  // 0 is the untrained model
  double train_loss = 0.0;
  double validation_loss = 0.0;
  friend bool operator==(const EpochLog&, const EpochLog&) = default;
};

struct TrainResult {
  RefModelParams params;  // from the best validation epoch
  std::vector<EpochLog> log;
  std::size_t best_epoch = 0;
  bool stopped_early = false;
};

/// Mini-batch Adam with on-the-fly augmentation and early stopping on
/// validation BCE. Deterministic for fixed cfg.seed and aug.rng_seed.
TrainResult train(std::span<const LabeledImage> data, std::span<const std::size_t> train_indices,
                  std::span<const std::size_t> validation_indices, const TrainConfig& cfg,
                  const AugmentationConfig& aug);

/// Mean bce_with_logits over the given images.
double mean_loss(const RefModelParams& params, std::span<const LabeledImage> data,
                 std::span<const std::size_t> indices);

/// Versioned little-endian binary: "CXRM", u32 version, u32 input_side,
/// u32 hidden_units, then w1, b1, w2, b2 as f64.
std::vector<std::uint8_t> encode_params(const RefModelParams& params);
/// Throws DecodeError on a bad signature or size, UnsupportedFormatError on another version.
RefModelParams decode_params(std::span<const std::uint8_t> bytes);

}  // namespace cxrseg
