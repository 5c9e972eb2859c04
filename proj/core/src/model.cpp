#include "cxrseg/model.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstring>

#include <fmt/format.h>

#include "cxrseg/csv.hpp"
#include "cxrseg/error.hpp"
#include "cxrseg/rng.hpp"

namespace cxrseg {

namespace {

constexpr std::array<std::string_view, kNumAbnormalities> kScoreColumns = {
    "p_mass", "p_nodule", "p_pneumonia", "p_edema", "p_fibrosis"};

constexpr std::uint64_t kInitStream = 0x696e6974ULL;     // "init"
constexpr std::uint64_t kShuffleStream = 0x73687566ULL;  // "shuf"

double parse_double(const std::string& s, bool& ok) {
  double v = 0.0;
  const auto* end = s.data() + s.size();
  const auto res = std::from_chars(s.data(), end, v);
  ok = res.ec == std::errc{} && res.ptr == end;
  return v;
}

}  // namespace

std::map<std::string, ScoreVector> load_scores(std::string_view csv_text) {
  csv::Table table;
  try {
    table = csv::parse(csv_text);
  } catch (const FormatError& e) {
    throw IngestionError(std::string("score file: ") + e.what());
  }
  const auto id_col = table.column("image_id");
  if (!id_col) throw IngestionError("score file is missing column \"image_id\"");
  std::array<std::size_t, kNumAbnormalities> cols{};
  for (std::size_t k = 0; k < kNumAbnormalities; ++k) {
    const auto c = table.column(kScoreColumns[k]);
    if (!c) throw IngestionError(fmt::format("score file is missing column \"{}\"", kScoreColumns[k]));
    cols[k] = *c;
  }
  std::map<std::string, ScoreVector> out;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    const std::size_t line = table.line_numbers[r];
    ScoreVector sv;
    for (std::size_t k = 0; k < kNumAbnormalities; ++k) {
      bool ok = false;
      const double p = parse_double(row[cols[k]], ok);
      if (!ok) throw IngestionError(fmt::format("score file line {}: \"{}\" is not a number", line, row[cols[k]]));
      if (!(p >= 0.0 && p <= 1.0)) {
        throw IngestionError(fmt::format("score file line {}: {} = {} is outside [0, 1]", line,
                                         kScoreColumns[k], row[cols[k]]));
      }
      sv.p[k] = p;
    }
    if (!out.emplace(row[*id_col], sv).second) {
      throw IngestionError(fmt::format("score file line {}: duplicate image id \"{}\"", line, row[*id_col]));
    }
  }
  return out;
}

std::string scores_csv(const std::map<std::string, ScoreVector>& scores) {
  std::string out = "image_id";
  for (auto c : kScoreColumns) out += fmt::format(",{}", c);
  out += '\n';
  for (const auto& [id, sv] : scores) {
    out += csv::escape(id);
    for (double p : sv.p) out += fmt::format(",{:.17g}", p);
    out += '\n';
  }
  return out;
}

double no_finding_score(const ScoreVector& p) noexcept {
  return 1.0 - *std::max_element(p.p.begin(), p.p.end());
}

bool no_finding_binary(const AbnormalityFlags& predicted) noexcept {
  return std::none_of(predicted.begin(), predicted.end(), [](bool b) { return b; });
}

RefModelParams RefModelParams::zeros(std::size_t input_side, std::size_t hidden_units) {
  if (input_side == 0 || hidden_units == 0) throw ArgumentError("model dimensions must be positive");
  RefModelParams p;
  p.input_side = input_side;
  p.hidden_units = hidden_units;
  p.w1.assign(hidden_units * input_side * input_side, 0.0);
  p.b1.assign(hidden_units, 0.0);
  p.w2.assign(kNumAbnormalities * hidden_units, 0.0);
  p.b2.assign(kNumAbnormalities, 0.0);
  return p;
}

RefModelParams RefModelParams::random(std::size_t input_side, std::size_t hidden_units, std::uint64_t seed) {
  RefModelParams p = zeros(input_side, hidden_units);
  CounterRng rng(derive_stream(seed, kInitStream), 0);
  const double a1 = std::sqrt(6.0 / static_cast<double>(p.input_size()));
  const double a2 = std::sqrt(6.0 / static_cast<double>(hidden_units));
  for (auto& w : p.w1) w = rng.uniform(-a1, a1);
  for (auto& w : p.w2) w = rng.uniform(-a2, a2);
  return p;
}

std::array<std::span<double>, 4> RefModelParams::tensors() {
  return {std::span<double>(w1), std::span<double>(b1), std::span<double>(w2), std::span<double>(b2)};
}

std::array<std::span<const double>, 4> RefModelParams::tensors() const {
  return {std::span<const double>(w1), std::span<const double>(b1), std::span<const double>(w2),
          std::span<const double>(b2)};
}

std::size_t RefModelParams::parameter_count() const noexcept {
  return w1.size() + b1.size() + w2.size() + b2.size();
}

bool RefModelParams::same_shape(const RefModelParams& o) const noexcept {
  return input_side == o.input_side && hidden_units == o.hidden_units && w1.size() == o.w1.size() &&
         b1.size() == o.b1.size() && w2.size() == o.w2.size() && b2.size() == o.b2.size();
}

double sigmoid(double z) noexcept {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double bce_with_logits(const Logits& logits, const AbnormalityFlags& y) noexcept {
  double sum = 0.0;
  for (std::size_t k = 0; k < kNumAbnormalities; ++k) {
    const double z = logits[k];
    sum += std::max(z, 0.0) - z * (y[k] ? 1.0 : 0.0) + std::log1p(std::exp(-std::abs(z)));
  }
  return sum / static_cast<double>(kNumAbnormalities);
}

namespace {

void check_shape(const RefModelParams& p) {
  const std::size_t d = p.input_size();
  if (p.w1.size() != p.hidden_units * d || p.b1.size() != p.hidden_units ||
      p.w2.size() != kNumAbnormalities * p.hidden_units || p.b2.size() != kNumAbnormalities) {
    throw ArgumentError("model parameter arrays have inconsistent shapes");
  }
}

const GrayImage& as_input(const RefModelParams& p, const GrayImage& img, GrayImage& scratch) {
  if (img.width() == p.input_side && img.height() == p.input_side) return img;
  scratch = resize(img, p.input_side, p.input_side);
  return scratch;
}

// Hidden pre-activations and logits for input x.
void forward_raw(const RefModelParams& p, std::span<const double> x, std::vector<double>& pre, Logits& z) {
  const std::size_t d = p.input_size();
  pre.assign(p.hidden_units, 0.0);
  for (std::size_t h = 0; h < p.hidden_units; ++h) {
    const double* row = p.w1.data() + h * d;
    double acc = p.b1[h];
    for (std::size_t i = 0; i < d; ++i) acc += row[i] * x[i];
    pre[h] = acc;
  }
  for (std::size_t k = 0; k < kNumAbnormalities; ++k) {
    const double* row = p.w2.data() + k * p.hidden_units;
    double acc = p.b2[k];
    for (std::size_t h = 0; h < p.hidden_units; ++h) acc += row[h] * std::max(pre[h], 0.0);
    z[k] = acc;
  }
}

// Adds the gradient for one sample, scaled by `weight`, into `g`.
void accumulate_gradients(const RefModelParams& p, std::span<const double> x, const AbnormalityFlags& y,
                          double weight, RefModelParams& g, std::vector<double>& pre, double* loss_out) {
  Logits z{};
  forward_raw(p, x, pre, z);
  if (loss_out) *loss_out = bce_with_logits(z, y);
  const std::size_t d = p.input_size();
  std::array<double, kNumAbnormalities> dz{};
  for (std::size_t k = 0; k < kNumAbnormalities; ++k) {
    dz[k] = weight * (sigmoid(z[k]) - (y[k] ? 1.0 : 0.0)) / static_cast<double>(kNumAbnormalities);
    g.b2[k] += dz[k];
  }
  for (std::size_t h = 0; h < p.hidden_units; ++h) {
    const double act = std::max(pre[h], 0.0);
    double dh = 0.0;
    for (std::size_t k = 0; k < kNumAbnormalities; ++k) {
      g.w2[k * p.hidden_units + h] += dz[k] * act;
      dh += p.w2[k * p.hidden_units + h] * dz[k];
    }
    if (pre[h] <= 0.0) continue;
    g.b1[h] += dh;
    double* row = g.w1.data() + h * d;
    for (std::size_t i = 0; i < d; ++i) row[i] += dh * x[i];
  }
}

}  // namespace

ForwardResult forward(const RefModelParams& params, const GrayImage& img) {
  check_shape(params);
  GrayImage scratch;
  const GrayImage& in = as_input(params, img, scratch);
  std::vector<double> pre;
  ForwardResult r;
  forward_raw(params, in.pixels(), pre, r.logits);
  for (std::size_t k = 0; k < kNumAbnormalities; ++k) r.probs.p[k] = sigmoid(r.logits[k]);
  return r;
}

RefModelParams gradients(const RefModelParams& params, const GrayImage& img, const AbnormalityFlags& y) {
  check_shape(params);
  GrayImage scratch;
  const GrayImage& in = as_input(params, img, scratch);
  RefModelParams g = RefModelParams::zeros(params.input_side, params.hidden_units);
  std::vector<double> pre;
  accumulate_gradients(params, in.pixels(), y, 1.0, g, pre, nullptr);
  return g;
}

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0)) throw ArgumentError("learning_rate must be positive");
  if (batch_size < 1) throw ArgumentError("batch_size must be at least 1");
  if (max_epochs < 1) throw ArgumentError("max_epochs must be at least 1");
  if (!(adam_beta1 >= 0.0 && adam_beta1 < 1.0) || !(adam_beta2 >= 0.0 && adam_beta2 < 1.0)) {
    throw ArgumentError("Adam betas must lie in [0, 1)");
  }
  if (!(adam_epsilon > 0.0)) throw ArgumentError("adam_epsilon must be positive");
  if (input_side < 1 || hidden_units < 1) throw ArgumentError("model dimensions must be positive");
}

AdamState AdamState::for_params(const RefModelParams& params) {
  AdamState s;
  s.m = RefModelParams::zeros(params.input_side, params.hidden_units);
  s.v = s.m;
  return s;
}

void adam_step(RefModelParams& params, const RefModelParams& grads, AdamState& state, const TrainConfig& cfg) {
  if (!params.same_shape(grads) || !params.same_shape(state.m) || !params.same_shape(state.v)) {
    throw ArgumentError("adam_step: gradient or state shape does not match parameters");
  }
  ++state.t;
  const double b1 = cfg.adam_beta1;
  const double b2 = cfg.adam_beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(state.t));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(state.t));
  auto p = params.tensors();
  const auto g = grads.tensors();
  auto m = state.m.tensors();
  auto v = state.v.tensors();
  for (std::size_t t = 0; t < p.size(); ++t) {
    for (std::size_t i = 0; i < p[t].size(); ++i) {
      m[t][i] = b1 * m[t][i] + (1.0 - b1) * g[t][i];
      v[t][i] = b2 * v[t][i] + (1.0 - b2) * g[t][i] * g[t][i];
      const double m_hat = m[t][i] / c1;
      const double v_hat = v[t][i] / c2;
      p[t][i] -= cfg.learning_rate * m_hat / (std::sqrt(v_hat) + cfg.adam_epsilon);
    }
  }
}

double mean_loss(const RefModelParams& params, std::span<const LabeledImage> data,
                 std::span<const std::size_t> indices) {
  if (indices.empty()) throw ArgumentError("mean_loss over an empty index set");
  double sum = 0.0;
  for (std::size_t i : indices) {
    sum += bce_with_logits(forward(params, data[i].image).logits, data[i].labels);
  }
  return sum / static_cast<double>(indices.size());
}

TrainResult train(std::span<const LabeledImage> data, std::span<const std::size_t> train_indices,
                  std::span<const std::size_t> validation_indices, const TrainConfig& cfg,
                  const AugmentationConfig& aug) {
  cfg.validate();
  if (train_indices.empty()) throw ArgumentError("training split is empty");
  if (validation_indices.empty()) throw ArgumentError("validation split is empty");
  for (std::size_t i : train_indices) {
    if (i >= data.size()) throw ArgumentError("training index out of range");
  }
  for (std::size_t i : validation_indices) {
    if (i >= data.size()) throw ArgumentError("validation index out of range");
  }

  RefModelParams params = RefModelParams::random(cfg.input_side, cfg.hidden_units, cfg.seed);
  AdamState state = AdamState::for_params(params);
  RefModelParams grads = RefModelParams::zeros(cfg.input_side, cfg.hidden_units);

  TrainResult result;
  result.params = params;
  double best = mean_loss(params, data, validation_indices);
  result.log.push_back({0, mean_loss(params, data, train_indices), best});

  std::vector<double> pre;
  std::size_t since_best = 0;
  const std::size_t n = train_indices.size();
  for (std::size_t epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    CounterRng rng(derive_stream(cfg.seed, kShuffleStream), epoch);
    std::vector<std::size_t> shuffled(train_indices.begin(), train_indices.end());
    shuffle(std::span<std::size_t>(shuffled), rng);

    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < n; start += cfg.batch_size) {
      const std::size_t end = std::min(n, start + cfg.batch_size);
      const double weight = 1.0 / static_cast<double>(end - start);
      for (auto t : grads.tensors()) std::fill(t.begin(), t.end(), 0.0);
      for (std::size_t pos = start; pos < end; ++pos) {
        const LabeledImage& sample = data[shuffled[pos]];
        const Augmentation a = sample_augmentation(aug, (epoch - 1) * n + pos);
        GrayImage x = apply_augmentation(sample.image, a, aug.max_intensity_fraction);
        if (x.width() != cfg.input_side || x.height() != cfg.input_side) {
          x = resize(x, cfg.input_side, cfg.input_side);
        }
        double loss = 0.0;
        accumulate_gradients(params, x.pixels(), sample.labels, weight, grads, pre, &loss);
        epoch_loss += loss;
      }
      adam_step(params, grads, state, cfg);
    }

    const double val = mean_loss(params, data, validation_indices);
    result.log.push_back({epoch, epoch_loss / static_cast<double>(n), val});
    if (val < best) {
      best = val;
      result.params = params;
      result.best_epoch = epoch;
      since_best = 0;
    } else if (++since_best >= cfg.early_stop_patience) {
      result.stopped_early = true;
      break;
    }
  }
  return result;
}

namespace {

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_f64(std::vector<std::uint8_t>& out, double d) {
  std::uint64_t bits = 0;
  std::memcpy(&bits, &d, sizeof bits);
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(bits >> (8 * i)));
}

std::uint64_t get_le(std::span<const std::uint8_t> b, std::size_t off, int n) {
  std::uint64_t v = 0;
  for (int i = 0; i < n; ++i) v |= std::uint64_t{b[off + i]} << (8 * i);
  return v;
}

constexpr std::array<std::uint8_t, 4> kModelMagic = {'C', 'X', 'R', 'M'};
constexpr std::uint32_t kModelVersion = 1;

}  // namespace

std::vector<std::uint8_t> encode_params(const RefModelParams& params) {
  check_shape(params);
  std::vector<std::uint8_t> out(kModelMagic.begin(), kModelMagic.end());
  put_u32(out, kModelVersion);
  put_u32(out, static_cast<std::uint32_t>(params.input_side));
  put_u32(out, static_cast<std::uint32_t>(params.hidden_units));
  for (auto t : params.tensors()) {
    for (double d : t) put_f64(out, d);
  }
  return out;
}

RefModelParams decode_params(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 16 || !std::equal(kModelMagic.begin(), kModelMagic.end(), bytes.begin())) {
    throw DecodeError("not a reference model file", 0);
  }
  const auto version = static_cast<std::uint32_t>(get_le(bytes, 4, 4));
  if (version != kModelVersion) throw UnsupportedFormatError(fmt::format("model file version {}", version));
  const auto side = static_cast<std::size_t>(get_le(bytes, 8, 4));
  const auto hidden = static_cast<std::size_t>(get_le(bytes, 12, 4));
  if (side == 0 || hidden == 0) throw DecodeError("model dimensions must be positive", 8);
  RefModelParams p = RefModelParams::zeros(side, hidden);
  const std::size_t expected = 16 + 8 * p.parameter_count();
  if (bytes.size() != expected) {
    throw DecodeError(fmt::format("model file is {} bytes, expected {}", bytes.size(), expected),
                      std::min(bytes.size(), expected));
  }
  std::size_t off = 16;
  for (auto t : p.tensors()) {
    for (double& d : t) {
      const std::uint64_t bits = get_le(bytes, off, 8);
      std::memcpy(&d, &bits, sizeof d);
      off += 8;
    }
  }
  return p;
}

}  // namespace cxrseg
