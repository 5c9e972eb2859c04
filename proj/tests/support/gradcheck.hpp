#pragma once

// Finite-difference gradient check for the reference classifier. The loss is
// re-derived here in long double, independent of the library's forward pass.

#include <cmath>
#include <cstdint>

#include "cxrseg/model.hpp"
#include "cxrseg/rng.hpp"

namespace gradcheck {

struct Triple {
  cxrseg::RefModelParams params;
  cxrseg::GrayImage image;
  cxrseg::AbnormalityFlags labels{};
};

inline long double hidden_pre(const cxrseg::RefModelParams& p, const cxrseg::GrayImage& img, std::size_t j) {
  long double a = p.b1[j];
  const std::size_t n = p.input_size();
  for (std::size_t i = 0; i < n; ++i) a += static_cast<long double>(p.w1[j * n + i]) * img.pixels()[i];
  return a;
}

// Mean over labels of -[y log s(z) + (1-y) log(1-s(z))], written in the
// softplus form log(1 + e^z) - y z.
inline long double loss(const cxrseg::RefModelParams& p, const cxrseg::GrayImage& img,
                        const cxrseg::AbnormalityFlags& y) {
  std::vector<long double> h(p.hidden_units);
  for (std::size_t j = 0; j < p.hidden_units; ++j) h[j] = std::max(0.0L, hidden_pre(p, img, j));
  long double total = 0;
  for (std::size_t k = 0; k < cxrseg::kNumAbnormalities; ++k) {
    long double z = p.b2[k];
    for (std::size_t j = 0; j < p.hidden_units; ++j) z += static_cast<long double>(p.w2[k * p.hidden_units + j]) * h[j];
    const long double softplus = z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
    total += softplus - (y[k] ? z : 0.0L);
  }
  return total / cxrseg::kNumAbnormalities;
}

// Smallest |pre-activation|; finite differences straddling a ReLU kink are meaningless.
inline long double kink_distance(const Triple& t) {
  long double d = INFINITY;
  for (std::size_t j = 0; j < t.params.hidden_units; ++j) d = std::min(d, std::fabs(hidden_pre(t.params, t.image, j)));
  return d;
}

// Deterministic random triple; redraws (next attempt index) while too close to a kink.
inline Triple random_triple(std::uint64_t index, std::size_t side = 6, std::size_t hidden = 8) {
  for (std::uint64_t attempt = 0;; ++attempt) {
    cxrseg::CounterRng r(cxrseg::derive_stream(index, attempt), 0x67726164);
    Triple t;
    t.params = cxrseg::RefModelParams::zeros(side, hidden);
    for (auto tensor : t.params.tensors())
      for (auto& v : tensor) v = r.uniform(-0.6, 0.6);
    std::vector<double> px(side * side);
    for (auto& v : px) v = r.uniform01();
    t.image = cxrseg::GrayImage(side, side, std::move(px));
    for (auto& l : t.labels) l = r.bernoulli(0.5);
    if (kink_distance(t) > 1e-3L) return t;
  }
}

struct Result {
  double max_relative_error = 0;
  std::size_t coordinates_checked = 0;
};

// Central differences with step h against cxrseg::gradients.
inline Result check(const Triple& t, double h = 1e-4) {
  const cxrseg::RefModelParams analytic = cxrseg::gradients(t.params, t.image, t.labels);
  cxrseg::RefModelParams probe = t.params;
  auto probe_tensors = probe.tensors();
  const auto grad_tensors = analytic.tensors();
  Result res;
  for (std::size_t ti = 0; ti < probe_tensors.size(); ++ti) {
    for (std::size_t i = 0; i < probe_tensors[ti].size(); ++i) {
      const double orig = probe_tensors[ti][i];
      probe_tensors[ti][i] = orig + h;
      const long double up = loss(probe, t.image, t.labels);
      probe_tensors[ti][i] = orig - h;
      const long double down = loss(probe, t.image, t.labels);
      probe_tensors[ti][i] = orig;
      const double numeric = static_cast<double>((up - down) / (2.0L * h));
      const double a = grad_tensors[ti][i];
      if (std::fabs(a) <= 1e-8) continue;
      const double rel = std::fabs(a - numeric) / std::max(std::fabs(a), std::fabs(numeric));
      res.max_relative_error = std::max(res.max_relative_error, rel);
      ++res.coordinates_checked;
    }
  }
  return res;
}

}  // namespace gradcheck
