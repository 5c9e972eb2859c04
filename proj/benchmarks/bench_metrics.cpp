#include <benchmark/benchmark.h>

#include <vector>

#include "cxrseg/metrics.hpp"
#include "cxrseg/rng.hpp"
#include "cxrseg/stats.hpp"

namespace {

struct Instance {
  std::vector<double> scores;
  std::vector<bool> labels;
};

Instance instance(std::size_t n) {
  cxrseg::CounterRng rng(1, 2);
  Instance out;
  for (std::size_t i = 0; i < n; ++i) {
    const bool y = rng.bernoulli(0.2);
    out.labels.push_back(y);
    out.scores.push_back(rng.uniform01() * 0.7 + (y ? 0.3 : 0.0));
  }
  out.labels[0] = true;
  out.labels[1] = false;
  return out;
}

void BM_Auroc(benchmark::State& state) {
  const auto inst = instance(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(cxrseg::auroc(inst.scores, inst.labels));
  state.SetComplexityN(state.range(0));
}

void BM_ThresholdF1(benchmark::State& state) {
  const auto inst = instance(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(cxrseg::select_threshold_f1(inst.scores, inst.labels));
}

cxrseg::SquareMatrix random_symmetric(std::size_t k, std::uint64_t seed) {
  cxrseg::CounterRng rng(seed, 3);
  std::vector<double> v(k * k, 0.0);
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = i + 1; j < k; ++j) v[i * k + j] = v[j * k + i] = rng.uniform01();
  return {k, v};
}

void BM_MantelExhaustive(benchmark::State& state) {
  const auto a = random_symmetric(6, 1), b = random_symmetric(6, 2);
  for (auto _ : state) benchmark::DoNotOptimize(cxrseg::mantel_test(a, b));
}

void BM_MantelSampled(benchmark::State& state) {
  const auto a = random_symmetric(10, 1), b = random_symmetric(10, 2);
  for (auto _ : state) benchmark::DoNotOptimize(cxrseg::mantel_test(a, b, 10000, 5));
}

}  // namespace

BENCHMARK(BM_Auroc)->Arg(1573)->Arg(100000)->Complexity();
BENCHMARK(BM_ThresholdF1)->Arg(1573)->Arg(100000);
BENCHMARK(BM_MantelExhaustive)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_MantelSampled)->Unit(benchmark::kMillisecond);
