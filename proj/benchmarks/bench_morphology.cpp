#include <benchmark/benchmark.h>

#include "cxrseg/morphology.hpp"
#include "cxrseg/rng.hpp"

namespace {

cxrseg::BinaryMask lung_like(std::size_t side) {
  cxrseg::BinaryMask m(side, side);
  for (std::size_t y = side / 8; y < side - side / 8; ++y)
    for (std::size_t x = side / 8; x < side - side / 8; ++x) m.set(x, y, (x < side * 7 / 16) || (x > side * 9 / 16));
  return m;
}

void BM_Erode(benchmark::State& state) {
  const auto side = static_cast<std::size_t>(state.range(0));
  const auto se = cxrseg::disk_se(static_cast<int>(state.range(1)));
  const auto m = lung_like(side);
  for (auto _ : state) benchmark::DoNotOptimize(cxrseg::erode(m, se));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(side * side));
}

void BM_Dilate(benchmark::State& state) {
  const auto side = static_cast<std::size_t>(state.range(0));
  const auto se = cxrseg::disk_se(static_cast<int>(state.range(1)));
  const auto m = lung_like(side);
  for (auto _ : state) benchmark::DoNotOptimize(cxrseg::dilate(m, se));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(side * side));
}

void BM_ExpandMask(benchmark::State& state) {
  const auto m = lung_like(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(cxrseg::expand_mask(m));
}

}  // namespace

BENCHMARK(BM_Erode)->Args({256, 5})->Args({1024, 5})->Args({1024, 50})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Dilate)->Args({256, 15})->Args({1024, 15})->Args({1024, 50})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ExpandMask)->Arg(256)->Arg(1024)->Unit(benchmark::kMillisecond);
