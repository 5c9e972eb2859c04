#include <benchmark/benchmark.h>

#include "cxrseg/imaging.hpp"
#include "cxrseg/model.hpp"
#include "cxrseg/rng.hpp"

namespace {

cxrseg::GrayImage noise(std::size_t side) {
  cxrseg::CounterRng rng(4, 5);
  std::vector<double> px(side * side);
  for (auto& p : px) p = rng.uniform01();
  return cxrseg::GrayImage(side, side, std::move(px));
}

void BM_Forward(benchmark::State& state) {
  const auto side = static_cast<std::size_t>(state.range(0));
  const auto params = cxrseg::RefModelParams::random(side, 64, 1);
  const auto img = noise(side);
  for (auto _ : state) benchmark::DoNotOptimize(cxrseg::forward(params, img));
}

void BM_Gradients(benchmark::State& state) {
  const auto side = static_cast<std::size_t>(state.range(0));
  const auto params = cxrseg::RefModelParams::random(side, 64, 1);
  const auto img = noise(side);
  const cxrseg::AbnormalityFlags y{true, false, false, true, false};
  for (auto _ : state) benchmark::DoNotOptimize(cxrseg::gradients(params, img, y));
}

}  // namespace

BENCHMARK(BM_Forward)->Arg(32)->Arg(64);
BENCHMARK(BM_Gradients)->Arg(32)->Arg(64);
