#include <benchmark/benchmark.h>

#include "cwfd/attacker.hpp"
#include "cwfd/seqdist.hpp"
#include "cwfd/synth.hpp"
#include "cwfd/trigger_dynamic.hpp"
#include "cwfd/trigger_static.hpp"

namespace {

using namespace cwfd;

const LabeledDataset& corpus() {
  static const LabeledDataset ds = [] {
    SynthConfig s;
    s.classes = 4;
    s.per_class = 10;
    return make_synthetic_corpus(s);
  }();
  return ds;
}

std::vector<Direction> directions(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<Direction> out(n);
  for (auto& d : out) d = rng.uniform() < 0.3 ? kOutgoing : kIncoming;
  return out;
}

void BM_FastLev(benchmark::State& state) {
  const auto a = directions(static_cast<std::size_t>(state.range(0)), 1);
  auto b = a;
  b.insert(b.begin() + static_cast<std::ptrdiff_t>(b.size() / 2), 200, kIncoming);
  DistanceConfig c;
  c.band_width = static_cast<std::size_t>(state.range(1));
  for (auto _ : state) benchmark::DoNotOptimize(fast_lev(a, b, c));
}
BENCHMARK(BM_FastLev)->Args({1000, 64})->Args({1000, 512})->Args({5000, 512});

void BM_LevenshteinFull(benchmark::State& state) {
  const auto a = directions(static_cast<std::size_t>(state.range(0)), 2);
  const auto b = directions(static_cast<std::size_t>(state.range(0)), 3);
  for (auto _ : state) benchmark::DoNotOptimize(levenshtein_full(a, b));
}
BENCHMARK(BM_LevenshteinFull)->Arg(500)->Arg(1000);

void BM_OptimizeStatic(benchmark::State& state) {
  const auto& x = corpus().entries.front().trace;
  StaticOptConfig c;
  c.total = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(optimize_static(x, c, {}).score);
}
BENCHMARK(BM_OptimizeStatic)->Arg(400)->Arg(4000)->Unit(benchmark::kMillisecond);

void BM_PredictorForward(benchmark::State& state) {
  const auto m = PredictorModel::random(static_cast<std::size_t>(state.range(0)), 1, 50.0, 20000.0);
  const auto prefix = directions(static_cast<std::size_t>(state.range(1)), 4);
  for (auto _ : state) benchmark::DoNotOptimize(m.distribution(prefix).mean);
}
BENCHMARK(BM_PredictorForward)->Args({16, 500})->Args({64, 500})->Args({64, 2000});

void BM_ExtractTam(benchmark::State& state) {
  const auto& x = corpus().entries.front().trace;
  for (auto _ : state) benchmark::DoNotOptimize(extract_tam(x).values.sum());
}
BENCHMARK(BM_ExtractTam);

}  // namespace

BENCHMARK_MAIN();
