#include <benchmark/benchmark.h>

#include "synthrel/detection.hpp"
#include "synthrel/fidelity.hpp"
#include "synthrel/fixtures.hpp"
#include "synthrel/learners.hpp"
#include "synthrel/random.hpp"

using namespace synthrel;

namespace {

LabeledData detection_data(std::size_t rows) {
  auto halves = fixtures::split_half(fixtures::mixed_table(rows, 1), 1);
  return preprocess(halves.first, halves.second);
}

void BM_GbtFit(benchmark::State& state) {
  auto data = detection_data(static_cast<std::size_t>(state.range(0)));
  auto spec = LearnerSpec::gbt_default();
  for (auto _ : state) benchmark::DoNotOptimize(fit(spec, data.X, data.y));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_GbtFit)->Arg(500)->Arg(2000)->Unit(benchmark::kMillisecond);

void BM_LogisticFit(benchmark::State& state) {
  auto data = detection_data(static_cast<std::size_t>(state.range(0)));
  auto spec = LearnerSpec::logistic_default();
  for (auto _ : state) benchmark::DoNotOptimize(fit(spec, data.X, data.y));
}
BENCHMARK(BM_LogisticFit)->Arg(2000)->Arg(20000)->Unit(benchmark::kMillisecond);

void BM_DiscriminativeDetection(benchmark::State& state) {
  auto halves = fixtures::split_half(fixtures::mixed_table(2000, 2), 2);
  auto real = single_table_database(halves.first);
  auto syn = single_table_database(halves.second);
  const auto kind = static_cast<LearnerKind>(state.range(0));
  auto spec = LearnerSpec::of(kind, TaskKind::Classification);
  for (auto _ : state) benchmark::DoNotOptimize(discriminative_detection(real, syn, "data", {}, spec));
  state.SetLabel(std::string(to_string(kind)));
}
BENCHMARK(BM_DiscriminativeDetection)
    ->Arg(static_cast<int>(LearnerKind::Logistic))
    ->Arg(static_cast<int>(LearnerKind::Gbt))
    ->Unit(benchmark::kMillisecond);

void BM_KsTwoSample(benchmark::State& state) {
  Rng rng(3);
  std::vector<double> a(static_cast<std::size_t>(state.range(0))), b(a.size());
  for (auto& v : a) v = rng.normal();
  for (auto& v : b) v = rng.normal();
  for (auto _ : state) benchmark::DoNotOptimize(ks_two_sample(a, b));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_KsTwoSample)->RangeMultiplier(10)->Range(1000, 100000)->Complexity();

void BM_Bootstrap(benchmark::State& state) {
  auto table = fixtures::mixed_table(1000, 4);
  TableMetric metric = [](const Table& a, const Table& b) {
    return wasserstein1(a.column("x1").non_null_numbers(), b.column("x1").non_null_numbers());
  };
  BootstrapSpec spec;
  spec.workers = static_cast<unsigned>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(bootstrap_replicates(metric, table, spec));
}
BENCHMARK(BM_Bootstrap)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond)->UseRealTime();

void BM_Mmd(benchmark::State& state) {
  auto a = fixtures::mixed_table(static_cast<std::size_t>(state.range(0)), 5);
  auto b = fixtures::mixed_table(static_cast<std::size_t>(state.range(0)), 6);
  for (auto _ : state) benchmark::DoNotOptimize(mmd(a, b));
}
BENCHMARK(BM_Mmd)->Arg(250)->Arg(500)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
