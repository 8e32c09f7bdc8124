// Serial reference kernels against their OpenMP counterparts. Thread count
// follows OMP_NUM_THREADS / REGOR_THREADS.

#include "regor/consistency.hpp"
#include "regor/evaluation.hpp"
#include "regor/features.hpp"
#include "regor/matching.hpp"
#include "regor/parallel.hpp"
#include "regor/refinement.hpp"

#include <benchmark/benchmark.h>

#include <random>

namespace {

using namespace regor;

const Scene& scene() {
  static const Scene s = [] {
    SceneSpec spec;
    spec.point_count = 4000;
    spec.initial_pair_count = 2000;
    spec.rng_seed = 11;
    return generate_scene(spec);
  }();
  return s;
}

const FeatureSet& source_features() {
  static const FeatureSet f = compute_weak_descriptor(scene().source, 0.15);
  return f;
}

const FeatureSet& target_features() {
  static const FeatureSet f = compute_weak_descriptor(scene().target, 0.15);
  return f;
}

std::vector<PositionedPair> pairs(std::size_t n) {
  const auto& s = scene();
  std::vector<Correspondence> head(s.initial.begin(), s.initial.begin() + static_cast<std::ptrdiff_t>(n));
  return positioned(head, s.source, s.target);
}

void BM_Descriptor_Serial(benchmark::State& st) {
  for (auto _ : st) benchmark::DoNotOptimize(serial::compute_weak_descriptor(scene().source, 0.15));
}
void BM_Descriptor_Parallel(benchmark::State& st) {
  for (auto _ : st) benchmark::DoNotOptimize(compute_weak_descriptor(scene().source, 0.15));
}

void BM_NnMatch_Serial(benchmark::State& st) {
  for (auto _ : st) benchmark::DoNotOptimize(serial::nn_match(source_features(), target_features()));
}
void BM_NnMatch_Parallel(benchmark::State& st) {
  for (auto _ : st) benchmark::DoNotOptimize(nn_match(source_features(), target_features()));
}

void BM_MnnMatch_Serial(benchmark::State& st) {
  for (auto _ : st) benchmark::DoNotOptimize(serial::mnn_match(source_features(), target_features(), 3));
}
void BM_MnnMatch_Parallel(benchmark::State& st) {
  for (auto _ : st) benchmark::DoNotOptimize(mnn_match(source_features(), target_features(), 3));
}

void BM_Ctc_Serial(benchmark::State& st) {
  const auto set = pairs(static_cast<std::size_t>(st.range(0)));
  for (auto _ : st) benchmark::DoNotOptimize(serial::ctc_matrix(set, set[0], ConsistencyParams{}));
}
void BM_Ctc_Parallel(benchmark::State& st) {
  const auto set = pairs(static_cast<std::size_t>(st.range(0)));
  for (auto _ : st) benchmark::DoNotOptimize(ctc_matrix(set, set[0], ConsistencyParams{}));
}

void BM_SecondOrder_Serial(benchmark::State& st) {
  const auto set = pairs(static_cast<std::size_t>(st.range(0)));
  for (auto _ : st) benchmark::DoNotOptimize(serial::second_order_matrix(set, 0.1));
}
void BM_SecondOrder_Parallel(benchmark::State& st) {
  const auto set = pairs(static_cast<std::size_t>(st.range(0)));
  for (auto _ : st) benchmark::DoNotOptimize(second_order_matrix(set, 0.1));
}

void BM_PoTcd_Serial(benchmark::State& st) {
  const auto& s = scene();
  for (auto _ : st) benchmark::DoNotOptimize(serial::po_tcd_count(s.truth.transform, s.source, s.target, 0.05));
}
void BM_PoTcd_Parallel(benchmark::State& st) {
  const auto& s = scene();
  for (auto _ : st) benchmark::DoNotOptimize(po_tcd_count(s.truth.transform, s.source, s.target, 0.05));
}

BENCHMARK(BM_Descriptor_Serial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Descriptor_Parallel)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_NnMatch_Serial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_NnMatch_Parallel)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_MnnMatch_Serial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_MnnMatch_Parallel)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Ctc_Serial)->Arg(100)->Arg(500)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Ctc_Parallel)->Arg(100)->Arg(500)->Unit(benchmark::kMillisecond);
// The serial second-order oracle is cubic; keep its sizes small.
BENCHMARK(BM_SecondOrder_Serial)->Arg(100)->Arg(300)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SecondOrder_Parallel)->Arg(100)->Arg(300)->Arg(2000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_PoTcd_Serial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_PoTcd_Parallel)->Unit(benchmark::kMillisecond);

}  // namespace

int main(int argc, char** argv) {
  configure_threads_from_env();
  benchmark::Initialize(&argc, argv);
  if (benchmark::ReportUnrecognizedArguments(argc, argv)) return 1;
  benchmark::RunSpecifiedBenchmarks();
  benchmark::Shutdown();
  return 0;
}
