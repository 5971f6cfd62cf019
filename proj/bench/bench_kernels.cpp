// Parallel kernels against their serial references, plus the full 1080p
// estimate-and-fuse path. Run with --benchmark_filter to pick a subset.

#include <benchmark/benchmark.h>

#include <algorithm>
#include <filesystem>
#include <map>

#include "aquafuse/filters.hpp"
#include "aquafuse/fusion.hpp"
#include "aquafuse/metrics.hpp"
#include "aquafuse/parallel.hpp"
#include "aquafuse/reference.hpp"
#include "aquafuse/renderer.hpp"
#include "aquafuse/serialize.hpp"

namespace {

using namespace aquafuse;

const SyntheticScene& scene_for(int side) {
  static std::map<int, SyntheticScene> cache;
  auto it = cache.find(side);
  if (it == cache.end()) it = cache.emplace(side, make_scene(side, side * 3 / 4, 7)).first;
  return it->second;
}

void BM_MedianParallel(benchmark::State& state) {
  const Plane& depth = scene_for(static_cast<int>(state.range(0))).depth.plane();
  for (auto _ : state) benchmark::DoNotOptimize(median_blur(depth, kDepthMedianKernel));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(depth.extent().pixels()));
}

void BM_MedianReference(benchmark::State& state) {
  const Plane& depth = scene_for(static_cast<int>(state.range(0))).depth.plane();
  for (auto _ : state) benchmark::DoNotOptimize(reference::median_blur(depth, kDepthMedianKernel));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(depth.extent().pixels()));
}

Plane blue_channel(const Image& image) {
  Plane plane(image.extent(), 0.0);
  std::ranges::copy(image.channel(2), plane.values().begin());
  return plane;
}

void BM_LocalAverageParallel(benchmark::State& state) {
  const Plane source = blue_channel(render(scene_for(static_cast<int>(state.range(0)))));
  for (auto _ : state) benchmark::DoNotOptimize(local_space_average(source, {}));
}

void BM_LocalAverageReference(benchmark::State& state) {
  const Plane source = blue_channel(render(scene_for(static_cast<int>(state.range(0)))));
  for (auto _ : state) benchmark::DoNotOptimize(reference::local_space_average(source, {}));
}

void BM_SsimParallel(benchmark::State& state) {
  const SyntheticScene& scene = scene_for(static_cast<int>(state.range(0)));
  const Image observed = render(scene);
  for (auto _ : state) benchmark::DoNotOptimize(ssim(observed, scene.latent));
}

void BM_SsimReference(benchmark::State& state) {
  const SyntheticScene& scene = scene_for(static_cast<int>(state.range(0)));
  const Image observed = render(scene);
  for (auto _ : state) benchmark::DoNotOptimize(reference::ssim(observed, scene.latent));
}

void BM_EstimateAndFuse1080p(benchmark::State& state) {
  const ThreadLimit limit(static_cast<int>(state.range(0)));
  const SyntheticScene scene = make_scene(1920, 1080, 77);
  const Image observed = render(scene);
  const DepthCoeffs coeffs =
      depth_coeffs_from_json(read_json_file(std::filesystem::path(AQUAFUSE_DATA_DIR) / "default_depth_coeffs.json"));
  const WaterbodyParams reference = make_scene(64, 48, 78).truth;
  for (auto _ : state) {
    const SceneEstimate estimate = estimate_waterbody(observed, coeffs);
    benchmark::DoNotOptimize(fuse(estimate, reference));
  }
}

}  // namespace

BENCHMARK(BM_MedianParallel)->Arg(256)->Arg(1024)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_MedianReference)->Arg(256)->Arg(1024)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_LocalAverageParallel)->Arg(256)->Arg(512)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_LocalAverageReference)->Arg(256)->Arg(512)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SsimParallel)->Arg(256)->Arg(1024)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SsimReference)->Arg(256)->Arg(1024)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_EstimateAndFuse1080p)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond)->Iterations(3);

BENCHMARK_MAIN();
