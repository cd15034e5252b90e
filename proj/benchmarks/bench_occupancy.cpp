#include <benchmark/benchmark.h>

#include <random>

#include "fleetpark/lot_model.hpp"
#include "fleetpark/occupancy.hpp"

using namespace fleetpark;

namespace {

std::vector<Pose> random_poses(std::size_t n) {
  std::mt19937_64 gen(1);
  std::uniform_real_distribution<double> x(3.0, 63.0), y(3.0, 31.0), a(-kPi, kPi);
  std::vector<Pose> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back({x(gen), y(gen), a(gen)});
  return out;
}

const GridSpec& grid() {
  static const GridSpec g = GridSpec::for_layout(build_layout(default_lot_config()));
  return g;
}

}  // namespace

static void BM_RasterizeFootprint(benchmark::State& state) {
  const auto poses = random_poses(1024);
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(rasterize_footprint(grid(), poses[i++ & 1023], BodyDims{}));
  }
}
BENCHMARK(BM_RasterizeFootprint);

static void BM_RasterizeSwept(benchmark::State& state) {
  std::vector<Pose> path;
  for (int k = 0; k < state.range(0); ++k) path.push_back({10.0 + 0.1 * k, 8.5, 0.01 * k});
  for (auto _ : state) benchmark::DoNotOptimize(rasterize_swept(grid(), path, BodyDims{}));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_RasterizeSwept)->Arg(16)->Arg(128);

static void BM_ClaimIntersection(benchmark::State& state) {
  const auto poses = random_poses(256);
  std::vector<CellSet> sets;
  for (const Pose& p : poses) sets.push_back(rasterize_footprint(grid(), p, BodyDims{}));
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(claims_intersect(sets[i & 255], sets[(i * 7 + 3) & 255]));
    ++i;
  }
}
BENCHMARK(BM_ClaimIntersection);

static void BM_QuadOverlap(benchmark::State& state) {
  const auto poses = random_poses(256);
  std::vector<Quad> quads;
  for (const Pose& p : poses) quads.push_back(body_corners(p, BodyDims{}));
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(quads_overlap(quads[i & 255], quads[(i * 5 + 1) & 255]));
    ++i;
  }
}
BENCHMARK(BM_QuadOverlap);
