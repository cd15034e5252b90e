#include <benchmark/benchmark.h>

#include "fleetpark/engine.hpp"

using namespace fleetpark;

namespace {

const ManeuverLibrary& lib() {
  static const ManeuverLibrary l =
      generate_maneuver_library(build_layout(default_lot_config()), KinematicParams{});
  return l;
}

}  // namespace

static void BM_GenerateLibrary(benchmark::State& state) {
  const LotLayout layout = build_layout(default_lot_config());
  for (auto _ : state) benchmark::DoNotOptimize(generate_maneuver_library(layout, KinematicParams{}));
}
BENCHMARK(BM_GenerateLibrary)->Unit(benchmark::kMillisecond);

static void BM_RunEpisode(benchmark::State& state) {
  RunConfig c;
  c.mean_interarrival_s = static_cast<double>(state.range(0));
  c.lanes.mode = state.range(1) ? LaneMode::kTwoLanes : LaneMode::kOneLane;
  std::uint64_t seed = 1;
  for (auto _ : state) {
    c.seed = seed++;
    benchmark::DoNotOptimize(run_simulation(lib(), c));
  }
}
BENCHMARK(BM_RunEpisode)->Args({1, 0})->Args({2, 1})->Args({7, 0})->Unit(benchmark::kMillisecond);

static void BM_SpotSearch(benchmark::State& state) {
  std::vector<char> occ(44, 1);
  occ[43] = 0;
  const OccupiedFn occupied = [&](int x, int y) { return occ[static_cast<std::size_t>(y * 22 + x)] != 0; };
  for (auto _ : state) benchmark::DoNotOptimize(spot_search(4, 0, 0, 22, occupied));
}
BENCHMARK(BM_SpotSearch);
