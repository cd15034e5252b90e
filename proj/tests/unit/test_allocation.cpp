#include <gtest/gtest.h>

#include <random>
#include <set>

#include "fleetpark/allocation.hpp"
#include "fleetpark/random.hpp"
#include "oracles.hpp"

using namespace fleetpark;

namespace {

struct Pattern {
  int n_x;
  std::vector<char> occ;  // [y * n_x + x]
  bool operator()(int x, int y) const { return occ[static_cast<std::size_t>(y * n_x + x)] != 0; }
};

Pattern all_free(int n_x) { return {n_x, std::vector<char>(static_cast<std::size_t>(2 * n_x), 0)}; }

SpotTable all_free_table(const LotLayout& l) {
  Rng rng(1);
  return SpotTable(l, seed_initial_occupancy(l, l.spot_count(), rng));
}

}  // namespace

TEST(SpotSearch, FirstProbeFree) {
  const Pattern p = all_free(22);
  const auto hit = spot_search(2, 5, 0, 22, p);
  ASSERT_TRUE(hit);
  EXPECT_EQ(*hit, (SpotXY{5, 0}));
}

TEST(SpotSearch, FallsToOtherRow) {
  Pattern p = all_free(22);
  p.occ[5] = 1;
  const auto hit = spot_search(2, 5, 0, 22, p);
  ASSERT_TRUE(hit);
  EXPECT_EQ(*hit, (SpotXY{5, 1}));
}

TEST(SpotSearch, JumpsByInterval) {
  Pattern p = all_free(22);
  p.occ[5] = 1;
  p.occ[22 + 5] = 1;
  const auto hit = spot_search(2, 5, 0, 22, p);
  ASSERT_TRUE(hit);
  EXPECT_EQ(*hit, (SpotXY{8, 0}));
}

TEST(SpotSearch, WrapShiftsWhenColumnsDivide) {
  // n_x = 6, dp = 2: 6 % 3 == 0, so column 6 wraps to 1 rather than 0.
  Pattern p = all_free(6);
  for (int x : {3}) {
    p.occ[static_cast<std::size_t>(x)] = 1;
    p.occ[static_cast<std::size_t>(6 + x)] = 1;
  }
  const auto hit = spot_search(2, 3, 0, 6, p);
  ASSERT_TRUE(hit);
  EXPECT_EQ(*hit, (SpotXY{1, 0}));
  // 7 % 3 != 0: column 7 wraps to 0.
  Pattern q = all_free(7);
  q.occ[4] = 1;
  q.occ[7 + 4] = 1;
  const auto hit2 = spot_search(2, 4, 0, 7, q);
  ASSERT_TRUE(hit2);
  EXPECT_EQ(*hit2, (SpotXY{0, 0}));
}

TEST(SpotSearch, FullLotReportsFull) {
  Pattern p{5, std::vector<char>(10, 1)};
  EXPECT_FALSE(spot_search(0, 0, 0, 5, p));
  EXPECT_FALSE(spot_search(3, 2, 1, 5, p));
}

TEST(SpotSearch, RejectsBadArguments) {
  const Pattern p = all_free(4);
  EXPECT_THROW(spot_search(-1, 0, 0, 4, p), std::invalid_argument);
  EXPECT_THROW(spot_search(0, 0, 2, 4, p), std::invalid_argument);
  EXPECT_THROW(spot_search(0, 0, 0, 0, p), std::invalid_argument);
}

TEST(SpotSearch, MatchesProbeEnumerator) {
  std::mt19937_64 gen(2024);
  int full = 0;
  for (int n = 0; n < 20000; ++n) {
    const int n_x = 2 + static_cast<int>(gen() % 9);
    const int dp = static_cast<int>(gen() % 9);
    const int x0 = static_cast<int>(gen() % static_cast<unsigned>(2 * n_x + 1));
    const int y0 = static_cast<int>(gen() % 2);
    const double density = std::uniform_real_distribution<double>(0.0, 1.0)(gen);
    Pattern p{n_x, std::vector<char>(static_cast<std::size_t>(2 * n_x))};
    for (char& c : p.occ) c = std::uniform_real_distribution<double>(0.0, 1.0)(gen) < density;
    const auto got = spot_search(dp, x0, y0, n_x, p);
    const auto want = oracle::probe_search(dp, x0, y0, n_x, p);
    ASSERT_EQ(got.has_value(), want.has_value()) << n_x << " " << dp << " " << x0 << " " << y0;
    if (got) {
      EXPECT_EQ(got->x, want->first);
      EXPECT_EQ(got->y, want->second);
    } else {
      ++full;
    }
  }
  EXPECT_GT(full, 100);
}

TEST(Allocation, IntervalStartsAfterPredecessor) {
  const LotLayout l = build_layout(default_lot_config());
  SpotTable spots = all_free_table(l);
  Rng rng(1);
  const auto s = assign_spot({PolicyKind::kIS, 1}, 0, 0, 0, spots, rng);
  ASSERT_TRUE(s);
  EXPECT_EQ(*s, (SpotIndex{2, 0, 0}));
  EXPECT_EQ(spots.at(*s).status, SpotStatus::kAssigned);
}

TEST(Allocation, FarthestAlwaysStartsAtZero) {
  const LotLayout l = build_layout(default_lot_config());
  SpotTable spots = all_free_table(l);
  Allocator alloc({PolicyKind::kFS, 4}, {}, 2);
  Rng rng(1);
  std::vector<SpotIndex> got;
  for (int v = 0; v < 4; ++v) got.push_back(*alloc.assign(v, 0, spots, rng));
  EXPECT_EQ(got[0], (SpotIndex{0, 0, 0}));
  EXPECT_EQ(got[1], (SpotIndex{0, 1, 0}));
  EXPECT_EQ(got[2], (SpotIndex{5, 0, 0}));
  EXPECT_EQ(got[3], (SpotIndex{5, 1, 0}));
}

TEST(Allocation, IntervalSpacesConsecutiveVehicles) {
  const LotLayout l = build_layout(default_lot_config());
  SpotTable spots = all_free_table(l);
  Allocator alloc({PolicyKind::kIS, 4}, {}, 2);
  Rng rng(1);
  std::vector<int> xs;
  for (int v = 0; v < 6; ++v) xs.push_back(alloc.assign(v, 0, spots, rng)->x);
  EXPECT_EQ(xs, (std::vector<int>{0, 5, 10, 15, 20, 3}));
}

TEST(Allocation, RandomWithSingleFreeSpot) {
  const LotLayout l = build_layout(default_lot_config());
  Rng seed_rng(5);
  auto states = seed_initial_occupancy(l, 0, seed_rng);
  const SpotIndex only{13, 1, 0};
  states[static_cast<std::size_t>(l.flat_index(only))].status = SpotStatus::kFree;
  for (std::uint64_t s = 0; s < 20; ++s) {
    SpotTable spots(l, states);
    Rng rng(s);
    const auto pick = assign_spot({PolicyKind::kRS, 0}, 0, std::nullopt, 0, spots, rng);
    ASSERT_TRUE(pick);
    EXPECT_EQ(*pick, only);
  }
}

TEST(Allocation, RandomIsUniformOverFreeSpots) {
  const LotLayout l = build_layout(default_lot_config());
  std::vector<int> hits(22, 0);
  for (std::uint64_t s = 0; s < 22000; ++s) {
    SpotTable spots = all_free_table(l);
    Rng rng(s);
    const auto pick = assign_spot({PolicyKind::kRS, 0}, 0, std::nullopt, 1, spots, rng);
    ASSERT_TRUE(pick);
    EXPECT_EQ(pick->lane, 1);
    ++hits[static_cast<std::size_t>(pick->x)];
  }
  for (int h : hits) EXPECT_NEAR(h, 1000, 150);
}

TEST(Allocation, NeverReturnsTakenSpot) {
  const LotLayout l = build_layout(default_lot_config());
  for (PolicyKind kind : {PolicyKind::kRS, PolicyKind::kIS, PolicyKind::kFS}) {
    for (int dp : {0, 3, 21}) {
      Rng occ(17, RngStream::kOccupancy);
      SpotTable spots(l, seed_initial_occupancy(l, 48, occ));
      Allocator alloc({kind, dp}, {}, 2);
      Rng rng(3);
      std::set<int> seen;
      for (int v = 0; v < 60; ++v) {
        const auto pick = alloc.assign(v, 0, spots, rng);
        if (!pick) continue;
        EXPECT_TRUE(seen.insert(l.flat_index(*pick)).second);
        EXPECT_EQ(spots.at(*pick).vehicle, v);
      }
    }
  }
}

TEST(Allocation, LaneChoice) {
  Rng rng(8);
  int lane1 = 0;
  for (int k = 0; k < 4000; ++k) {
    EXPECT_EQ(choose_lane({LaneMode::kOneLane, 0}, 2, rng), 0);
    lane1 += choose_lane({LaneMode::kTwoLanes, 0}, 2, rng);
  }
  EXPECT_NEAR(lane1, 2000, 200);
}

TEST(Allocation, ParseNames) {
  EXPECT_EQ(parse_policy("IS"), PolicyKind::kIS);
  EXPECT_EQ(parse_lane_mode("2"), LaneMode::kTwoLanes);
  EXPECT_THROW(parse_policy("best"), ConfigError);
  EXPECT_THROW(parse_lane_mode("3L"), ConfigError);
}
