#include <gtest/gtest.h>

#include <random>

#include "fleetpark/lot_model.hpp"
#include "fleetpark/occupancy.hpp"
#include "oracles.hpp"

using namespace fleetpark;

namespace {

std::set<std::pair<int, int>> as_pairs(const CellSet& s) {
  std::set<std::pair<int, int>> out;
  for (const Cell& c : s.cells()) out.insert({c.i, c.j});
  return out;
}

}  // namespace

TEST(Occupancy, GridCoversDefaultLot) {
  const GridSpec g = GridSpec::for_layout(build_layout(default_lot_config()));
  EXPECT_EQ(g.nx, 66);
  EXPECT_EQ(g.ny, 34);
  EXPECT_DOUBLE_EQ(g.d, 1.0);
}

TEST(Occupancy, AlignedBodyCoversExpectedCells) {
  const GridSpec g{20, 10, 1.0};
  // 4 x 2 body centred on (5, 5): x in [3, 7), y in [4, 6).
  const CellSet s = rasterize_footprint(g, {5.0, 5.0, 0.0}, {4.0, 2.0});
  EXPECT_EQ(s.size(), 8u);
  EXPECT_TRUE(s.contains({3, 4}));
  EXPECT_TRUE(s.contains({6, 5}));
  EXPECT_FALSE(s.contains({7, 5}));
  EXPECT_FALSE(s.contains({2, 5}));
}

TEST(Occupancy, OffsetBodyTouchesExtraRow) {
  const GridSpec g{20, 10, 1.0};
  const CellSet s = rasterize_footprint(g, {5.0, 5.5, 0.0}, {4.0, 2.0});
  EXPECT_EQ(s.size(), 12u);
}

TEST(Occupancy, FootprintMatchesClippingOracle) {
  const GridSpec g{30, 20, 1.0};
  const BodyDims body{4.7, 2.0};
  std::mt19937_64 gen(99);
  std::uniform_real_distribution<double> x(2.0, 28.0), y(2.0, 18.0), a(-kPi, kPi);
  for (int n = 0; n < 2000; ++n) {
    const Pose p{x(gen), y(gen), a(gen)};
    const auto got = as_pairs(rasterize_footprint(g, p, body));
    const auto want = oracle::raster(p, body.length, body.width, g.nx, g.ny, g.d);
    ASSERT_EQ(got, want) << "pose " << p.x << "," << p.y << "," << p.heading;
  }
}

TEST(Occupancy, PartsOutsideGridAreDropped) {
  const GridSpec g{10, 10, 1.0};
  const CellSet s = rasterize_footprint(g, {0.0, 5.0, 0.0}, {4.0, 2.0});
  EXPECT_EQ(s.size(), 4u);
}

TEST(Occupancy, SweptIsUnionOfFootprints) {
  const GridSpec g{40, 20, 1.0};
  std::vector<Pose> poses;
  for (int k = 0; k <= 30; ++k) poses.push_back({5.0 + 0.5 * k, 8.0 + 0.1 * k, 0.05 * k});
  CellSet want(g);
  for (const Pose& p : poses) want |= rasterize_footprint(g, p, {4.7, 2.0});
  EXPECT_EQ(rasterize_swept(g, poses, {4.7, 2.0}), want);
}

TEST(Occupancy, DisjointAndOverlappingClaims) {
  const GridSpec g{30, 10, 1.0};
  const CellSet a = rasterize_footprint(g, {5.0, 5.0, 0.0}, {4.0, 2.0});
  const CellSet b = rasterize_footprint(g, {15.0, 5.0, 0.0}, {4.0, 2.0});
  const CellSet c = rasterize_footprint(g, {8.0, 5.0, 0.0}, {4.0, 2.0});
  EXPECT_FALSE(claims_intersect(a, b));
  EXPECT_TRUE(claims_intersect(a, c));
  // Abutting bodies share an edge only.
  const CellSet d = rasterize_footprint(g, {9.0, 5.0, 0.0}, {4.0, 2.0});
  EXPECT_FALSE(claims_intersect(a, d));
}

TEST(Occupancy, SetAlgebra) {
  const GridSpec g{70, 3, 1.0};
  CellSet a(g), b(g);
  for (int i = 0; i < 70; i += 2) a.insert({i, 1});
  for (int i = 0; i < 70; i += 3) b.insert({i, 1});
  EXPECT_EQ((a & b).size(), 12u);
  EXPECT_EQ((a | b).size(), 35u + 24u - 12u);
  EXPECT_EQ((a - b).size(), 35u - 12u);
  EXPECT_TRUE((a & b).is_subset_of(a));
  EXPECT_FALSE(a.is_subset_of(b));
  a.insert({100, 100});
  EXPECT_EQ(a.size(), 35u);
}

TEST(Occupancy, ClaimsResetEachEpoch) {
  const GridSpec g{10, 4, 1.0};
  GridClaims claims(g);
  CellSet body(g);
  body.insert({1, 1});
  CellSet sweep(g);
  sweep.insert({2, 1});
  sweep.insert({1, 1});
  claims.claim_body(0, body);
  claims.claim_maneuver(0, sweep);
  ASSERT_NE(claims.body(0), nullptr);
  EXPECT_EQ(claims.maneuver(1), nullptr);
  const std::uint64_t e = claims.epoch();
  claims.reset();
  EXPECT_EQ(claims.epoch(), e + 1);
  EXPECT_EQ(claims.body(0), nullptr);
  EXPECT_TRUE(claims.all_bodies().empty());
}

TEST(Occupancy, RenderGolden) {
  const GridSpec g{6, 3, 1.0};
  GridClaims claims(g);
  CellSet body(g);
  body.insert({0, 0});
  body.insert({1, 0});
  CellSet sweep(g);
  sweep.insert({1, 0});
  sweep.insert({2, 1});
  sweep.insert({3, 2});
  claims.claim_body(0, body);
  claims.claim_maneuver(1, sweep);
  EXPECT_EQ(claims.render(), "...M..\n..M...\nBB....\n");
}
