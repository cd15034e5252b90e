#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "fleetpark/experiment.hpp"
#include "fleetpark/svg_plot.hpp"
#include "oracles.hpp"

using namespace fleetpark;
namespace fs = std::filesystem;

namespace {

const ManeuverLibrary& lib() {
  static const ManeuverLibrary l =
      generate_maneuver_library(build_layout(default_lot_config()), KinematicParams{});
  return l;
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("fleetpark_test_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

AggregateCell cell(PolicyKind p, std::optional<int> dp, double mtt, double mql,
                   double ia = 2.0, LaneMode lanes = LaneMode::kOneLane) {
  AggregateCell c;
  c.key = {ia, p, lanes, dp};
  c.n_runs = 20;
  c.mtt_mean = mtt;
  c.mtt = {mtt - 1.0, mtt, mtt + 1.0};
  c.mql_mean = mql;
  c.mql = {mql - 1.0, mql, mql + 1.0};
  return c;
}

SweepSpec small_spec() {
  SweepSpec s;
  s.base.n_vehicles = 12;
  s.mean_interarrivals = {1.0, 3.0};
  s.delta_ps = {0, 4};
  s.policies = {PolicyKind::kRS, PolicyKind::kIS, PolicyKind::kFS};
  s.lane_modes = {LaneMode::kOneLane};
  s.seeds = {1, 2, 3};
  return s;
}

void expect_same(const AggregateCell& a, const AggregateCell& b) {
  auto same = [](double x, double y) { return (std::isnan(x) && std::isnan(y)) || x == y; };
  EXPECT_EQ(a.key, b.key);
  EXPECT_EQ(a.n_runs, b.n_runs);
  EXPECT_EQ(a.n_stalled, b.n_stalled);
  EXPECT_EQ(a.valid, b.valid);
  EXPECT_TRUE(same(a.mtt_mean, b.mtt_mean));
  EXPECT_TRUE(same(a.mtt.q25, b.mtt.q25));
  EXPECT_TRUE(same(a.mtt.median, b.mtt.median));
  EXPECT_TRUE(same(a.mtt.q75, b.mtt.q75));
  EXPECT_TRUE(same(a.mql_mean, b.mql_mean));
  EXPECT_TRUE(same(a.mql.q25, b.mql.q25));
  EXPECT_TRUE(same(a.mql.median, b.mql.median));
  EXPECT_TRUE(same(a.mql.q75, b.mql.q75));
  EXPECT_TRUE(same(a.rejected_mean, b.rejected_mean));
}

}  // namespace

TEST(Experiment, QuantileMatchesSortOracle) {
  EXPECT_DOUBLE_EQ(quantile({4, 1, 3, 2}, 0.25), 1.75);
  EXPECT_DOUBLE_EQ(quantile({4, 1, 3, 2}, 0.5), 2.5);
  EXPECT_DOUBLE_EQ(quantile({7}, 0.75), 7.0);
  EXPECT_THROW(quantile({}, 0.5), std::invalid_argument);
  std::mt19937_64 gen(5);
  std::uniform_real_distribution<double> u(0.0, 100.0);
  for (int n = 1; n < 60; ++n) {
    std::vector<double> v;
    for (int i = 0; i < n; ++i) v.push_back(u(gen));
    for (double p : {0.0, 0.25, 0.5, 0.75, 1.0}) {
      EXPECT_DOUBLE_EQ(quantile(v, p), oracle::sorted_quantile(v, p));
    }
  }
}

TEST(Experiment, AggregateSkipsStalledRuns) {
  std::vector<RunSummary> runs;
  for (int i = 0; i < 10; ++i) runs.push_back({static_cast<std::uint64_t>(i), 10.0 + i, i, false, 30, 0});
  runs[9].stalled = true;
  runs[9].mtt = 1e6;
  const AggregateCell a = aggregate({2.0, PolicyKind::kIS, LaneMode::kOneLane, 4}, runs);
  EXPECT_EQ(a.n_runs, 10);
  EXPECT_EQ(a.n_stalled, 1);
  EXPECT_TRUE(a.valid);
  EXPECT_DOUBLE_EQ(a.mtt_mean, 14.0);
  EXPECT_DOUBLE_EQ(a.mtt.median, 14.0);
  EXPECT_DOUBLE_EQ(a.mql_mean, 4.0);
  runs[8].stalled = true;
  EXPECT_FALSE(aggregate({2.0, PolicyKind::kIS, LaneMode::kOneLane, 4}, runs).valid);
  for (RunSummary& r : runs) r.stalled = true;
  const AggregateCell none = aggregate({2.0, PolicyKind::kIS, LaneMode::kOneLane, 4}, runs);
  EXPECT_TRUE(std::isnan(none.mtt_mean));
  EXPECT_TRUE(std::isnan(none.mql.median));
}

TEST(Experiment, OptimalPicksArgmin) {
  const std::vector<AggregateCell> t{cell(PolicyKind::kIS, 0, 10, 5), cell(PolicyKind::kIS, 4, 8, 6),
                                     cell(PolicyKind::kIS, 8, 9, 4)};
  const auto o = optimal_values(t);
  ASSERT_EQ(o.size(), 1u);
  EXPECT_EQ(o[0].t_mtt, 8.0);
  EXPECT_EQ(o[0].mtt_delta_p, 4);
  EXPECT_EQ(o[0].l_mql, 4.0);
  EXPECT_EQ(o[0].mql_delta_p, 8);
}

TEST(Experiment, OptimalTiesGoToSmallerInterval) {
  const std::vector<AggregateCell> t{cell(PolicyKind::kFS, 8, 7, 3), cell(PolicyKind::kFS, 2, 7, 3),
                                     cell(PolicyKind::kFS, 4, 9, 3)};
  const auto o = optimal_values(t);
  ASSERT_EQ(o.size(), 1u);
  EXPECT_EQ(o[0].mtt_delta_p, 2);
  EXPECT_EQ(o[0].mql_delta_p, 2);
}

TEST(Experiment, OptimalSingleCellAndGrouping) {
  std::vector<AggregateCell> t{cell(PolicyKind::kRS, std::nullopt, 12, 2),
                               cell(PolicyKind::kIS, 4, 8, 6),
                               cell(PolicyKind::kIS, 4, 5, 1, 2.0, LaneMode::kTwoLanes),
                               cell(PolicyKind::kIS, 2, 1, 1)};
  t.back().valid = false;
  const auto o = optimal_values(t);
  ASSERT_EQ(o.size(), 3u);
  for (const OptimalValue& v : o) {
    if (v.policy == PolicyKind::kRS) {
      EXPECT_EQ(v.t_mtt, 12.0);
      EXPECT_FALSE(v.mtt_delta_p);
    } else if (v.lanes == LaneMode::kOneLane) {
      EXPECT_EQ(v.t_mtt, 8.0);
      EXPECT_EQ(v.mtt_delta_p, 4);
    } else {
      EXPECT_EQ(v.t_mtt, 5.0);
    }
  }
  EXPECT_THROW(optimal_values(std::vector<AggregateCell>{}), std::invalid_argument);
}

TEST(Experiment, CellExpansion) {
  const auto cells = expand_cells(small_spec());
  ASSERT_EQ(cells.size(), 2u * (1 + 2 + 2));
  EXPECT_EQ(cells[0], (CellKey{1.0, PolicyKind::kRS, LaneMode::kOneLane, std::nullopt}));
  EXPECT_EQ(cells[1], (CellKey{1.0, PolicyKind::kIS, LaneMode::kOneLane, 0}));
  EXPECT_EQ(cells[2], (CellKey{1.0, PolicyKind::kIS, LaneMode::kOneLane, 4}));
  EXPECT_EQ(cell_label(cells[2]), "ia1_is_1L_dp4");
  const RunConfig rc = cell_run_config(small_spec(), cells[2], 7);
  EXPECT_EQ(rc.seed, 7u);
  EXPECT_EQ(rc.policy.delta_p, 4);
  EXPECT_EQ(rc.mean_interarrival_s, 1.0);
  EXPECT_EQ(rc.n_vehicles, 12);
}

TEST(Experiment, SingleCellMatchesSingleRun) {
  SweepSpec s;
  s.base.n_vehicles = 15;
  s.seeds = {42};
  const auto table = run_sweep(s, lib());
  ASSERT_EQ(table.size(), 1u);
  const RunMetrics m = run_simulation(lib(), cell_run_config(s, table[0].key, 42));
  EXPECT_EQ(table[0].mtt_mean, m.mtt);
  EXPECT_EQ(table[0].mql_mean, m.mql);
  EXPECT_EQ(table[0].mtt.median, m.mtt);
}

TEST(Experiment, SweepsAreRepeatableAcrossJobCounts) {
  const SweepSpec s = small_spec();
  const auto a = run_sweep(s, lib());
  SweepOptions two;
  two.jobs = 2;
  const auto b = run_sweep(s, lib(), two);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) expect_same(a[i], b[i]);
  std::ostringstream ca, cb;
  write_results_csv(ca, a);
  write_results_csv(cb, b);
  EXPECT_EQ(ca.str(), cb.str());
}

TEST(Experiment, ResumeMatchesUninterruptedSweep) {
  const SweepSpec s = small_spec();
  const auto plain = run_sweep_raw(s, lib());
  const fs::path dir = scratch("resume");
  SweepOptions opt;
  opt.resume_dir = dir;
  run_sweep_raw(s, lib(), opt);
  const auto cells = expand_cells(s);
  ASSERT_EQ(static_cast<std::size_t>(std::distance(fs::directory_iterator(dir), {})), cells.size());
  // Simulate an interruption: drop one cell, corrupt another's contents.
  fs::remove(dir / (cell_label(cells[3]) + ".json"));
  std::size_t calls = 0;
  opt.progress = [&](const SweepProgress&) { ++calls; };
  const auto resumed = run_sweep_raw(s, lib(), opt);
  EXPECT_EQ(calls, s.seeds.size());
  ASSERT_EQ(resumed.size(), plain.size());
  for (std::size_t c = 0; c < plain.size(); ++c) {
    ASSERT_EQ(resumed[c].size(), plain[c].size());
    for (std::size_t r = 0; r < plain[c].size(); ++r) {
      EXPECT_EQ(resumed[c][r].seed, plain[c][r].seed);
      EXPECT_EQ(resumed[c][r].mtt, plain[c][r].mtt);
      EXPECT_EQ(resumed[c][r].mql, plain[c][r].mql);
    }
  }
  // A cell file written for other seeds is recomputed.
  SweepSpec other = s;
  other.seeds = {4, 5, 6};
  calls = 0;
  run_sweep_raw(other, lib(), opt);
  EXPECT_EQ(calls, other.seeds.size() * cells.size());
  fs::remove_all(dir);
}

TEST(Experiment, CsvRoundTripIsExact) {
  std::vector<AggregateCell> t{cell(PolicyKind::kRS, std::nullopt, 12.345678901234567, 2),
                               cell(PolicyKind::kIS, 4, 1.0 / 3.0, 6.25)};
  t[1].valid = false;
  t[1].n_stalled = 3;
  t[1].mql.q75 = std::numeric_limits<double>::quiet_NaN();
  t[1].rejected_mean = 0.1;
  std::stringstream ss;
  write_results_csv(ss, t);
  const auto back = read_results_csv(ss);
  ASSERT_EQ(back.size(), t.size());
  for (std::size_t i = 0; i < t.size(); ++i) expect_same(back[i], t[i]);
  std::stringstream bad("mean_interarrival_s\n");
  EXPECT_THROW(read_results_csv(bad), ConfigError);
}

TEST(Experiment, PlotsUsePolicyMarkers) {
  const std::vector<AggregateCell> t{cell(PolicyKind::kRS, std::nullopt, 12, 2),
                                     cell(PolicyKind::kIS, 0, 10, 5), cell(PolicyKind::kIS, 4, 8, 4),
                                     cell(PolicyKind::kFS, 0, 11, 5), cell(PolicyKind::kFS, 4, 9, 4)};
  std::ostringstream svg;
  ASSERT_TRUE(write_metric_plot(svg, t, Metric::kMtt, 2.0, LaneMode::kOneLane));
  const std::string s = svg.str();
  EXPECT_EQ(s.rfind("<svg", 0), 0u);
  EXPECT_NE(s.find("stroke-dasharray"), std::string::npos);
  EXPECT_NE(s.find("<circle"), std::string::npos);
  EXPECT_NE(s.find("stroke=\"red\""), std::string::npos);
  EXPECT_NE(s.find("<polygon"), std::string::npos);
  EXPECT_NE(s.find("stroke=\"blue\""), std::string::npos);
  EXPECT_NE(s.find("</svg>"), std::string::npos);
  std::ostringstream none;
  EXPECT_FALSE(write_metric_plot(none, t, Metric::kMtt, 7.0, LaneMode::kOneLane));
  EXPECT_TRUE(none.str().empty());
}

TEST(Experiment, EmitOutputsWarnsAboutEmptyPlots) {
  std::vector<AggregateCell> t{cell(PolicyKind::kIS, 4, 8, 4), cell(PolicyKind::kIS, 4, 6, 2, 4.0)};
  t[1].valid = false;
  const fs::path dir = scratch("emit");
  const auto warnings = emit_outputs(dir, t);
  EXPECT_TRUE(fs::exists(dir / "results.csv"));
  EXPECT_TRUE(fs::exists(dir / "optima.json"));
  EXPECT_TRUE(fs::exists(dir / "plots" / "mtt_1L_ia2.svg"));
  EXPECT_FALSE(fs::exists(dir / "plots" / "mtt_1L_ia4.svg"));
  EXPECT_FALSE(warnings.empty());
  const std::string first = slurp(dir / "optima.json");
  emit_outputs(dir, t);
  EXPECT_EQ(slurp(dir / "optima.json"), first);
  const auto j = nlohmann::json::parse(first);
  EXPECT_EQ(j.at("version"), 1);
  ASSERT_EQ(j.at("optima").size(), 2u);
  EXPECT_TRUE(j.at("optima")[1].at("t_mtt").is_null());
  fs::remove_all(dir);
}

TEST(Experiment, SweepSpecParsing) {
  const nlohmann::json j = {{"name", "t"},
                            {"mean_interarrival_s", {1, 2}},
                            {"delta_p", {0, 4}},
                            {"policies", {"is", "fs"}},
                            {"lanes", {"1L"}},
                            {"seeds_per_cell", 3},
                            {"seed_base", 10}};
  const SweepSpec s = sweep_from_json(j);
  EXPECT_EQ(s.seeds, (std::vector<std::uint64_t>{10, 11, 12}));
  EXPECT_EQ(s.policies.size(), 2u);
  EXPECT_EQ(sweep_from_json(to_json(s)).seeds, s.seeds);
  nlohmann::json bad = j;
  bad["speed"] = 3;
  EXPECT_THROW(sweep_from_json(bad), ConfigError);
  bad = j;
  bad["delta_p"] = {-1};
  EXPECT_THROW(sweep_from_json(bad), ConfigError);
  bad = j;
  bad["policies"] = nlohmann::json::array();
  EXPECT_THROW(sweep_from_json(bad), ConfigError);
}
