#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "fleetpark/config_io.hpp"
#include "fleetpark/experiment.hpp"

using namespace fleetpark;
namespace fs = std::filesystem;

namespace {

const fs::path kConfigs = FLEETPARK_CONFIG_DIR;

}  // namespace

TEST(ConfigIo, RunConfigRoundTrip) {
  RunConfig c;
  c.seed = 99;
  c.policy = {PolicyKind::kFS, 8};
  c.lanes = {LaneMode::kTwoLanes, 1};
  c.mean_interarrival_s = 7.0;
  c.resolve_deadlocks = false;
  const RunConfig back = run_config_from_json(to_json(c));
  EXPECT_EQ(to_json(back), to_json(c));
  EXPECT_EQ(back.seed, 99u);
  EXPECT_EQ(back.policy.kind, PolicyKind::kFS);
  EXPECT_FALSE(back.resolve_deadlocks);
}

TEST(ConfigIo, MissingKeysKeepBase) {
  RunConfig base;
  base.n_vehicles = 5;
  const RunConfig c = run_config_from_json({{"seed", 3}}, base);
  EXPECT_EQ(c.seed, 3u);
  EXPECT_EQ(c.n_vehicles, 5);
}

TEST(ConfigIo, UnknownOrMistypedKeysFail) {
  EXPECT_THROW(run_config_from_json({{"sede", 3}}), ConfigError);
  EXPECT_THROW(run_config_from_json({{"seed", "three"}}), ConfigError);
  EXPECT_THROW(run_config_from_json({{"policy", "best"}}), ConfigError);
  EXPECT_THROW(kinematics_from_json({{"wheelbase", 2.7}}), ConfigError);
}

TEST(ConfigIo, KinematicsRoundTrip) {
  KinematicParams p;
  p.min_turn_radius_m = 5.5;
  p.body.length = 4.5;
  EXPECT_EQ(kinematics_from_json(to_json(p)), p);
}

TEST(ConfigIo, LayoutRoundTrip) {
  const LotConfig c = default_lot_config();
  const LotConfig back = lot_config_from_json(to_json(c));
  EXPECT_EQ(to_json(back), to_json(c));
  nlohmann::json bad = to_json(c);
  bad["rows"][0]["side"] = "left";
  EXPECT_THROW(lot_config_from_json(bad), ConfigError);
  bad = to_json(c);
  bad.erase("lanes");
  EXPECT_THROW(lot_config_from_json(bad), ConfigError);
}

TEST(ConfigIo, FileErrorsNameThePath) {
  try {
    read_json_file("/nonexistent/fleetpark.json");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("/nonexistent/fleetpark.json"), std::string::npos);
  }
  const fs::path p = fs::temp_directory_path() / "fleetpark_bad.json";
  std::ofstream(p) << "{ not json";
  EXPECT_THROW(read_json_file(p), ConfigError);
  fs::remove(p);
}

TEST(ConfigIo, BundledConfigsParse) {
  const RunConfig run = run_config_from_json(read_json_file(kConfigs / "run_default.json"));
  EXPECT_EQ(to_json(run), to_json(RunConfig{}));
  for (const char* name : {"sweep_desk.json", "sweep_full.json"}) {
    const SweepSpec s = sweep_from_json(read_json_file(kConfigs / name));
    EXPECT_FALSE(expand_cells(s).empty()) << name;
  }
  const auto acc = read_json_file(kConfigs / "acceptance.json");
  EXPECT_EQ(acc.at("statistical_seeds").size(), 20u);
  EXPECT_EQ(acc.at("collision_runs"), 200);
}
