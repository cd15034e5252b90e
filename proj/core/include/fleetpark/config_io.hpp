#pragma once

#include <filesystem>

#include <nlohmann/json.hpp>

#include "fleetpark/engine.hpp"
#include "fleetpark/lot_model.hpp"
#include "fleetpark/path_library.hpp"

namespace fleetpark {

/// Parses a JSON file; throws ConfigError with the path on failure.
nlohmann::json read_json_file(const std::filesystem::path& path);

/// Layout schema:
///   length_m, width_m, grid_size_m, spot_width_m, spot_depth_m,
///   lanes: [{id, y_min, y_max}], rows: [{lane, y, side: "above"|"below"}],
///   entrance: {x, y, heading}, exit: {x, y, heading}
LotConfig lot_config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const LotConfig& c);
LotConfig load_lot_config(const std::filesystem::path& path);

/// Keys missing from `j` keep the value in `base`; unknown keys are errors.
KinematicParams kinematics_from_json(const nlohmann::json& j, KinematicParams base = {});
nlohmann::json to_json(const KinematicParams& p);

/// Run schema: seed, mean_interarrival_s, policy ("rs"|"is"|"fs"), delta_p,
/// lanes ("1L"|"2L"), open_lane, n_vehicles, dt_s, delta_k, v_ref_mps,
/// n_free_spots, forward_probability, resolve_deadlocks,
/// deadlock_bound_steps, idle_stall_steps, max_steps.
RunConfig run_config_from_json(const nlohmann::json& j, RunConfig base = {});
nlohmann::json to_json(const RunConfig& c);

}  // namespace fleetpark
