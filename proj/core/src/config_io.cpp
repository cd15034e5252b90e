#include "fleetpark/config_io.hpp"

#include <fstream>
#include <set>

namespace fleetpark {

using nlohmann::json;

namespace {

void reject_unknown(const json& j, const std::set<std::string>& known, const std::string& what) {
  if (!j.is_object()) {
    throw ConfigError(what + " must be a JSON object");
  }
  for (const auto& [key, value] : j.items()) {
    (void)value;
    if (!known.count(key)) {
      throw ConfigError("unknown key '" + key + "' in " + what);
    }
  }
}

template <typename T>
T get(const json& j, const char* key, const std::string& what) {
  if (!j.contains(key)) {
    throw ConfigError("missing key '" + std::string(key) + "' in " + what);
  }
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError("key '" + std::string(key) + "' in " + what + " has the wrong type");
  }
}

template <typename T>
void maybe(const json& j, const char* key, T& out, const std::string& what) {
  if (j.contains(key)) out = get<T>(j, key, what);
}

Pose pose_from_json(const json& j, const std::string& what) {
  reject_unknown(j, {"x", "y", "heading"}, what);
  return Pose{get<double>(j, "x", what), get<double>(j, "y", what),
              j.contains("heading") ? get<double>(j, "heading", what) : 0.0};
}

json pose_json(const Pose& p) { return {{"x", p.x}, {"y", p.y}, {"heading", p.heading}}; }

}  // namespace

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw ConfigError("cannot open " + path.string());
  }
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

LotConfig lot_config_from_json(const json& j) {
  const std::string what = "layout";
  reject_unknown(j,
                 {"length_m", "width_m", "grid_size_m", "spot_width_m", "spot_depth_m", "lanes",
                  "rows", "entrance", "exit"},
                 what);
  LotConfig c;
  c.length_m = get<double>(j, "length_m", what);
  c.width_m = get<double>(j, "width_m", what);
  maybe(j, "grid_size_m", c.grid_size_m, what);
  maybe(j, "spot_width_m", c.spot_width_m, what);
  maybe(j, "spot_depth_m", c.spot_depth_m, what);
  for (const json& l : get<json>(j, "lanes", what)) {
    reject_unknown(l, {"id", "y_min", "y_max"}, "lane");
    c.lanes.push_back(LaneSpec{get<int>(l, "id", "lane"), get<double>(l, "y_min", "lane"),
                               get<double>(l, "y_max", "lane")});
  }
  for (const json& r : get<json>(j, "rows", what)) {
    reject_unknown(r, {"lane", "y", "side"}, "row");
    const auto side = get<std::string>(r, "side", "row");
    if (side != "above" && side != "below") {
      throw ConfigError("row side must be 'above' or 'below'");
    }
    c.rows.push_back(SpotRowSpec{get<int>(r, "lane", "row"), get<int>(r, "y", "row"),
                                 side == "above" ? RowSide::kAbove : RowSide::kBelow});
  }
  c.entrance = pose_from_json(get<json>(j, "entrance", what), "entrance");
  c.exit = pose_from_json(get<json>(j, "exit", what), "exit");
  return c;
}

json to_json(const LotConfig& c) {
  json lanes = json::array();
  for (const LaneSpec& l : c.lanes) lanes.push_back({{"id", l.id}, {"y_min", l.y_min}, {"y_max", l.y_max}});
  json rows = json::array();
  for (const SpotRowSpec& r : c.rows) {
    rows.push_back({{"lane", r.lane}, {"y", r.y}, {"side", r.side == RowSide::kAbove ? "above" : "below"}});
  }
  return {{"length_m", c.length_m},     {"width_m", c.width_m},
          {"grid_size_m", c.grid_size_m}, {"spot_width_m", c.spot_width_m},
          {"spot_depth_m", c.spot_depth_m}, {"lanes", lanes},
          {"rows", rows},               {"entrance", pose_json(c.entrance)},
          {"exit", pose_json(c.exit)}};
}

LotConfig load_lot_config(const std::filesystem::path& path) {
  return lot_config_from_json(read_json_file(path));
}

KinematicParams kinematics_from_json(const json& j, KinematicParams p) {
  const std::string what = "kinematics";
  reject_unknown(j,
                 {"min_turn_radius_m", "maneuver_speed_mps", "dt_s", "radius_classes",
                  "radius_step_m", "body_length_m", "body_width_m"},
                 what);
  maybe(j, "min_turn_radius_m", p.min_turn_radius_m, what);
  maybe(j, "maneuver_speed_mps", p.maneuver_speed_mps, what);
  maybe(j, "dt_s", p.dt_s, what);
  maybe(j, "radius_classes", p.radius_classes, what);
  maybe(j, "radius_step_m", p.radius_step_m, what);
  maybe(j, "body_length_m", p.body.length, what);
  maybe(j, "body_width_m", p.body.width, what);
  return p;
}

json to_json(const KinematicParams& p) {
  return {{"min_turn_radius_m", p.min_turn_radius_m}, {"maneuver_speed_mps", p.maneuver_speed_mps},
          {"dt_s", p.dt_s},                           {"radius_classes", p.radius_classes},
          {"radius_step_m", p.radius_step_m},         {"body_length_m", p.body.length},
          {"body_width_m", p.body.width}};
}

RunConfig run_config_from_json(const json& j, RunConfig c) {
  const std::string what = "run config";
  reject_unknown(j,
                 {"seed", "mean_interarrival_s", "policy", "delta_p", "lanes", "open_lane",
                  "n_vehicles", "dt_s", "delta_k", "v_ref_mps", "n_free_spots",
                  "forward_probability", "resolve_deadlocks", "deadlock_bound_steps",
                  "idle_stall_steps", "max_steps"},
                 what);
  maybe(j, "seed", c.seed, what);
  maybe(j, "mean_interarrival_s", c.mean_interarrival_s, what);
  if (j.contains("policy")) c.policy.kind = parse_policy(get<std::string>(j, "policy", what));
  maybe(j, "delta_p", c.policy.delta_p, what);
  if (j.contains("lanes")) {
    const json& l = j.at("lanes");
    c.lanes.mode = parse_lane_mode(l.is_number() ? std::to_string(l.get<int>()) : l.get<std::string>());
  }
  maybe(j, "open_lane", c.lanes.open_lane, what);
  maybe(j, "n_vehicles", c.n_vehicles, what);
  maybe(j, "dt_s", c.dt_s, what);
  maybe(j, "delta_k", c.delta_k, what);
  maybe(j, "v_ref_mps", c.v_ref_mps, what);
  maybe(j, "n_free_spots", c.n_free_spots, what);
  maybe(j, "forward_probability", c.forward_probability, what);
  maybe(j, "resolve_deadlocks", c.resolve_deadlocks, what);
  maybe(j, "deadlock_bound_steps", c.deadlock_bound_steps, what);
  maybe(j, "idle_stall_steps", c.idle_stall_steps, what);
  maybe(j, "max_steps", c.max_steps, what);
  return c;
}

json to_json(const RunConfig& c) {
  return {{"seed", c.seed},
          {"mean_interarrival_s", c.mean_interarrival_s},
          {"policy", std::string(to_string(c.policy.kind))},
          {"delta_p", c.policy.delta_p},
          {"lanes", std::string(to_string(c.lanes.mode))},
          {"open_lane", c.lanes.open_lane},
          {"n_vehicles", c.n_vehicles},
          {"dt_s", c.dt_s},
          {"delta_k", c.delta_k},
          {"v_ref_mps", c.v_ref_mps},
          {"n_free_spots", c.n_free_spots},
          {"forward_probability", c.forward_probability},
          {"resolve_deadlocks", c.resolve_deadlocks},
          {"deadlock_bound_steps", c.deadlock_bound_steps},
          {"idle_stall_steps", c.idle_stall_steps},
          {"max_steps", c.max_steps}};
}

}  // namespace fleetpark
