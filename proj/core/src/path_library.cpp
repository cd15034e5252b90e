#include "fleetpark/path_library.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace fleetpark {

namespace {

constexpr double kTol = 1e-9;

CellSet rect_cells(const GridSpec& grid, const Rect& r) {
  const Vec2 c = r.center();
  return rasterize_footprint(grid, Pose{c.x, c.y, 0.0}, BodyDims{r.width(), r.height()});
}

int row_sign(const LotLayout& layout, const SpotIndex& spot) {
  return layout.row(spot.lane, spot.y).side == RowSide::kAbove ? 1 : -1;
}

std::string key_name(int lane, int row, ParkDirection d) {
  std::ostringstream os;
  os << "lane " << lane << ", row " << row << ", " << to_string(d);
  return os.str();
}

Pose advance_segment(const Pose& p, const PathSegment& seg, double t) {
  const double a0 = p.heading + (seg.gear < 0 ? kPi : 0.0);
  Pose out = p;
  if (std::abs(seg.curvature) < 1e-12) {
    out.x += t * std::cos(a0);
    out.y += t * std::sin(a0);
  } else {
    const double a1 = a0 + seg.curvature * t;
    out.x += (std::sin(a1) - std::sin(a0)) / seg.curvature;
    out.y += (std::cos(a0) - std::cos(a1)) / seg.curvature;
    out.heading = p.heading + seg.curvature * t;
  }
  return out;
}

}  // namespace

std::string_view to_string(ParkDirection d) {
  return d == ParkDirection::kForward ? "forward" : "reverse";
}

ParkDirection parse_direction(std::string_view text) {
  if (text == "forward") return ParkDirection::kForward;
  if (text == "reverse") return ParkDirection::kReverse;
  throw ConfigError("unknown direction '" + std::string(text) + "'");
}

double total_length(const std::vector<PathSegment>& segments) {
  double l = 0.0;
  for (const PathSegment& s : segments) l += s.length;
  return l;
}

Pose pose_along(const Pose& start, const std::vector<PathSegment>& segments, double u) {
  Pose p = start;
  double left = u;
  for (const PathSegment& seg : segments) {
    const double t = std::min(left, seg.length);
    p = advance_segment(p, seg, t);
    left -= t;
    if (left <= 0.0) break;
  }
  p.heading = wrap_angle(p.heading);
  return p;
}

std::vector<Pose> sample_segments(const Pose& start, const std::vector<PathSegment>& segments,
                                  double ds) {
  const double len = total_length(segments);
  const int n = len <= 0.0 ? 0 : static_cast<int>(std::ceil(len / ds - 1e-9));
  std::vector<Pose> poses;
  poses.reserve(static_cast<std::size_t>(n) + 1);
  for (int m = 0; m <= n; ++m) {
    const double u = m == n ? len : std::min(m * ds, len);
    poses.push_back(pose_along(start, segments, u));
  }
  return poses;
}

ManeuverTemplate make_template(const TemplateKey& key, const SpotIndex& spot, const Pose& start,
                               std::vector<PathSegment> segments, const KinematicParams& params,
                               const GridSpec& grid) {
  ManeuverTemplate t;
  t.key = key;
  t.spot = spot;
  t.length_m = total_length(segments);
  t.poses = sample_segments(start, segments, params.step_length());
  t.segments = std::move(segments);
  t.suffix.resize(t.poses.size());
  CellSet acc(grid);
  for (std::size_t m = t.poses.size(); m-- > 0;) {
    acc |= rasterize_footprint(grid, t.poses[m], params.body);
    t.suffix[m] = acc;
  }
  return t;
}

std::string validate_template(const ManeuverTemplate& t, const LotLayout& layout,
                              const KinematicParams& params, const CellSet& allowed) {
  if (t.poses.empty()) {
    return "empty pose sequence";
  }
  const Rect lot = layout.lot_rect();
  for (const Pose& p : t.poses) {
    if (!quad_inside_rect(body_corners(p, params.body), lot)) {
      return "leaves the lot";
    }
  }
  const double ds = params.step_length();
  for (std::size_t m = 1; m < t.poses.size(); ++m) {
    if (norm(t.poses[m].position() - t.poses[m - 1].position()) > ds + 1e-9) {
      return "pose spacing exceeds one step";
    }
  }
  if (!t.sweep().is_subset_of(allowed)) {
    return "sweeps into another spot";
  }
  const Rect spot = spot_world_rect(layout, t.spot);
  if (!quad_inside_rect(body_corners(t.final_pose(), params.body), spot, 1e-6)) {
    return "final pose not inside the spot";
  }
  if (std::abs(std::cos(t.final_pose().heading)) > 1e-6) {
    return "final heading not aligned with the spot";
  }
  return {};
}

Pose QueuingPath::pose_at(double s) const {
  const double c = std::clamp(s, 0.0, length());
  return Pose{start.x + c, start.y, start.heading};
}

double advance_on_path(double path_end, double s, double v, double dt) {
  if (s >= path_end) {
    return s;
  }
  return std::min(s + v * dt, path_end);
}

double advance_on_path(const VehiclePath& path, double s, double v, double dt) {
  return advance_on_path(path.total_length(), s, v, dt);
}

ManeuverLibrary::ManeuverLibrary(LotLayout layout, KinematicParams params)
    : layout_(std::move(layout)), params_(params), grid_(GridSpec::for_layout(layout_)) {
  init_cells();
}

void ManeuverLibrary::init_cells() {
  grid_ = GridSpec::for_layout(layout_);
  const int n = layout_.spot_count();
  spot_cells_.clear();
  lane_cells_.clear();
  allowed_.clear();
  for (int f = 0; f < n; ++f) {
    spot_cells_.push_back(rect_cells(grid_, spot_world_rect(layout_, layout_.spot_at(f))));
  }
  for (const LaneSpec& l : layout_.lanes()) {
    lane_cells_.push_back(rect_cells(grid_, Rect{0.0, l.y_min, layout_.length_m(), l.y_max}));
  }
  for (int f = 0; f < n; ++f) {
    const SpotIndex s = layout_.spot_at(f);
    allowed_.push_back(lane_cells_[static_cast<std::size_t>(s.lane)] |
                       spot_cells_[static_cast<std::size_t>(f)]);
  }
  by_slot_.assign(static_cast<std::size_t>(2 * n), {});
}

std::size_t ManeuverLibrary::slot(const SpotIndex& spot, ParkDirection d) const {
  return static_cast<std::size_t>(2 * layout_.flat_index(spot) +
                                  (d == ParkDirection::kForward ? 0 : 1));
}

void ManeuverLibrary::add(std::shared_ptr<const ManeuverTemplate> t) {
  by_slot_[slot(t->spot, t->key.direction)].push_back(t);
  templates_.push_back(std::move(t));
}

Pose ManeuverLibrary::entry_pose(int lane) const {
  return Pose{0.5 * params_.body.length, layout_.lane(lane).centerline(), 0.0};
}

const std::vector<std::shared_ptr<const ManeuverTemplate>>& ManeuverLibrary::variants(
    const SpotIndex& spot, ParkDirection direction) const {
  return by_slot_[slot(spot, direction)];
}

std::shared_ptr<const ManeuverTemplate> ManeuverLibrary::select(const SpotIndex& spot,
                                                                ParkDirection requested) const {
  const auto& want = variants(spot, requested);
  if (!want.empty()) {
    return want.front();
  }
  const ParkDirection other =
      requested == ParkDirection::kForward ? ParkDirection::kReverse : ParkDirection::kForward;
  const auto& alt = variants(spot, other);
  if (!alt.empty()) {
    return alt.front();
  }
  throw std::logic_error("library has no template for the requested spot");
}

const CellSet& ManeuverLibrary::allowed_cells(const SpotIndex& spot) const {
  return allowed_[static_cast<std::size_t>(layout_.flat_index(spot))];
}

const CellSet& ManeuverLibrary::spot_cells(const SpotIndex& spot) const {
  return spot_cells_[static_cast<std::size_t>(layout_.flat_index(spot))];
}

CellSet ManeuverLibrary::other_spot_cells(const SpotIndex& spot) const {
  CellSet out(grid_);
  const int self = layout_.flat_index(spot);
  for (int f = 0; f < layout_.spot_count(); ++f) {
    if (f != self) out |= spot_cells_[static_cast<std::size_t>(f)];
  }
  return out;
}

namespace {

// Arc from the lane centerline, then a straight into the spot.
std::optional<std::pair<Pose, std::vector<PathSegment>>> arc_line_candidate(
    const LotLayout& layout, const SpotIndex& spot, ParkDirection d, double radius,
    std::string& why) {
  const int sigma = row_sign(layout, spot);
  const double yc = layout.lane(spot.lane).centerline();
  const Vec2 target = spot_world_rect(layout, spot).center();
  const double dy = std::abs(target.y - yc);
  if (radius > dy + kTol) {
    why = "turning radius exceeds the lane-to-spot offset";
    return std::nullopt;
  }
  const double arc = 0.5 * kPi * radius;
  const double tail = dy - radius;
  std::vector<PathSegment> segs;
  Pose start{0.0, yc, 0.0};
  if (d == ParkDirection::kForward) {
    start.x = target.x - radius;
    segs.push_back({1, sigma / radius, arc});
    if (tail > kTol) segs.push_back({1, 0.0, tail});
  } else {
    start.x = target.x + radius;
    segs.push_back({-1, -sigma / radius, arc});
    if (tail > kTol) segs.push_back({-1, 0.0, tail});
  }
  return std::make_pair(start, std::move(segs));
}

}  // namespace

ManeuverLibrary generate_maneuver_library(const LotLayout& layout, const KinematicParams& params) {
  if (!(params.min_turn_radius_m > 0.0) || !(params.maneuver_speed_mps > 0.0) ||
      !(params.dt_s > 0.0) || params.radius_classes < 1 || params.radius_step_m < 0.0 ||
      params.body.degenerate()) {
    throw ConfigError("invalid kinematic parameters");
  }
  ManeuverLibrary lib;
  lib.layout_ = layout;
  lib.params_ = params;
  lib.init_cells();

  struct KeyStatus {
    int lane;
    int row;
    ParkDirection dir;
    bool any = false;
    std::string last_reason;
  };
  std::vector<KeyStatus> keys;
  for (int lane = 0; lane < layout.lane_count(); ++lane) {
    for (int row = 0; row < 2; ++row) {
      for (ParkDirection d : {ParkDirection::kForward, ParkDirection::kReverse}) {
        keys.push_back({lane, row, d, false, {}});
      }
    }
  }

  for (KeyStatus& key : keys) {
    for (int x = 0; x < layout.n_x(); ++x) {
      const SpotIndex spot{x, key.row, key.lane};
      for (int k = 0; k < params.radius_classes; ++k) {
        const double radius = params.min_turn_radius_m + k * params.radius_step_m;
        std::string why;
        auto cand = arc_line_candidate(layout, spot, key.dir, radius, why);
        if (!cand) {
          key.last_reason = why;
          continue;
        }
        ManeuverTemplate t = make_template({key.lane, key.row, key.dir, k}, spot, cand->first,
                                           std::move(cand->second), params, lib.grid_);
        why = validate_template(t, layout, params, lib.allowed_cells(spot));
        if (!why.empty()) {
          key.last_reason = why;
          continue;
        }
        key.any = true;
        lib.add(std::make_shared<const ManeuverTemplate>(std::move(t)));
      }
    }
  }

  for (const KeyStatus& key : keys) {
    if (!key.any) {
      throw GenerationError("no feasible maneuver for " + key_name(key.lane, key.row, key.dir) +
                            " (" + key.last_reason + ")");
    }
  }
  for (int f = 0; f < layout.spot_count(); ++f) {
    const SpotIndex s = layout.spot_at(f);
    if (lib.variants(s, ParkDirection::kForward).empty() &&
        lib.variants(s, ParkDirection::kReverse).empty()) {
      std::ostringstream os;
      os << "spot (" << s.x << ", " << s.y << ") on lane " << s.lane
         << " cannot be reached in either direction";
      throw GenerationError(os.str());
    }
  }
  return lib;
}

QueuingPath build_queuing_path(const ManeuverLibrary& library, int lane,
                               const ManeuverTemplate& maneuver) {
  if (maneuver.spot.lane != lane) {
    throw ConfigError("target spot is not adjacent to lane " + std::to_string(lane));
  }
  QueuingPath q;
  q.lane = lane;
  q.start = library.entry_pose(lane);
  q.end = maneuver.start();
  if (std::abs(q.end.y - q.start.y) > 1e-9 || q.end.x < q.start.x - 1e-9) {
    throw std::logic_error("maneuver does not start on the lane centerline ahead of the entry");
  }
  return q;
}

std::optional<Regeneration> regenerate_feasible_maneuver(
    const std::shared_ptr<const ManeuverTemplate>& current, int step, const CellSet& blocked,
    const ManeuverLibrary& library) {
  const ManeuverTemplate& cur = *current;
  step = std::clamp(step, 0, cur.duration_steps());
  if (!cur.suffix[static_cast<std::size_t>(step)].intersects(blocked)) {
    return Regeneration{current, step};
  }
  const LotLayout& layout = library.layout();
  const KinematicParams& params = library.params();
  const SpotIndex spot = cur.spot;
  const int sigma = row_sign(layout, spot);
  const Vec2 target = spot_world_rect(layout, spot).center();
  const Pose p0 = cur.poses[static_cast<std::size_t>(step)];
  const double motion_end = sigma * 0.5 * kPi;

  std::optional<ManeuverTemplate> best;
  auto consider = [&](std::vector<PathSegment> segs, ParkDirection dir) {
    ManeuverTemplate t = make_template({spot.lane, spot.y, dir, -1}, spot, p0, std::move(segs),
                                       params, library.grid());
    if (best && t.length_m >= best->length_m) return;
    if (t.sweep().intersects(blocked)) return;
    if (!validate_template(t, layout, params, library.allowed_cells(spot)).empty()) return;
    best = std::move(t);
  };

  const double k_max = 1.0 / params.min_turn_radius_m;
  for (int lead_gear : {1, -1}) {
    for (double lead_kappa : {0.0, k_max, -k_max}) {
      for (int half_m = 0; half_m <= 24; ++half_m) {
        if (half_m == 0 && (lead_gear < 0 || lead_kappa != 0.0)) continue;
        const double a = 0.5 * half_m;
        std::vector<PathSegment> lead;
        if (a > 0.0) lead.push_back({lead_gear, lead_kappa, a});
        const Pose p1 = pose_along(p0, lead, a);
        for (int end_gear : {1, -1}) {
          const ParkDirection dir = end_gear > 0 ? ParkDirection::kForward : ParkDirection::kReverse;
          const double a1 = p1.heading + (end_gear < 0 ? kPi : 0.0);
          const double turn = wrap_angle(motion_end - a1);
          std::vector<PathSegment> segs = lead;
          double y2 = p1.y;
          if (std::abs(turn) < 1e-9) {
            if (std::abs(p1.x - target.x) > 1e-6) continue;
          } else {
            const double dx = target.x - p1.x;
            if (std::abs(dx) < 1e-9) continue;
            const double kappa = (std::sin(motion_end) - std::sin(a1)) / dx;
            if (kappa == 0.0 || (kappa > 0) != (turn > 0)) continue;
            if (1.0 / std::abs(kappa) < params.min_turn_radius_m - 1e-9) continue;
            segs.push_back({end_gear, kappa, turn / kappa});
            y2 = p1.y + (std::cos(a1) - std::cos(motion_end)) / kappa;
          }
          const double tail = sigma * (target.y - y2);
          if (tail < -1e-9) continue;
          if (tail > 1e-9) segs.push_back({end_gear, 0.0, tail});
          consider(std::move(segs), dir);
        }
      }
    }
  }
  if (!best) {
    return std::nullopt;
  }
  return Regeneration{std::make_shared<const ManeuverTemplate>(std::move(*best)), 0};
}

namespace {

nlohmann::json params_json(const KinematicParams& p) {
  return {{"min_turn_radius_m", p.min_turn_radius_m},
          {"maneuver_speed_mps", p.maneuver_speed_mps},
          {"dt_s", p.dt_s},
          {"radius_classes", p.radius_classes},
          {"radius_step_m", p.radius_step_m},
          {"body_length_m", p.body.length},
          {"body_width_m", p.body.width}};
}

nlohmann::json layout_json(const LotLayout& l) {
  return {{"length_m", l.length_m()},
          {"width_m", l.width_m()},
          {"n_x", l.n_x()},
          {"lanes", l.lane_count()}};
}

}  // namespace

void save_library(std::ostream& out, const ManeuverLibrary& library) {
  nlohmann::json j;
  j["format"] = "fleetpark-maneuver-library";
  j["version"] = kLibraryFormatVersion;
  j["params"] = params_json(library.params());
  j["layout"] = layout_json(library.layout());
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& t : library.templates()) {
    nlohmann::json segs = nlohmann::json::array();
    for (const PathSegment& s : t->segments) segs.push_back({s.gear, s.curvature, s.length});
    nlohmann::json poses = nlohmann::json::array();
    for (const Pose& p : t->poses) poses.push_back({p.x, p.y, p.heading});
    arr.push_back({{"lane", t->key.lane},
                   {"row", t->key.row},
                   {"x", t->spot.x},
                   {"direction", to_string(t->key.direction)},
                   {"offset_class", t->key.offset_class},
                   {"segments", segs},
                   {"poses", poses}});
  }
  j["templates"] = std::move(arr);
  out << j.dump() << '\n';
}

ManeuverLibrary load_library(std::istream& in, const LotLayout& layout,
                             const KinematicParams& params) {
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("library cache is not valid JSON: ") + e.what());
  }
  if (j.value("format", "") != "fleetpark-maneuver-library") {
    throw ConfigError("not a maneuver library cache");
  }
  if (j.value("version", -1) != kLibraryFormatVersion) {
    throw ConfigError("unsupported library cache version");
  }
  if (j.at("params") != params_json(params) || j.at("layout") != layout_json(layout)) {
    throw ConfigError("library cache was built for different parameters");
  }
  ManeuverLibrary lib;
  lib.layout_ = layout;
  lib.params_ = params;
  lib.init_cells();
  for (const auto& jt : j.at("templates")) {
    auto t = std::make_shared<ManeuverTemplate>();
    t->key = {jt.at("lane").get<int>(), jt.at("row").get<int>(),
              parse_direction(jt.at("direction").get<std::string>()),
              jt.at("offset_class").get<int>()};
    t->spot = {jt.at("x").get<int>(), t->key.row, t->key.lane};
    for (const auto& s : jt.at("segments")) {
      t->segments.push_back({s.at(0).get<int>(), s.at(1).get<double>(), s.at(2).get<double>()});
    }
    t->length_m = total_length(t->segments);
    for (const auto& p : jt.at("poses")) {
      t->poses.push_back({p.at(0).get<double>(), p.at(1).get<double>(), p.at(2).get<double>()});
    }
    if (t->poses.empty() || !layout.valid(t->spot)) {
      throw ConfigError("library cache holds a malformed template");
    }
    t->suffix.resize(t->poses.size());
    CellSet acc(lib.grid_);
    for (std::size_t m = t->poses.size(); m-- > 0;) {
      acc |= rasterize_footprint(lib.grid_, t->poses[m], params.body);
      t->suffix[m] = acc;
    }
    lib.add(std::move(t));
  }
  return lib;
}

void write_template_csv(std::ostream& out, const ManeuverTemplate& t) {
  out << "step,x,y,heading\n";
  char buf[128];
  for (std::size_t m = 0; m < t.poses.size(); ++m) {
    const Pose& p = t.poses[m];
    std::snprintf(buf, sizeof buf, "%zu,%.6f,%.6f,%.6f\n", m, p.x, p.y, p.heading);
    out << buf;
  }
}

}  // namespace fleetpark
