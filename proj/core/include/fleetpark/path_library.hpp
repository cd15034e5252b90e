#pragma once

#include <iosfwd>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "fleetpark/geometry.hpp"
#include "fleetpark/lot_model.hpp"
#include "fleetpark/occupancy.hpp"

namespace fleetpark {

/// Raised when no maneuver fits the lot geometry.
class GenerationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class ParkDirection { kForward, kReverse };

std::string_view to_string(ParkDirection d);
ParkDirection parse_direction(std::string_view text);

struct KinematicParams {
  double min_turn_radius_m = 5.0;
  double maneuver_speed_mps = 1.0;
  double dt_s = 0.1;
  // Offset class k uses radius min_turn_radius_m + k * radius_step_m.
  int radius_classes = 3;
  double radius_step_m = 0.5;
  BodyDims body;

  double step_length() const { return maneuver_speed_mps * dt_s; }
  friend bool operator==(const KinematicParams&, const KinematicParams&) = default;
};

/// One piece of a parking path. gear is +1 (forward) or -1 (reverse);
/// curvature is the heading rate per meter travelled (0 for a straight).
struct PathSegment {
  int gear = 1;
  double curvature = 0.0;
  double length = 0.0;
};

/// Pose reached after travelling `u` meters along the segments from `start`.
Pose pose_along(const Pose& start, const std::vector<PathSegment>& segments, double u);
double total_length(const std::vector<PathSegment>& segments);
/// Poses at spacing ds from start to the exact end (last gap may be shorter).
std::vector<Pose> sample_segments(const Pose& start, const std::vector<PathSegment>& segments,
                                  double ds);

struct TemplateKey {
  int lane = 0;
  int row = 0;
  ParkDirection direction = ParkDirection::kForward;
  int offset_class = 0;  // -1 for maneuvers regenerated at run time
  friend bool operator==(const TemplateKey&, const TemplateKey&) = default;
};

/// A final-leg parking motion placed at one spot, sampled once per time step.
struct ManeuverTemplate {
  TemplateKey key;
  SpotIndex spot;
  std::vector<PathSegment> segments;
  std::vector<Pose> poses;
  // suffix[m] is the union of footprints over poses[m..end].
  std::vector<CellSet> suffix;
  double length_m = 0.0;

  int duration_steps() const { return static_cast<int>(poses.size()) - 1; }
  const Pose& start() const { return poses.front(); }
  const Pose& final_pose() const { return poses.back(); }
  const CellSet& sweep() const { return suffix.front(); }
};

/// Builds poses and suffix sweeps for a segment list.
ManeuverTemplate make_template(const TemplateKey& key, const SpotIndex& spot, const Pose& start,
                               std::vector<PathSegment> segments, const KinematicParams& params,
                               const GridSpec& grid);

/// Why a template candidate was rejected; empty when it is valid.
std::string validate_template(const ManeuverTemplate& t, const LotLayout& layout,
                              const KinematicParams& params, const CellSet& allowed);

/// Straight centerline drive from the lane entry to the maneuver start.
struct QueuingPath {
  int lane = 0;
  Pose start;
  Pose end;

  double length() const { return end.x - start.x; }
  Pose pose_at(double s) const;
};

/// Queuing leg followed by the maneuver placed at the target spot.
struct VehiclePath {
  QueuingPath queuing;
  std::shared_ptr<const ManeuverTemplate> maneuver;

  double total_length() const { return queuing.length() + maneuver->length_m; }
};

/// Position update with saturation at the path end: min(s + v*dt, end).
double advance_on_path(const VehiclePath& path, double s, double v, double dt);
double advance_on_path(double path_end, double s, double v, double dt);

class ManeuverLibrary {
 public:
  ManeuverLibrary(LotLayout layout, KinematicParams params);

  const LotLayout& layout() const { return layout_; }
  const KinematicParams& params() const { return params_; }
  const GridSpec& grid() const { return grid_; }

  /// Pose where a vehicle enters `lane` (body just inside the lot).
  Pose entry_pose(int lane) const;

  /// Every valid template, all spots, directions and offset classes.
  const std::vector<std::shared_ptr<const ManeuverTemplate>>& templates() const {
    return templates_;
  }
  /// Valid variants for a spot and direction, preferred first.
  const std::vector<std::shared_ptr<const ManeuverTemplate>>& variants(
      const SpotIndex& spot, ParkDirection direction) const;
  /// Preferred template; falls back to the other direction when the
  /// requested one does not fit at this spot.
  std::shared_ptr<const ManeuverTemplate> select(const SpotIndex& spot,
                                                 ParkDirection requested) const;

  /// Lane cells plus the spot's own cells: where a maneuver may sweep.
  const CellSet& allowed_cells(const SpotIndex& spot) const;
  /// Union of all spot rectangles other than `spot`.
  CellSet other_spot_cells(const SpotIndex& spot) const;
  const CellSet& spot_cells(const SpotIndex& spot) const;

 private:
  friend ManeuverLibrary generate_maneuver_library(const LotLayout&, const KinematicParams&);
  friend ManeuverLibrary load_library(std::istream&, const LotLayout&, const KinematicParams&);

  ManeuverLibrary() = default;
  void init_cells();
  void add(std::shared_ptr<const ManeuverTemplate> t);
  std::size_t slot(const SpotIndex& spot, ParkDirection d) const;

  LotLayout layout_;
  KinematicParams params_;
  GridSpec grid_;
  std::vector<std::shared_ptr<const ManeuverTemplate>> templates_;
  std::vector<std::vector<std::shared_ptr<const ManeuverTemplate>>> by_slot_;
  std::vector<CellSet> spot_cells_;
  std::vector<CellSet> lane_cells_;
  std::vector<CellSet> allowed_;
};

/// Arc-line templates for every spot, direction and offset class. Throws
/// GenerationError when a (lane, row, direction) key has no valid template
/// anywhere or a spot cannot be reached in either direction.
ManeuverLibrary generate_maneuver_library(const LotLayout& layout, const KinematicParams& params);

/// Queuing path ending at the maneuver's start pose.
QueuingPath build_queuing_path(const ManeuverLibrary& library, int lane,
                               const ManeuverTemplate& maneuver);

struct Regeneration {
  std::shared_ptr<const ManeuverTemplate> maneuver;
  int start_step = 0;
};

/// A replacement for the remainder of `current` (from `step`) whose sweep
/// avoids `blocked`. Returns `current` itself when its remaining sweep is
/// already clear, nullopt when no candidate qualifies. Candidates are a
/// short lead (straight or minimum-radius arc, either gear), one arc, and a
/// final straight into the spot, in either end orientation.
std::optional<Regeneration> regenerate_feasible_maneuver(
    const std::shared_ptr<const ManeuverTemplate>& current, int step, const CellSet& blocked,
    const ManeuverLibrary& library);

/// Versioned JSON cache of the template poses.
void save_library(std::ostream& out, const ManeuverLibrary& library);
/// Throws ConfigError on version or parameter mismatch.
ManeuverLibrary load_library(std::istream& in, const LotLayout& layout,
                             const KinematicParams& params);

/// "step,x,y,heading" rows.
void write_template_csv(std::ostream& out, const ManeuverTemplate& t);

inline constexpr int kLibraryFormatVersion = 1;

}  // namespace fleetpark
