#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "fleetpark/geometry.hpp"

namespace fleetpark {

class Rng;

/// Raised for malformed or inconsistent configuration.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class RowSide { kBelow, kAbove };

/// A straight driving lane running along world X over the full lot length.
struct LaneSpec {
  int id = 0;
  double y_min = 0.0;
  double y_max = 0.0;

  double centerline() const { return 0.5 * (y_min + y_max); }
  double width() const { return y_max - y_min; }
};

/// A row of spots flanking a lane. `y` is the spot-frame Y index of the row
/// for that lane; the row's world extent follows from the lane edge and side.
struct SpotRowSpec {
  int lane = 0;
  int y = 0;
  RowSide side = RowSide::kAbove;
  double y_min = 0.0;  // derived by build_layout
  double y_max = 0.0;  // derived by build_layout
};

struct LotConfig {
  double length_m = 0.0;
  double width_m = 0.0;
  double grid_size_m = 1.0;
  double spot_width_m = 3.0;  // pitch along the lane
  double spot_depth_m = 5.0;
  std::vector<LaneSpec> lanes;
  std::vector<SpotRowSpec> rows;
  Pose entrance;
  Pose exit;
};

/// Spot coordinates in the lane-local frame. x = 0 is the column farthest
/// from the gate.
struct SpotIndex {
  int x = 0;
  int y = 0;
  int lane = 0;

  friend bool operator==(const SpotIndex&, const SpotIndex&) = default;
};

/// Immutable lot geometry. Spot columns run from the far (high world X) end
/// toward the gate at world X = 0.
class LotLayout {
 public:
  double length_m() const { return length_m_; }
  double width_m() const { return width_m_; }
  double grid_size_m() const { return grid_size_m_; }
  double spot_width_m() const { return spot_width_m_; }
  double spot_depth_m() const { return spot_depth_m_; }
  int n_x() const { return n_x_; }
  const std::vector<LaneSpec>& lanes() const { return lanes_; }
  const std::vector<SpotRowSpec>& rows() const { return rows_; }
  const Pose& entrance() const { return entrance_; }
  const Pose& exit() const { return exit_; }

  int lane_count() const { return static_cast<int>(lanes_.size()); }
  const LaneSpec& lane(int id) const;
  const SpotRowSpec& row(int lane, int y) const;
  int spot_count() const { return n_x_ * static_cast<int>(rows_.size()); }

  bool valid(const SpotIndex& idx) const;
  /// Dense index in [0, spot_count()); lane-major, then row, then column.
  int flat_index(const SpotIndex& idx) const;
  SpotIndex spot_at(int flat) const;

  Rect lot_rect() const { return {0.0, 0.0, length_m_, width_m_}; }

 private:
  friend LotLayout build_layout(const LotConfig& config);

  double length_m_ = 0.0;
  double width_m_ = 0.0;
  double grid_size_m_ = 1.0;
  double spot_width_m_ = 0.0;
  double spot_depth_m_ = 0.0;
  int n_x_ = 0;
  std::vector<LaneSpec> lanes_;
  std::vector<SpotRowSpec> rows_;  // sorted by (lane, y)
  Pose entrance_;
  Pose exit_;
};

/// Validates a configuration and derives the layout. Throws ConfigError when
/// the spots do not tile the lot length or the topology is inconsistent.
LotLayout build_layout(const LotConfig& config);

/// The bundled two-lane, 4 x 22 spot lot (same content as
/// configs/default_layout.json).
LotConfig default_lot_config();

/// World rectangle of a spot. Throws std::out_of_range for invalid indices.
Rect spot_world_rect(const LotLayout& layout, const SpotIndex& idx);

/// Spot whose rectangle contains the point strictly inside, if any.
std::optional<SpotIndex> spot_at_point(const LotLayout& layout, Vec2 p);

enum class SpotStatus { kFree, kAssigned, kOccupied };

struct SpotState {
  SpotIndex index;
  SpotStatus status = SpotStatus::kFree;
  int vehicle = -1;  // owner while assigned or after parking
};

/// Random initial occupancy: exactly n_free spots free, the rest occupied.
std::vector<SpotState> seed_initial_occupancy(const LotLayout& layout, int n_free, Rng& rng);

/// Mutable per-run spot bookkeeping. Status only moves
/// free -> assigned -> occupied.
class SpotTable {
 public:
  SpotTable(const LotLayout& layout, std::vector<SpotState> states);

  const SpotState& at(const SpotIndex& idx) const;
  /// Occupied for allocation purposes: parked or already promised.
  bool taken(const SpotIndex& idx) const { return at(idx).status != SpotStatus::kFree; }
  void assign(const SpotIndex& idx, int vehicle);
  void mark_parked(const SpotIndex& idx);

  std::vector<SpotIndex> free_spots_on_lane(int lane) const;
  int count(SpotStatus status) const;
  int n_x() const { return layout_->n_x(); }
  const LotLayout& layout() const { return *layout_; }
  const std::vector<SpotState>& states() const { return states_; }

 private:
  const LotLayout* layout_;
  std::vector<SpotState> states_;
};

}  // namespace fleetpark
