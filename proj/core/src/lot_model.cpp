#include "fleetpark/lot_model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "fleetpark/random.hpp"

namespace fleetpark {

namespace {

bool near_integer(double v, double tol = 1e-9) { return std::abs(v - std::round(v)) <= tol; }

std::string fmt_row(const SpotRowSpec& r) {
  std::ostringstream os;
  os << "row(lane=" << r.lane << ", y=" << r.y << ")";
  return os.str();
}

}  // namespace

const LaneSpec& LotLayout::lane(int id) const {
  if (id < 0 || id >= lane_count()) {
    throw std::out_of_range("lane id out of range");
  }
  return lanes_[static_cast<std::size_t>(id)];
}

const SpotRowSpec& LotLayout::row(int lane, int y) const {
  if (lane < 0 || lane >= lane_count() || (y != 0 && y != 1)) {
    throw std::out_of_range("row index out of range");
  }
  return rows_[static_cast<std::size_t>(2 * lane + y)];
}

bool LotLayout::valid(const SpotIndex& idx) const {
  return idx.lane >= 0 && idx.lane < lane_count() && (idx.y == 0 || idx.y == 1) && idx.x >= 0 &&
         idx.x < n_x_;
}

int LotLayout::flat_index(const SpotIndex& idx) const {
  if (!valid(idx)) {
    throw std::out_of_range("spot index out of range");
  }
  return (2 * idx.lane + idx.y) * n_x_ + idx.x;
}

SpotIndex LotLayout::spot_at(int flat) const {
  if (flat < 0 || flat >= spot_count()) {
    throw std::out_of_range("flat spot index out of range");
  }
  const int row = flat / n_x_;
  return SpotIndex{flat % n_x_, row % 2, row / 2};
}

LotLayout build_layout(const LotConfig& config) {
  if (!(config.length_m > 0.0) || !(config.width_m > 0.0) || !(config.grid_size_m > 0.0) ||
      !(config.spot_width_m > 0.0) || !(config.spot_depth_m > 0.0)) {
    throw ConfigError("lot, grid and spot dimensions must be positive");
  }
  const double columns = config.length_m / config.spot_width_m;
  if (!near_integer(columns)) {
    std::ostringstream os;
    os << "spot width " << config.spot_width_m << " m does not tile lot length "
       << config.length_m << " m";
    throw ConfigError(os.str());
  }
  for (double v : {config.length_m, config.width_m, config.spot_width_m, config.spot_depth_m}) {
    if (!near_integer(v / config.grid_size_m)) {
      throw ConfigError("lot and spot dimensions must be multiples of the grid size");
    }
  }
  if (config.lanes.empty()) {
    throw ConfigError("layout needs at least one lane");
  }

  LotLayout out;
  out.length_m_ = config.length_m;
  out.width_m_ = config.width_m;
  out.grid_size_m_ = config.grid_size_m;
  out.spot_width_m_ = config.spot_width_m;
  out.spot_depth_m_ = config.spot_depth_m;
  out.n_x_ = static_cast<int>(std::lround(columns));
  out.entrance_ = config.entrance;
  out.exit_ = config.exit;

  out.lanes_ = config.lanes;
  std::sort(out.lanes_.begin(), out.lanes_.end(),
            [](const LaneSpec& a, const LaneSpec& b) { return a.id < b.id; });
  for (std::size_t k = 0; k < out.lanes_.size(); ++k) {
    const LaneSpec& l = out.lanes_[k];
    if (l.id != static_cast<int>(k)) {
      throw ConfigError("lane ids must be 0..n-1");
    }
    if (!(l.y_max > l.y_min) || l.y_min < 0.0 || l.y_max > config.width_m + 1e-9) {
      throw ConfigError("lane " + std::to_string(l.id) + " lies outside the lot");
    }
  }

  out.rows_ = config.rows;
  for (SpotRowSpec& r : out.rows_) {
    if (r.lane < 0 || r.lane >= out.lane_count()) {
      throw ConfigError(fmt_row(r) + " refers to an unknown lane");
    }
    const LaneSpec& l = out.lanes_[static_cast<std::size_t>(r.lane)];
    if (r.side == RowSide::kAbove) {
      r.y_min = l.y_max;
      r.y_max = l.y_max + config.spot_depth_m;
    } else {
      r.y_max = l.y_min;
      r.y_min = l.y_min - config.spot_depth_m;
    }
    if (r.y_min < -1e-9 || r.y_max > config.width_m + 1e-9) {
      throw ConfigError(fmt_row(r) + " lies outside the lot");
    }
  }
  std::sort(out.rows_.begin(), out.rows_.end(), [](const SpotRowSpec& a, const SpotRowSpec& b) {
    return a.lane != b.lane ? a.lane < b.lane : a.y < b.y;
  });
  if (out.rows_.size() != 2 * out.lanes_.size()) {
    throw ConfigError("each lane needs exactly two spot rows");
  }
  for (int lane = 0; lane < out.lane_count(); ++lane) {
    const SpotRowSpec& r0 = out.rows_[static_cast<std::size_t>(2 * lane)];
    const SpotRowSpec& r1 = out.rows_[static_cast<std::size_t>(2 * lane + 1)];
    if (r0.lane != lane || r1.lane != lane || r0.y != 0 || r1.y != 1) {
      throw ConfigError("lane " + std::to_string(lane) + " needs rows y=0 and y=1");
    }
    if (r0.side == r1.side) {
      throw ConfigError("lane " + std::to_string(lane) + " rows must flank opposite sides");
    }
  }

  // Rows and lanes must not overlap each other.
  std::vector<std::pair<double, double>> bands;
  for (const LaneSpec& l : out.lanes_) bands.emplace_back(l.y_min, l.y_max);
  for (const SpotRowSpec& r : out.rows_) bands.emplace_back(r.y_min, r.y_max);
  std::sort(bands.begin(), bands.end());
  for (std::size_t k = 1; k < bands.size(); ++k) {
    if (bands[k].first < bands[k - 1].second - 1e-9) {
      throw ConfigError("lanes and spot rows overlap");
    }
  }
  return out;
}

LotConfig default_lot_config() {
  LotConfig c;
  c.length_m = 66.0;
  c.width_m = 34.0;
  c.grid_size_m = 1.0;
  c.spot_width_m = 3.0;
  c.spot_depth_m = 5.0;
  c.lanes = {LaneSpec{0, 5.0, 12.0}, LaneSpec{1, 22.0, 29.0}};
  c.rows = {
      SpotRowSpec{0, 0, RowSide::kAbove},
      SpotRowSpec{0, 1, RowSide::kBelow},
      SpotRowSpec{1, 0, RowSide::kBelow},
      SpotRowSpec{1, 1, RowSide::kAbove},
  };
  c.entrance = Pose{0.0, 8.5, 0.0};
  c.exit = Pose{0.0, 25.5, kPi};
  return c;
}

Rect spot_world_rect(const LotLayout& layout, const SpotIndex& idx) {
  if (!layout.valid(idx)) {
    throw std::out_of_range("spot index out of range");
  }
  const SpotRowSpec& row = layout.row(idx.lane, idx.y);
  const double w = layout.spot_width_m();
  const double x_max = layout.length_m() - w * idx.x;
  return Rect{x_max - w, row.y_min, x_max, row.y_max};
}

std::optional<SpotIndex> spot_at_point(const LotLayout& layout, Vec2 p) {
  for (const SpotRowSpec& row : layout.rows()) {
    if (p.y <= row.y_min || p.y >= row.y_max) {
      continue;
    }
    const double from_far_end = (layout.length_m() - p.x) / layout.spot_width_m();
    if (from_far_end <= 0.0 || from_far_end >= layout.n_x()) {
      return std::nullopt;
    }
    const double col = std::floor(from_far_end);
    if (from_far_end == col) {
      return std::nullopt;  // on a spot boundary
    }
    return SpotIndex{static_cast<int>(col), row.y, row.lane};
  }
  return std::nullopt;
}

std::vector<SpotState> seed_initial_occupancy(const LotLayout& layout, int n_free, Rng& rng) {
  const int total = layout.spot_count();
  if (n_free < 0 || n_free > total) {
    throw ConfigError("n_free must lie in [0, " + std::to_string(total) + "]");
  }
  std::vector<int> order(static_cast<std::size_t>(total));
  std::iota(order.begin(), order.end(), 0);
  // Partial Fisher-Yates: the first n_free entries become the free set.
  for (int k = 0; k < n_free; ++k) {
    const int pick = k + static_cast<int>(rng.below(static_cast<std::uint64_t>(total - k)));
    std::swap(order[static_cast<std::size_t>(k)], order[static_cast<std::size_t>(pick)]);
  }
  std::vector<SpotState> states(static_cast<std::size_t>(total));
  for (int f = 0; f < total; ++f) {
    states[static_cast<std::size_t>(f)] = SpotState{layout.spot_at(f), SpotStatus::kOccupied, -1};
  }
  for (int k = 0; k < n_free; ++k) {
    states[static_cast<std::size_t>(order[static_cast<std::size_t>(k)])].status =
        SpotStatus::kFree;
  }
  return states;
}

SpotTable::SpotTable(const LotLayout& layout, std::vector<SpotState> states)
    : layout_(&layout), states_(std::move(states)) {
  if (static_cast<int>(states_.size()) != layout.spot_count()) {
    throw ConfigError("spot table size does not match the layout");
  }
}

const SpotState& SpotTable::at(const SpotIndex& idx) const {
  return states_[static_cast<std::size_t>(layout_->flat_index(idx))];
}

void SpotTable::assign(const SpotIndex& idx, int vehicle) {
  SpotState& s = states_[static_cast<std::size_t>(layout_->flat_index(idx))];
  if (s.status != SpotStatus::kFree) {
    throw std::logic_error("assigning a spot that is not free");
  }
  s.status = SpotStatus::kAssigned;
  s.vehicle = vehicle;
}

void SpotTable::mark_parked(const SpotIndex& idx) {
  SpotState& s = states_[static_cast<std::size_t>(layout_->flat_index(idx))];
  if (s.status != SpotStatus::kAssigned) {
    throw std::logic_error("parking into a spot that was not assigned");
  }
  s.status = SpotStatus::kOccupied;
}

std::vector<SpotIndex> SpotTable::free_spots_on_lane(int lane) const {
  std::vector<SpotIndex> out;
  for (const SpotState& s : states_) {
    if (s.index.lane == lane && s.status == SpotStatus::kFree) {
      out.push_back(s.index);
    }
  }
  return out;
}

int SpotTable::count(SpotStatus status) const {
  return static_cast<int>(std::count_if(states_.begin(), states_.end(),
                                        [&](const SpotState& s) { return s.status == status; }));
}

}  // namespace fleetpark
