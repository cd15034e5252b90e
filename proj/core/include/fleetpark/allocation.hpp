#pragma once

#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "fleetpark/lot_model.hpp"

namespace fleetpark {

class Rng;

enum class PolicyKind { kRS, kIS, kFS };

/// Spot assignment policy. delta_p (search interval) is ignored by RS.
struct AllocationPolicy {
  PolicyKind kind = PolicyKind::kIS;
  int delta_p = 4;
};

enum class LaneMode { kOneLane, kTwoLanes };

struct LaneOpening {
  LaneMode mode = LaneMode::kOneLane;
  int open_lane = 0;  // used in one-lane mode
};

std::string_view to_string(PolicyKind kind);
PolicyKind parse_policy(std::string_view text);  // "rs" | "is" | "fs"
std::string_view to_string(LaneMode mode);       // "1L" | "2L"
LaneMode parse_lane_mode(std::string_view text);  // "1", "2", "1L", "2L"

struct SpotXY {
  int x = 0;
  int y = 0;
  friend bool operator==(const SpotXY&, const SpotXY&) = default;
};

using OccupiedFn = std::function<bool(int x, int y)>;

/// Column/row search over one lane's two rows, starting at (x0, y0).
/// Columns past the far end wrap (shifted by one when n_x is a multiple of
/// delta_p + 1); a probe tries (x, y), then (x, 1 - y), then jumps to
/// (x + 1 + delta_p, y0). Returns nullopt ("lot full") once the probe
/// sequence revisits a column without finding a free spot.
std::optional<SpotXY> spot_search(int delta_p, int x0, int y0, int n_x, const OccupiedFn& occupied);

/// Lane for a new arrival.
int choose_lane(const LaneOpening& opening, int lane_count, Rng& rng);

/// Picks a spot for an arriving vehicle on `lane` and marks it assigned.
/// `prev_x` is the column assigned to the previous arrival on the same lane
/// (IS only). Returns nullopt when no spot can be found.
std::optional<SpotIndex> assign_spot(const AllocationPolicy& policy, int vehicle,
                                     std::optional<int> prev_x, int lane, SpotTable& spots,
                                     Rng& rng);

/// Remembers the previous same-lane assignment that IS needs.
class Allocator {
 public:
  Allocator(AllocationPolicy policy, LaneOpening opening, int lane_count);

  int choose_lane(Rng& rng) const;
  std::optional<SpotIndex> assign(int vehicle, int lane, SpotTable& spots, Rng& rng);

  const AllocationPolicy& policy() const { return policy_; }
  const LaneOpening& opening() const { return opening_; }

 private:
  AllocationPolicy policy_;
  LaneOpening opening_;
  int lane_count_;
  std::vector<std::optional<int>> last_x_;
};

}  // namespace fleetpark
