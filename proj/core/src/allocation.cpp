#include "fleetpark/allocation.hpp"

#include <algorithm>
#include <cctype>
#include <stdexcept>

#include "fleetpark/random.hpp"

namespace fleetpark {

namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

}  // namespace

std::string_view to_string(PolicyKind kind) {
  switch (kind) {
    case PolicyKind::kRS:
      return "rs";
    case PolicyKind::kIS:
      return "is";
    case PolicyKind::kFS:
      return "fs";
  }
  return "?";
}

PolicyKind parse_policy(std::string_view text) {
  const std::string t = lower(text);
  if (t == "rs") return PolicyKind::kRS;
  if (t == "is") return PolicyKind::kIS;
  if (t == "fs") return PolicyKind::kFS;
  throw ConfigError("unknown policy '" + std::string(text) + "' (expected rs|is|fs)");
}

std::string_view to_string(LaneMode mode) { return mode == LaneMode::kOneLane ? "1L" : "2L"; }

LaneMode parse_lane_mode(std::string_view text) {
  const std::string t = lower(text);
  if (t == "1" || t == "1l") return LaneMode::kOneLane;
  if (t == "2" || t == "2l") return LaneMode::kTwoLanes;
  throw ConfigError("unknown lane mode '" + std::string(text) + "' (expected 1|2)");
}

std::optional<SpotXY> spot_search(int delta_p, int x0, int y0, int n_x, const OccupiedFn& occupied) {
  if (n_x < 1 || delta_p < 0 || x0 < 0 || (y0 != 0 && y0 != 1)) {
    throw std::invalid_argument("spot_search: invalid arguments");
  }
  // After wrapping, each iteration starts at a column in [0, n_x) with
  // y = y0, so the walk is fully determined by that column; a repeat means
  // the walk has entered a cycle with nothing free on it.
  std::vector<char> seen(static_cast<std::size_t>(n_x), 0);
  int x = x0;
  int y = y0;
  for (;;) {
    if (x >= n_x) {
      if (n_x % (delta_p + 1) == 0) {
        x = (x + 1) % n_x;
      } else {
        x = x % n_x;
      }
    }
    if (seen[static_cast<std::size_t>(x)]) {
      return std::nullopt;
    }
    seen[static_cast<std::size_t>(x)] = 1;
    if (!occupied(x, y)) {
      return SpotXY{x, y};
    }
    y = 1 - y;
    if (!occupied(x, y)) {
      return SpotXY{x, y};
    }
    x = x + 1 + delta_p;
    y = y0;
  }
}

int choose_lane(const LaneOpening& opening, int lane_count, Rng& rng) {
  if (opening.mode == LaneMode::kOneLane || lane_count < 2) {
    return opening.open_lane;
  }
  return static_cast<int>(rng.below(static_cast<std::uint64_t>(lane_count)));
}

std::optional<SpotIndex> assign_spot(const AllocationPolicy& policy, int vehicle,
                                     std::optional<int> prev_x, int lane, SpotTable& spots,
                                     Rng& rng) {
  constexpr int kPreferredRow = 0;
  std::optional<SpotIndex> pick;
  if (policy.kind == PolicyKind::kRS) {
    const std::vector<SpotIndex> free = spots.free_spots_on_lane(lane);
    if (!free.empty()) {
      pick = free[static_cast<std::size_t>(rng.below(free.size()))];
    }
  } else {
    if (policy.delta_p < 0) {
      throw ConfigError("delta_p must be non-negative");
    }
    int x0 = 0;
    if (policy.kind == PolicyKind::kIS && prev_x) {
      x0 = *prev_x + 1 + policy.delta_p;
    }
    const auto occupied = [&](int x, int y) { return spots.taken(SpotIndex{x, y, lane}); };
    if (auto hit = spot_search(policy.delta_p, x0, kPreferredRow, spots.n_x(), occupied)) {
      pick = SpotIndex{hit->x, hit->y, lane};
    }
  }
  if (pick) {
    spots.assign(*pick, vehicle);
  }
  return pick;
}

Allocator::Allocator(AllocationPolicy policy, LaneOpening opening, int lane_count)
    : policy_(policy),
      opening_(opening),
      lane_count_(lane_count),
      last_x_(static_cast<std::size_t>(lane_count)) {
  if (opening_.open_lane < 0 || opening_.open_lane >= lane_count_) {
    throw ConfigError("open lane does not exist in the layout");
  }
}

int Allocator::choose_lane(Rng& rng) const { return fleetpark::choose_lane(opening_, lane_count_, rng); }

std::optional<SpotIndex> Allocator::assign(int vehicle, int lane, SpotTable& spots, Rng& rng) {
  auto& prev = last_x_[static_cast<std::size_t>(lane)];
  auto pick = assign_spot(policy_, vehicle, prev, lane, spots, rng);
  if (pick) {
    prev = pick->x;
  }
  return pick;
}

}  // namespace fleetpark
