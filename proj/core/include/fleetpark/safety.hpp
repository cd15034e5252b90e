#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "fleetpark/occupancy.hpp"
#include "fleetpark/path_library.hpp"

namespace fleetpark {

enum class ReachKind { kQueuing, kManeuver };

/// Cells a vehicle would cover if it kept moving: the short-horizon
/// lookahead while queuing, or the rest of the template while maneuvering.
struct ReachableSet {
  int owner = -1;
  ReachKind kind = ReachKind::kQueuing;
  CellSet cells;
};

/// Which rule stopped a vehicle.
enum class Constraint {
  kNone,
  kQueueBody,          // lookahead meets another vehicle's body
  kQueueManeuver,      // lookahead meets an earlier vehicle's maneuver claim
  kManeuverBody,       // remaining sweep meets another vehicle's body
  kManeuverManeuver,   // remaining sweep meets an earlier vehicle's maneuver claim
};

std::string_view to_string(Constraint c);

struct SafetyVerdict {
  bool proceed = true;
  std::optional<int> blocking_vehicle;
  Constraint violated = Constraint::kNone;

  static SafetyVerdict go() { return {}; }
  static SafetyVerdict yield(int blocker, Constraint c) { return {false, blocker, c}; }
};

/// Lookahead for a vehicle at queuing progress `s`: every pose it would
/// reach in the next `delta_k` steps if it were never stopped, driving the
/// rest of the queuing leg at v_ref and then entering the maneuver. Ends at
/// the path end.
ReachableSet forward_reachable_queuing(int owner, const VehiclePath& path, double s, int delta_k,
                                       double v_ref, double dt, const BodyDims& body,
                                       const GridSpec& grid);

/// Remaining sweep of a maneuver at step `step`.
ReachableSet maneuver_reachable(int owner, const ManeuverTemplate& maneuver, int step);

/// Queuing rules against the current claims. The earliest-arrived offending
/// vehicle is reported; body conflicts win over maneuver conflicts with the
/// same vehicle. Vehicle ids are arrival indices.
SafetyVerdict check_queuing(const ReachableSet& d, const GridClaims& claims);

/// Maneuvering rules against the current claims, same reporting order.
SafetyVerdict check_maneuvering(const ReachableSet& d_m, const GridClaims& claims);

/// A vehicle's view for deadlock analysis.
struct DeadlockInput {
  int id = -1;
  const CellSet* body = nullptr;
  // Set for vehicles maneuvering or waiting at their maneuver start.
  const CellSet* maneuver_reach = nullptr;
  SafetyVerdict verdict;
};

/// Vehicles that wait on each other. Members are sorted ascending; a
/// mutual group has exactly two members whose remaining sweeps each meet
/// the other's body.
struct Deadlock {
  std::vector<int> members;
  bool mutual = false;
  friend bool operator==(const Deadlock&, const Deadlock&) = default;
};

/// Mutual sweep-versus-body pairs, plus cycles in the yields-to graph
/// (each yielding vehicle points at its reported blocker).
std::vector<Deadlock> detect_deadlock(std::span<const DeadlockInput> vehicles);

/// Counts how long each deadlock group persists and flags the run as
/// stalled once one outlives the bound.
class DeadlockMonitor {
 public:
  explicit DeadlockMonitor(int bound_steps = 50) : bound_(bound_steps) {}

  /// Feeds this step's groups. Returns true when some group has now been
  /// present for more than the bound in consecutive steps.
  bool observe(const std::vector<Deadlock>& groups);
  int longest_streak() const;
  int bound() const { return bound_; }

 private:
  int bound_;
  std::map<std::vector<int>, int> streak_;
};

}  // namespace fleetpark
