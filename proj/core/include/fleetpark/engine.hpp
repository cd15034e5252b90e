#pragma once

#include <cstdint>
#include <deque>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "fleetpark/allocation.hpp"
#include "fleetpark/lot_model.hpp"
#include "fleetpark/occupancy.hpp"
#include "fleetpark/path_library.hpp"
#include "fleetpark/random.hpp"
#include "fleetpark/safety.hpp"

namespace fleetpark {

enum class VehicleMode { kOutsideQueue, kQueuing, kManeuvering, kParked, kRejected };

std::string_view to_string(VehicleMode m);

struct Vehicle {
  int id = -1;  // arrival index
  std::int64_t arrival_step = 0;
  VehicleMode mode = VehicleMode::kOutsideQueue;
  int lane = -1;
  std::optional<SpotIndex> spot;
  ParkDirection requested_direction = ParkDirection::kForward;
  VehiclePath path;
  double s = 0.0;  // meters along the whole path
  int m = 0;       // maneuver step
  double maneuver_base_s = 0.0;
  double v = 0.0;
  std::int64_t finish_step = -1;
  SafetyVerdict verdict;
  bool held = false;
  int regenerations = 0;
  CellSet body;  // footprint at the current pose (in-lot vehicles)

  bool in_lot() const { return mode == VehicleMode::kQueuing || mode == VehicleMode::kManeuvering; }
  bool at_maneuver_start() const {
    return mode == VehicleMode::kQueuing && s >= path.queuing.length();
  }
  Pose pose() const;
};

struct RunConfig {
  std::uint64_t seed = 1;
  double mean_interarrival_s = 2.0;
  AllocationPolicy policy;
  LaneOpening lanes;
  int n_vehicles = 30;
  double dt_s = 0.1;
  int delta_k = 15;
  double v_ref_mps = 4.0;
  int n_free_spots = 48;
  double forward_probability = 0.5;
  bool resolve_deadlocks = true;
  int deadlock_bound_steps = 50;
  // No vehicle moved, entered or parked for this many steps.
  int idle_stall_steps = 600;
  std::int64_t max_steps = 1'000'000;
};

/// Throws ConfigError for out-of-range values.
void validate(const RunConfig& config, const LotLayout& layout, const KinematicParams& params);

struct VehicleRecord {
  int id = -1;
  double t0 = 0.0;
  std::optional<double> tf;
  int lane = -1;
  std::optional<SpotIndex> spot;
  ParkDirection direction = ParkDirection::kForward;
  bool rejected = false;
};

struct RunMetrics {
  std::vector<VehicleRecord> vehicles;
  std::vector<int> queue_length;  // outside-queue count per step
  double mtt = 0.0;               // NaN when nobody finished
  int mql = 0;
  bool stalled = false;
  std::string stall_reason;
  std::int64_t steps = 0;
  int finished = 0;
  int rejected = 0;
  int deadlocks_detected = 0;
  int deadlocks_resolved = 0;
};

/// Mean of (t_f - t0) over the pairs; NaN for an empty input.
double mean_task_time(std::span<const std::pair<double, double>> times);
/// Largest entry; 0 for an empty series.
int max_queue_length(std::span<const int> series);

/// Arrival times: cumulative exponential gaps, rounded up to the step grid.
std::vector<double> generate_arrivals(int n, double mean_interarrival, double dt, Rng& rng);

inline constexpr int kTraceFormatVersion = 1;

/// One parking episode. Vehicles get ids in arrival order.
class Simulation {
 public:
  Simulation(const ManeuverLibrary& library, const RunConfig& config);

  /// Places a vehicle directly (constructed scenarios). The spot must be free.
  struct Injection {
    int lane = 0;
    SpotIndex spot;
    ParkDirection direction = ParkDirection::kForward;
    VehicleMode mode = VehicleMode::kQueuing;
    double s = 0.0;  // queuing progress
    int step = 0;    // maneuver step
    std::shared_ptr<const ManeuverTemplate> maneuver;  // overrides the library pick
  };
  int inject(const Injection& spec);

  /// One control iteration.
  void step();
  bool finished() const;
  RunMetrics run();
  RunMetrics metrics() const;

  /// Writes a header line, then one JSON line per vehicle per step.
  void set_trace(std::ostream* out);

  const std::vector<Vehicle>& vehicles() const { return vehicles_; }
  std::int64_t current_step() const { return k_; }
  const GridClaims& claims() const { return claims_; }
  const SpotTable& spots() const { return spots_; }
  const std::vector<Deadlock>& last_deadlocks() const { return last_deadlocks_; }
  bool stalled() const { return stalled_; }
  const ManeuverLibrary& library() const { return *library_; }
  const RunConfig& config() const { return config_; }

 private:
  void arrive();
  void plan(Vehicle& v, ParkDirection direction,
            std::shared_ptr<const ManeuverTemplate> override_maneuver);
  void refresh_body(Vehicle& v);
  ReachableSet queuing_reach(const Vehicle& v) const;
  void handle_deadlocks();
  void stall(std::string reason);
  void write_header();
  void write_records();

  const ManeuverLibrary* library_;
  RunConfig config_;
  Rng lane_rng_;
  Rng alloc_rng_;
  Rng direction_rng_;
  SpotTable spots_;
  Allocator allocator_;
  GridClaims claims_;
  std::vector<double> arrival_times_;
  std::size_t next_arrival_ = 0;
  std::vector<Vehicle> vehicles_;
  std::deque<int> outside_;
  std::vector<int> active_;  // in-lot vehicle ids, ascending
  std::vector<int> queue_series_;
  std::vector<Deadlock> last_deadlocks_;
  DeadlockMonitor monitor_;
  std::int64_t k_ = 0;
  int idle_steps_ = 0;
  bool stalled_ = false;
  std::string stall_reason_;
  int deadlocks_detected_ = 0;
  int deadlocks_resolved_ = 0;
  std::ostream* trace_ = nullptr;
};

/// Runs one episode from scratch.
RunMetrics run_simulation(const ManeuverLibrary& library, const RunConfig& config,
                          std::ostream* trace = nullptr);

}  // namespace fleetpark
