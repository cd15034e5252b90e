#include "fleetpark/engine.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>

namespace fleetpark {

std::string_view to_string(VehicleMode m) {
  switch (m) {
    case VehicleMode::kOutsideQueue:
      return "outside_queue";
    case VehicleMode::kQueuing:
      return "queuing";
    case VehicleMode::kManeuvering:
      return "maneuvering";
    case VehicleMode::kParked:
      return "parked";
    case VehicleMode::kRejected:
      return "rejected";
  }
  return "?";
}

Pose Vehicle::pose() const {
  if (mode == VehicleMode::kManeuvering || mode == VehicleMode::kParked) {
    return path.maneuver->poses[static_cast<std::size_t>(m)];
  }
  return path.queuing.pose_at(s);
}

void validate(const RunConfig& c, const LotLayout& layout, const KinematicParams& params) {
  if (!(c.mean_interarrival_s > 0.0)) throw ConfigError("mean interarrival must be positive");
  if (c.n_vehicles < 0) throw ConfigError("vehicle count must be non-negative");
  if (!(c.dt_s > 0.0)) throw ConfigError("dt must be positive");
  if (std::abs(c.dt_s - params.dt_s) > 1e-12) {
    throw ConfigError("run dt differs from the maneuver library dt");
  }
  if (c.delta_k < 0) throw ConfigError("delta_k must be non-negative");
  if (!(c.v_ref_mps > 0.0)) throw ConfigError("v_ref must be positive");
  if (c.n_free_spots < 0 || c.n_free_spots > layout.spot_count()) {
    throw ConfigError("n_free_spots must lie in [0, " + std::to_string(layout.spot_count()) + "]");
  }
  if (c.forward_probability < 0.0 || c.forward_probability > 1.0) {
    throw ConfigError("forward probability must lie in [0, 1]");
  }
  if (c.policy.delta_p < 0) throw ConfigError("delta_p must be non-negative");
  if (c.lanes.open_lane < 0 || c.lanes.open_lane >= layout.lane_count()) {
    throw ConfigError("open lane does not exist");
  }
  if (c.deadlock_bound_steps < 1 || c.idle_stall_steps < 1 || c.max_steps < 1) {
    throw ConfigError("stall bounds must be positive");
  }
}

double mean_task_time(std::span<const std::pair<double, double>> times) {
  if (times.empty()) {
    return std::numeric_limits<double>::quiet_NaN();
  }
  double sum = 0.0;
  for (const auto& [t0, tf] : times) sum += tf - t0;
  return sum / static_cast<double>(times.size());
}

int max_queue_length(std::span<const int> series) {
  int best = 0;
  for (int q : series) best = std::max(best, q);
  return best;
}

std::vector<double> generate_arrivals(int n, double mean_interarrival, double dt, Rng& rng) {
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(std::max(n, 0)));
  double t = 0.0;
  for (int i = 0; i < n; ++i) {
    t += rng.exponential(mean_interarrival);
    const double steps = std::ceil(t / dt - 1e-9);
    out.push_back(steps * dt);
  }
  return out;
}

namespace {

std::int64_t to_step(double t, double dt) { return std::llround(t / dt); }

std::vector<SpotState> initial_spots(const LotLayout& layout, const RunConfig& c) {
  Rng rng(c.seed, RngStream::kOccupancy);
  return seed_initial_occupancy(layout, c.n_free_spots, rng);
}

std::vector<double> initial_arrivals(const RunConfig& c) {
  Rng rng(c.seed, RngStream::kArrivals);
  return generate_arrivals(c.n_vehicles, c.mean_interarrival_s, c.dt_s, rng);
}

}  // namespace

Simulation::Simulation(const ManeuverLibrary& library, const RunConfig& config)
    : library_(&library),
      config_((validate(config, library.layout(), library.params()), config)),
      lane_rng_(config.seed, RngStream::kLanes),
      alloc_rng_(config.seed, RngStream::kAllocation),
      direction_rng_(config.seed, RngStream::kDirection),
      spots_(library.layout(), initial_spots(library.layout(), config)),
      allocator_(config.policy, config.lanes, library.layout().lane_count()),
      claims_(library.grid()),
      arrival_times_(initial_arrivals(config)),
      monitor_(config.deadlock_bound_steps) {}

void Simulation::set_trace(std::ostream* out) {
  trace_ = out;
  if (trace_) write_header();
}

void Simulation::refresh_body(Vehicle& v) {
  v.body = rasterize_footprint(library_->grid(), v.pose(), library_->params().body);
}

void Simulation::plan(Vehicle& v, ParkDirection direction,
                      std::shared_ptr<const ManeuverTemplate> override_maneuver) {
  auto maneuver = override_maneuver ? std::move(override_maneuver)
                                    : library_->select(*v.spot, direction);
  v.path.queuing = build_queuing_path(*library_, v.lane, *maneuver);
  v.path.maneuver = std::move(maneuver);
  v.s = 0.0;
  v.m = 0;
  v.maneuver_base_s = v.path.queuing.length();
}

void Simulation::arrive() {
  Vehicle v;
  v.id = static_cast<int>(vehicles_.size());
  v.arrival_step = k_;
  v.lane = allocator_.choose_lane(lane_rng_);
  v.spot = allocator_.assign(v.id, v.lane, spots_, alloc_rng_);
  v.requested_direction = direction_rng_.bernoulli(config_.forward_probability)
                              ? ParkDirection::kForward
                              : ParkDirection::kReverse;
  if (!v.spot) {
    v.mode = VehicleMode::kRejected;
    vehicles_.push_back(std::move(v));
    return;
  }
  plan(v, v.requested_direction, nullptr);
  v.mode = VehicleMode::kOutsideQueue;
  outside_.push_back(v.id);
  vehicles_.push_back(std::move(v));
}

int Simulation::inject(const Injection& spec) {
  Vehicle v;
  v.id = static_cast<int>(vehicles_.size());
  v.arrival_step = k_;
  v.lane = spec.lane;
  v.spot = spec.spot;
  v.requested_direction = spec.direction;
  spots_.assign(spec.spot, v.id);
  plan(v, spec.direction, spec.maneuver);
  switch (spec.mode) {
    case VehicleMode::kOutsideQueue:
      v.mode = VehicleMode::kOutsideQueue;
      outside_.push_back(v.id);
      break;
    case VehicleMode::kQueuing:
      v.mode = VehicleMode::kQueuing;
      v.s = std::clamp(spec.s, 0.0, v.path.queuing.length());
      break;
    case VehicleMode::kManeuvering:
      v.mode = VehicleMode::kManeuvering;
      v.m = std::clamp(spec.step, 0, v.path.maneuver->duration_steps());
      v.s = v.maneuver_base_s +
            std::min(v.m * library_->params().step_length(), v.path.maneuver->length_m);
      break;
    default:
      throw std::invalid_argument("vehicles can only be injected outside, queuing or maneuvering");
  }
  if (v.in_lot()) {
    refresh_body(v);
    active_.insert(std::upper_bound(active_.begin(), active_.end(), v.id), v.id);
  }
  vehicles_.push_back(std::move(v));
  return vehicles_.back().id;
}

ReachableSet Simulation::queuing_reach(const Vehicle& v) const {
  return forward_reachable_queuing(v.id, v.path, v.s, config_.delta_k, config_.v_ref_mps,
                                   config_.dt_s, library_->params().body, library_->grid());
}

bool Simulation::finished() const {
  return stalled_ ||
         (next_arrival_ >= arrival_times_.size() && outside_.empty() && active_.empty());
}

void Simulation::stall(std::string reason) {
  if (!stalled_) {
    stalled_ = true;
    stall_reason_ = std::move(reason);
  }
}

void Simulation::step() {
  if (finished()) {
    return;
  }
  bool progress = false;
  claims_.reset();

  while (next_arrival_ < arrival_times_.size() &&
         to_step(arrival_times_[next_arrival_], config_.dt_s) <= k_) {
    arrive();
    ++next_arrival_;
    progress = true;
  }

  for (int id : active_) {
    Vehicle& v = vehicles_[static_cast<std::size_t>(id)];
    v.held = false;
    claims_.claim_body(id, v.body);
  }

  // Maneuver claims and admissions, in arrival order.
  for (int id : active_) {
    Vehicle& v = vehicles_[static_cast<std::size_t>(id)];
    if (v.mode != VehicleMode::kManeuvering && !v.at_maneuver_start()) continue;
    ReachableSet r = maneuver_reachable(id, *v.path.maneuver, v.m);
    v.verdict = check_maneuvering(r, claims_);
    if (!v.verdict.proceed) continue;
    if (v.mode == VehicleMode::kQueuing) {
      v.mode = VehicleMode::kManeuvering;
      v.maneuver_base_s = v.s;
      progress = true;
    }
    claims_.claim_maneuver(id, std::move(r.cells));
  }

  // Entrance: the head of the outside line enters when its lookahead is clear.
  while (!outside_.empty()) {
    Vehicle& h = vehicles_[static_cast<std::size_t>(outside_.front())];
    h.verdict = check_queuing(queuing_reach(h), claims_);
    if (!h.verdict.proceed) break;
    h.mode = VehicleMode::kQueuing;
    refresh_body(h);
    claims_.claim_body(h.id, h.body);
    active_.insert(std::upper_bound(active_.begin(), active_.end(), h.id), h.id);
    outside_.pop_front();
    progress = true;
  }
  queue_series_.push_back(static_cast<int>(outside_.size()));

  for (int id : active_) {
    Vehicle& v = vehicles_[static_cast<std::size_t>(id)];
    if (v.mode == VehicleMode::kManeuvering) {
      v.verdict = check_maneuvering(maneuver_reachable(id, *v.path.maneuver, v.m), claims_);
    } else if (!v.at_maneuver_start()) {
      v.verdict = check_queuing(queuing_reach(v), claims_);
    }
  }

  handle_deadlocks();

  const double ds = library_->params().step_length();
  for (int id : active_) {
    Vehicle& v = vehicles_[static_cast<std::size_t>(id)];
    v.v = 0.0;
    if (!v.verdict.proceed || v.held) continue;
    if (v.mode == VehicleMode::kQueuing && !v.at_maneuver_start()) {
      v.v = config_.v_ref_mps;
      v.s = advance_on_path(v.path.queuing.length(), v.s, v.v, config_.dt_s);
      refresh_body(v);
      progress = true;
    } else if (v.mode == VehicleMode::kManeuvering && v.m < v.path.maneuver->duration_steps()) {
      v.v = library_->params().maneuver_speed_mps;
      ++v.m;
      v.s = v.maneuver_base_s + std::min(v.m * ds, v.path.maneuver->length_m);
      refresh_body(v);
      progress = true;
    }
  }

  std::vector<int> still;
  still.reserve(active_.size());
  for (int id : active_) {
    Vehicle& v = vehicles_[static_cast<std::size_t>(id)];
    if (v.mode == VehicleMode::kManeuvering && v.m >= v.path.maneuver->duration_steps()) {
      v.mode = VehicleMode::kParked;
      v.finish_step = k_ + 1;
      spots_.mark_parked(*v.spot);
      progress = true;
    } else {
      still.push_back(id);
    }
  }

  if (trace_) write_records();
  active_ = std::move(still);

  if (progress) {
    idle_steps_ = 0;
  } else if (!active_.empty() || !outside_.empty()) {
    if (++idle_steps_ > config_.idle_stall_steps) {
      stall("no vehicle moved for " + std::to_string(idle_steps_) + " steps");
    }
  }
  ++k_;
  if (!finished() && k_ >= config_.max_steps) {
    stall("step cap reached");
  }
}

void Simulation::handle_deadlocks() {
  std::vector<DeadlockInput> inputs;
  inputs.reserve(active_.size());
  std::vector<ReachableSet> reach(active_.size());
  for (std::size_t n = 0; n < active_.size(); ++n) {
    const Vehicle& v = vehicles_[static_cast<std::size_t>(active_[n])];
    DeadlockInput in{v.id, &v.body, nullptr, v.verdict};
    if (v.mode == VehicleMode::kManeuvering || v.at_maneuver_start()) {
      reach[n] = maneuver_reachable(v.id, *v.path.maneuver, v.m);
      in.maneuver_reach = &reach[n].cells;
    }
    inputs.push_back(in);
  }
  last_deadlocks_ = detect_deadlock(inputs);
  deadlocks_detected_ += static_cast<int>(last_deadlocks_.size());

  if (config_.resolve_deadlocks) {
    for (const Deadlock& g : last_deadlocks_) {
      Vehicle* first = nullptr;
      for (int id : g.members) {
        Vehicle& v = vehicles_[static_cast<std::size_t>(id)];
        if (v.mode == VehicleMode::kManeuvering || v.at_maneuver_start()) {
          first = &v;
          break;
        }
      }
      bool resolved = false;
      if (first) {
        CellSet blocked(library_->grid());
        for (int id : active_) {
          if (id != first->id) blocked |= vehicles_[static_cast<std::size_t>(id)].body;
        }
        auto regen = regenerate_feasible_maneuver(first->path.maneuver, first->m, blocked,
                                                  *library_);
        if (regen && regen->maneuver != first->path.maneuver) {
          first->maneuver_base_s = first->s;
          first->path.maneuver = regen->maneuver;
          first->m = regen->start_step;
          ++first->regenerations;
          ++deadlocks_resolved_;
          resolved = true;
        }
      }
      if (!resolved) {
        for (int id : g.members) {
          if (!first || id != first->id) vehicles_[static_cast<std::size_t>(id)].held = true;
        }
      }
    }
  }
  if (monitor_.observe(last_deadlocks_)) {
    std::string who;
    for (int id : last_deadlocks_.front().members) {
      who += (who.empty() ? "" : ",") + std::to_string(id);
    }
    stall("deadlock not resolved within " + std::to_string(monitor_.bound()) +
          " steps (vehicles " + who + ")");
  }
}

RunMetrics Simulation::run() {
  while (!finished()) {
    step();
  }
  return metrics();
}

RunMetrics Simulation::metrics() const {
  RunMetrics out;
  const double dt = config_.dt_s;
  std::vector<std::pair<double, double>> times;
  for (const Vehicle& v : vehicles_) {
    VehicleRecord r;
    r.id = v.id;
    r.t0 = static_cast<double>(v.arrival_step) * dt;
    r.lane = v.lane;
    r.spot = v.spot;
    r.direction = v.path.maneuver ? v.path.maneuver->key.direction : v.requested_direction;
    r.rejected = v.mode == VehicleMode::kRejected;
    if (v.finish_step >= 0) {
      r.tf = static_cast<double>(v.finish_step) * dt;
      times.emplace_back(r.t0, *r.tf);
      ++out.finished;
    }
    if (r.rejected) ++out.rejected;
    out.vehicles.push_back(r);
  }
  out.queue_length = queue_series_;
  out.mtt = mean_task_time(times);
  out.mql = max_queue_length(queue_series_);
  out.stalled = stalled_;
  out.stall_reason = stall_reason_;
  out.steps = k_;
  out.deadlocks_detected = deadlocks_detected_;
  out.deadlocks_resolved = deadlocks_resolved_;
  return out;
}

void Simulation::write_header() {
  char buf[512];
  std::snprintf(buf, sizeof buf,
                "{\"type\":\"header\",\"version\":%d,\"seed\":%llu,\"policy\":\"%s\","
                "\"delta_p\":%d,\"lanes\":\"%s\",\"mean_interarrival_s\":%.6g,"
                "\"n_vehicles\":%d,\"n_free_spots\":%d,\"dt_s\":%.6g,\"delta_k\":%d,"
                "\"v_ref_mps\":%.6g}\n",
                kTraceFormatVersion, static_cast<unsigned long long>(config_.seed),
                std::string(to_string(config_.policy.kind)).c_str(), config_.policy.delta_p,
                std::string(to_string(config_.lanes.mode)).c_str(), config_.mean_interarrival_s,
                config_.n_vehicles, config_.n_free_spots, config_.dt_s, config_.delta_k,
                config_.v_ref_mps);
  *trace_ << buf;
}

void Simulation::write_records() {
  char buf[512];
  for (const Vehicle& v : vehicles_) {
    const bool live = v.mode == VehicleMode::kOutsideQueue || v.in_lot() ||
                      (v.mode == VehicleMode::kParked && v.finish_step == k_ + 1);
    if (!live) continue;
    const std::string mode(to_string(v.mode));
    const std::string verdict = v.verdict.proceed ? "proceed" : "yield";
    const std::string rule(to_string(v.verdict.violated));
    const std::string blocker =
        v.verdict.blocking_vehicle ? std::to_string(*v.verdict.blocking_vehicle) : "null";
    if (v.mode == VehicleMode::kOutsideQueue) {
      std::snprintf(buf, sizeof buf,
                    "{\"k\":%lld,\"id\":%d,\"mode\":\"%s\",\"lane\":%d,\"s\":0.000000,"
                    "\"v\":0.000000,\"x\":null,\"y\":null,\"heading\":null,"
                    "\"verdict\":\"%s\",\"constraint\":\"%s\",\"blocker\":%s}\n",
                    static_cast<long long>(k_), v.id, mode.c_str(), v.lane, verdict.c_str(),
                    rule.c_str(), blocker.c_str());
    } else {
      const Pose p = v.pose();
      std::snprintf(buf, sizeof buf,
                    "{\"k\":%lld,\"id\":%d,\"mode\":\"%s\",\"lane\":%d,\"s\":%.6f,\"v\":%.6f,"
                    "\"x\":%.6f,\"y\":%.6f,\"heading\":%.6f,\"verdict\":\"%s\","
                    "\"constraint\":\"%s\",\"blocker\":%s}\n",
                    static_cast<long long>(k_), v.id, mode.c_str(), v.lane, v.s, v.v, p.x, p.y,
                    p.heading, verdict.c_str(), rule.c_str(), blocker.c_str());
    }
    *trace_ << buf;
  }
}

RunMetrics run_simulation(const ManeuverLibrary& library, const RunConfig& config,
                          std::ostream* trace) {
  Simulation sim(library, config);
  sim.set_trace(trace);
  return sim.run();
}

}  // namespace fleetpark
