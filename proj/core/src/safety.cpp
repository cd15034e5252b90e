#include "fleetpark/safety.hpp"

#include <algorithm>
#include <cmath>

namespace fleetpark {

std::string_view to_string(Constraint c) {
  switch (c) {
    case Constraint::kNone:
      return "none";
    case Constraint::kQueueBody:
      return "queue_body";
    case Constraint::kQueueManeuver:
      return "queue_maneuver";
    case Constraint::kManeuverBody:
      return "maneuver_body";
    case Constraint::kManeuverManeuver:
      return "maneuver_maneuver";
  }
  return "?";
}

ReachableSet forward_reachable_queuing(int owner, const VehiclePath& path, double s, int delta_k,
                                       double v_ref, double dt, const BodyDims& body,
                                       const GridSpec& grid) {
  ReachableSet out{owner, ReachKind::kQueuing, CellSet(grid)};
  const QueuingPath& q = path.queuing;
  const double q_len = q.length();
  s = std::clamp(s, 0.0, q_len);
  const double step = v_ref * dt;

  // Steps spent on the queuing leg, then the rest go to the maneuver.
  int steps_left = std::max(delta_k, 0);
  double reach = s;
  while (steps_left > 0 && reach < q_len) {
    reach = std::min(reach + step, q_len);
    --steps_left;
  }
  // The straight leg sweeps an axis-aligned band: one long rectangle.
  const Pose a = q.pose_at(s);
  const Pose b = q.pose_at(reach);
  const Pose mid{0.5 * (a.x + b.x), a.y, a.heading};
  out.cells = rasterize_footprint(grid, mid, BodyDims{body.length + (b.x - a.x), body.width});

  if (path.maneuver && steps_left > 0 && reach >= q_len) {
    const ManeuverTemplate& m = *path.maneuver;
    const int last = std::min(steps_left, m.duration_steps());
    for (int i = 1; i <= last; ++i) {
      out.cells |= rasterize_footprint(grid, m.poses[static_cast<std::size_t>(i)], body);
    }
  }
  return out;
}

ReachableSet maneuver_reachable(int owner, const ManeuverTemplate& maneuver, int step) {
  step = std::clamp(step, 0, maneuver.duration_steps());
  return ReachableSet{owner, ReachKind::kManeuver, maneuver.suffix[static_cast<std::size_t>(step)]};
}

namespace {

SafetyVerdict check(const ReachableSet& d, const GridClaims& claims, Constraint body_rule,
                    Constraint maneuver_rule) {
  std::optional<int> best;
  Constraint rule = Constraint::kNone;
  for (const Claim& c : claims.claims()) {
    if (c.vehicle == d.owner) continue;
    const bool earlier = c.vehicle < d.owner;
    if (c.kind == ClaimKind::kManeuver && !earlier) continue;
    if (best && c.vehicle > *best) continue;
    if (best && c.vehicle == *best && rule == body_rule) continue;
    if (!d.cells.intersects(c.cells)) continue;
    best = c.vehicle;
    rule = c.kind == ClaimKind::kBody ? body_rule : maneuver_rule;
  }
  if (!best) {
    return SafetyVerdict::go();
  }
  return SafetyVerdict::yield(*best, rule);
}

}  // namespace

SafetyVerdict check_queuing(const ReachableSet& d, const GridClaims& claims) {
  return check(d, claims, Constraint::kQueueBody, Constraint::kQueueManeuver);
}

SafetyVerdict check_maneuvering(const ReachableSet& d_m, const GridClaims& claims) {
  return check(d_m, claims, Constraint::kManeuverBody, Constraint::kManeuverManeuver);
}

std::vector<Deadlock> detect_deadlock(std::span<const DeadlockInput> vehicles) {
  std::vector<Deadlock> out;
  auto push_unique = [&](Deadlock d) {
    std::sort(d.members.begin(), d.members.end());
    for (Deadlock& e : out) {
      if (e.members == d.members) {
        e.mutual = e.mutual || d.mutual;
        return;
      }
    }
    out.push_back(std::move(d));
  };

  for (std::size_t a = 0; a < vehicles.size(); ++a) {
    const DeadlockInput& va = vehicles[a];
    if (!va.maneuver_reach || !va.body) continue;
    for (std::size_t b = a + 1; b < vehicles.size(); ++b) {
      const DeadlockInput& vb = vehicles[b];
      if (!vb.maneuver_reach || !vb.body) continue;
      if (va.maneuver_reach->intersects(*vb.body) && vb.maneuver_reach->intersects(*va.body)) {
        push_unique(Deadlock{{va.id, vb.id}, true});
      }
    }
  }

  // Yields-to graph: out-degree at most one, so cycles are found by walking.
  std::map<int, int> next;
  for (const DeadlockInput& v : vehicles) {
    if (!v.verdict.proceed && v.verdict.blocking_vehicle) {
      next[v.id] = *v.verdict.blocking_vehicle;
    }
  }
  std::map<int, int> state;  // 1 on current walk, 2 finished
  for (const auto& [start, unused] : next) {
    (void)unused;
    if (state[start] != 0) continue;
    std::vector<int> walk;
    int cur = start;
    while (true) {
      auto st = state.find(cur);
      if (st != state.end() && st->second == 2) break;
      if (st != state.end() && st->second == 1) {
        auto it = std::find(walk.begin(), walk.end(), cur);
        Deadlock d{{it, walk.end()}, false};
        if (d.members.size() >= 2) push_unique(std::move(d));
        break;
      }
      state[cur] = 1;
      walk.push_back(cur);
      auto nx = next.find(cur);
      if (nx == next.end()) break;
      cur = nx->second;
    }
    for (int w : walk) state[w] = 2;
  }
  std::sort(out.begin(), out.end(),
            [](const Deadlock& x, const Deadlock& y) { return x.members < y.members; });
  return out;
}

bool DeadlockMonitor::observe(const std::vector<Deadlock>& groups) {
  std::map<std::vector<int>, int> next;
  bool stalled = false;
  for (const Deadlock& g : groups) {
    auto it = streak_.find(g.members);
    const int n = (it == streak_.end() ? 0 : it->second) + 1;
    next[g.members] = n;
    if (n > bound_) stalled = true;
  }
  streak_ = std::move(next);
  return stalled;
}

int DeadlockMonitor::longest_streak() const {
  int best = 0;
  for (const auto& [k, v] : streak_) {
    (void)k;
    best = std::max(best, v);
  }
  return best;
}

}  // namespace fleetpark
