#include "platoon/strategies.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace platoon {

PlatoonInfo apply_join(const PlatoonInfo& p, VehicleId joiner, int position) {
  if (p.contains(joiner)) throw std::invalid_argument("joiner already a member");
  if (position == 1) throw std::invalid_argument("position 1 is the leader slot");
  std::vector<VehicleId> ids = p.id_series;
  if (position <= 0 || position > static_cast<int>(ids.size())) {
    ids.push_back(joiner);
  } else {
    ids.insert(ids.begin() + (position - 1), joiner);
  }
  return PlatoonInfo::of(std::move(ids));
}

PlatoonInfo remove_members(const PlatoonInfo& p, const std::set<VehicleId>& ids) {
  std::vector<VehicleId> kept;
  for (VehicleId id : p.id_series) {
    if (!ids.contains(id)) kept.push_back(id);
  }
  return PlatoonInfo::of(std::move(kept));
}

std::set<VehicleId> members_from(const PlatoonInfo& p, VehicleId id) {
  std::set<VehicleId> out;
  auto idx = p.index_of(id);
  if (!idx) return out;
  for (std::size_t i = *idx; i < p.id_series.size(); ++i) out.insert(p.id_series[i]);
  return out;
}

namespace {

const ManeuverSpeeds& speeds(const StrategyContext& c) { return c.params->speeds; }

VehicleId leader_of(const StrategyContext& c) {
  if (c.instance && c.instance->leader.valid()) return c.instance->leader;
  if (c.instance && !c.instance->series.id_series.empty()) return c.instance->series.leader();
  return c.platoon ? c.platoon->leader() : kNoVehicle;
}

const PlatoonInfo& series_of(const StrategyContext& c) {
  static const PlatoonInfo empty;
  if (c.instance && !c.instance->series.id_series.empty()) return c.instance->series;
  return c.platoon ? *c.platoon : empty;
}

VehicleId subject_of(const StrategyContext& c) { return c.instance ? c.instance->subject : kNoVehicle; }

/// Negative when ego is ahead of `other` in the series, positive behind.
std::optional<int> rank_behind(const StrategyContext& c, VehicleId other) {
  const auto& s = series_of(c);
  auto a = s.index_of(c.id());
  auto b = s.index_of(other);
  if (!a || !b) return std::nullopt;
  return static_cast<int>(*a) - static_cast<int>(*b);
}

VehicleId successor_of(const PlatoonInfo& s, VehicleId id) {
  auto idx = s.index_of(id);
  if (!idx || *idx + 1 >= s.id_series.size()) return kNoVehicle;
  return s.id_series[*idx + 1];
}

int exit_lane(const StrategyContext& c) {
  const int lane = c.ego->lane;
  return lane + 1 < c.params->lanes.lane_count ? lane + 1 : lane - 1;
}

/// Lane-change command that turns into lane keeping once the target is reached.
Lateral steer_to(const StrategyContext& c, int lane) {
  if (c.ego->lane == lane) return Lateral::center();
  return Lateral::change_to(lane);
}

bool arrived(const StrategyContext& c, int lane) { return c.ego->lane == lane && c.ego->lateral_offset == 0.0; }

StrategyOutput follow(const StrategyContext&) {
  StrategyOutput out;
  out.use(Longitudinal::CACC);
  return out;
}

StrategyOutput cruise(const StrategyContext& c, double v) {
  StrategyOutput out;
  out.use(Longitudinal::CC, v);
  (void)c;
  return out;
}

/// Passive member: CACC until the leader announces the new membership.
StrategyOutput passive_member(const StrategyContext& c, StrategyProgress& p) {
  StrategyOutput out = follow(c);
  if (c.received<UpdateFlag>(leader_of(c))) {
    out.maneuver_done = true;
    p.enter(WaitState::Done, c.tick);
  } else if (p.wait == WaitState::Start) {
    p.enter(WaitState::WaitingUpdateFlag, c.tick);
  }
  return out;
}

/// Holds the takeover request and hands the vehicle to its driver once the
/// takeover delay has run out.
void handle_takeover(const StrategyContext& c, StrategyProgress& p, StrategyOutput& out) {
  if (!p.takeover_requested) {
    p.takeover_requested = true;
    p.mark = c.tick;
    out.takeover_requested = true;
    out.send(TakeoverRequest{});
    p.enter(WaitState::WaitingTakeover, c.tick);
  }
  if (c.tick - p.mark >= c.ticks(c.params->timing.takeover_delay)) {
    out.use(Longitudinal::Driver, c.ego->v);
    out.driver_speed = c.ego->v;
    out.role_change = RoleCause::TakeoverCompleted;
    out.maneuver_done = true;
    p.enter(WaitState::Done, c.tick);
  }
}

/// Shared braking sequence of every vehicle caught in an AEB maneuver:
/// brake to standstill, wait for the safe flag, restart staggered by rank,
/// ask the cloud to rejoin and leave the platoon on the leader's update.
StrategyOutput aeb_stop_and_restart(const StrategyContext& c, StrategyProgress& p, int rank, VehicleId safe_from,
                                    bool self_safe) {
  StrategyOutput out;
  const Tick now = c.tick;
  if (!p.safe_seen && (self_safe || c.received<SafeFlag>(safe_from))) {
    p.safe_seen = true;
    p.safe_tick = now;
    p.mark = now + c.ticks(rank * c.params->timing.restart_stagger);
  }
  if (c.received<UpdateFlag>(leader_of(c))) p.update_seen = true;

  if (p.wait == WaitState::Start) p.enter(WaitState::Braking, now);
  if (p.wait == WaitState::Braking && c.ego->v <= 0.0) p.enter(WaitState::Standstill, now);
  if (p.wait == WaitState::Standstill && p.safe_seen) p.enter(WaitState::WaitingRestart, now);
  if (p.wait == WaitState::WaitingRestart && now >= p.mark) {
    out.send(JoinRequest{});
    p.enter(WaitState::WaitingUpdateFlag, now);
  }

  switch (p.wait) {
    case WaitState::Braking:
      out.use(Longitudinal::AEB);
      break;
    case WaitState::Standstill:
    case WaitState::WaitingRestart:
      out.use(Longitudinal::Driver, 0.0);
      break;
    default:
      out.use(Longitudinal::Driver, speeds(c).platoon);
      if (p.update_seen) {
        out.driver_speed = speeds(c).platoon;
        out.role_change = RoleCause::AebCompleted;
        out.maneuver_done = true;
        p.enter(WaitState::Done, now);
      }
      break;
  }
  return out;
}

/// Leaver side of both leave maneuvers, from the moment it may go.
StrategyOutput leave_lane_change(const StrategyContext& c, StrategyProgress& p) {
  StrategyOutput out;
  if (p.wait != WaitState::ChangingLane) {
    const int lane = exit_lane(c);
    if (!c.lane_clear(lane)) {
      if (p.wait != WaitState::WaitingClear) p.enter(WaitState::WaitingClear, c.tick);
      return follow(c);
    }
    p.lane = lane;
    p.enter(WaitState::ChangingLane, c.tick);
  }
  out.use(Longitudinal::Driver, speeds(c).leave_exit);
  out.controller.kind.lateral = steer_to(c, p.lane);
  if (arrived(c, p.lane)) {
    out.controller.kind.lateral = Lateral::center();
    out.driver_speed = speeds(c).leave_exit;
    out.role_change = RoleCause::LeaveCompleted;
    out.maneuver_done = true;
    p.enter(WaitState::Done, c.tick);
  }
  return out;
}

}  // namespace

// --- Platooning -------------------------------------------------------------

StrategyOutput platooning_free(const StrategyContext& c, StrategyProgress&) {
  StrategyOutput out;
  out.use(Longitudinal::Driver, c.driver_speed);
  return out;
}

StrategyOutput platooning_leader(const StrategyContext& c, StrategyProgress&) { return cruise(c, speeds(c).platoon); }

StrategyOutput platooning_follower(const StrategyContext& c, StrategyProgress&) { return follow(c); }

// --- Join ---------------------------------------------------------------------

StrategyOutput join_tail_free(const StrategyContext& c, StrategyProgress& p) {
  StrategyOutput out;
  const double cap = speeds(c).join_approach_cap;
  if (p.wait == WaitState::Start) p.enter(WaitState::WaitingGap, c.tick);

  if (p.wait == WaitState::WaitingGap) {
    out.use(Longitudinal::ACC, cap);
    if (c.radar.valid && c.radar.has_target() && c.radar.gap <= speeds(c).join_gap) {
      out.send(JoinFlag{});
      p.enter(WaitState::WaitingUpdateFlag, c.tick);
    }
    return out;
  }

  out.use(Longitudinal::ACC, cap);
  if (c.received<UpdateFlag>(leader_of(c))) {
    out.use(Longitudinal::CACC);
    out.role_change = RoleCause::JoinCompleted;
    out.maneuver_done = true;
    p.enter(WaitState::Done, c.tick);
  }
  return out;
}

StrategyOutput join_middle_free(const StrategyContext& c, StrategyProgress& p) {
  StrategyOutput out;
  const auto& series = series_of(c);
  const int pos = c.instance ? c.instance->position : 0;
  if (pos < 2 || pos > static_cast<int>(series.id_series.size())) {
    // Nothing to slot in front of: behave like a tail join.
    return join_tail_free(c, p);
  }
  const VehicleId front = series.id_series[pos - 2];
  const VehicleId evader = series.id_series[pos - 1];
  const PeerView* pf = c.peer(front);

  if (c.received<EvadeFlag>(evader)) p.evade_seen = true;
  if (p.wait == WaitState::Start) {
    p.lane = pf ? pf->state.lane : c.ego->lane;
    p.enter(WaitState::Aligning, c.tick);
  }

  if (p.wait == WaitState::Aligning) {
    out.use(Longitudinal::CACC, speeds(c).join_approach_cap);
    out.controller.peer = front;
    out.controller.virtual_gap = true;
    if (!pf) return out;
    p.lane = pf->state.lane;
    const double s_front = pf->state.s + pf->state.v * static_cast<double>(pf->age) * c.params->dt;
    const double gap = s_front - pf->state.length - c.ego->s;
    const double rel = pf->state.v - c.ego->v;
    const auto& sp = c.params->spacing;
    const double desired = sp.desired_gap(c.ego->v, variable_headway(rel, sp));
    const bool aligned =
        std::abs(gap - desired) <= speeds(c).join_gap_tolerance && std::abs(rel) <= speeds(c).join_speed_tolerance;
    if (p.evade_seen && aligned && c.lane_clear(p.lane)) p.enter(WaitState::ChangingLane, c.tick);
    else return out;
  }

  if (p.wait == WaitState::ChangingLane) {
    out.use(Longitudinal::CACC, speeds(c).join_approach_cap);
    out.controller.peer = front;
    out.controller.virtual_gap = true;
    out.controller.kind.lateral = steer_to(c, p.lane);
    if (!arrived(c, p.lane)) return out;
    out.controller.kind.lateral = Lateral::center();
    out.send(JoinFlag{});
    p.enter(WaitState::WaitingUpdateFlag, c.tick);
  }

  out.use(Longitudinal::CACC);
  out.controller.peer = front;
  out.controller.virtual_gap = false;
  if (c.received<UpdateFlag>(leader_of(c))) {
    out.role_change = RoleCause::JoinCompleted;
    out.maneuver_done = true;
    p.enter(WaitState::Done, c.tick);
  }
  return out;
}

StrategyOutput join_leader(const StrategyContext& c, StrategyProgress& p) {
  StrategyOutput out = cruise(c, speeds(c).platoon);
  if (p.wait == WaitState::Start) p.enter(WaitState::WaitingJoinFlag, c.tick);
  if (!c.inbox) return out;
  const VehicleId joiner = subject_of(c);
  for (const auto& m : *c.inbox) {
    if (!m.is<JoinFlag>()) continue;
    if (m.sender != joiner) {
      out.note("UnknownJoiner", "join flag from v" + std::to_string(m.sender.value) + " without instruction");
      continue;
    }
    if (out.maneuver_done) continue;
    const PlatoonInfo& current = c.platoon ? *c.platoon : series_of(c);
    out.platoon_update = current.contains(joiner) ? current : apply_join(current, joiner, c.instance->position);
    out.send(UpdateFlag{});
    out.maneuver_done = true;
    p.enter(WaitState::Done, c.tick);
  }
  return out;
}

StrategyOutput join_tail_follower(const StrategyContext& c, StrategyProgress& p) { return passive_member(c, p); }

StrategyOutput join_middle_follower(const StrategyContext& c, StrategyProgress& p) {
  const auto& series = series_of(c);
  const int pos = c.instance ? c.instance->position : 0;
  const bool is_evader = pos >= 2 && pos <= static_cast<int>(series.id_series.size()) &&
                         series.id_series[pos - 1] == c.id();
  if (!is_evader) return passive_member(c, p);

  StrategyOutput out;
  if (p.wait == WaitState::Start) p.enter(WaitState::WaitingGap, c.tick);
  if (p.wait == WaitState::WaitingGap) {
    out.use(Longitudinal::CC, speeds(c).evade);
    if (c.radar.valid && c.radar.gap >= speeds(c).join_gap) {
      out.send(EvadeFlag{});
      p.enter(WaitState::WaitingJoinFlag, c.tick);
    }
    return out;
  }
  if (c.received<JoinFlag>(subject_of(c))) {
    out.use(Longitudinal::CACC);
    out.maneuver_done = true;
    p.enter(WaitState::Done, c.tick);
    return out;
  }
  out.use(Longitudinal::CC, speeds(c).platoon);
  return out;
}

// --- Leave --------------------------------------------------------------------

StrategyOutput leave_leader(const StrategyContext& c, StrategyProgress& p) {
  StrategyOutput out = cruise(c, speeds(c).platoon);
  if (p.wait == WaitState::Start) p.enter(WaitState::WaitingUpdateFlag, c.tick);
  const VehicleId leaver = subject_of(c);
  const PeerView* pv = c.peer(leaver);
  const Tick timeout = c.ticks(c.params->timing.heartbeat_timeout);
  const bool gone = pv ? (pv->age > timeout || pv->role == Role::FreeVehicle) : true;
  if (gone && c.platoon) {
    out.platoon_update = remove_members(*c.platoon, {leaver});
    out.send(UpdateFlag{});
    out.maneuver_done = true;
    p.enter(WaitState::Done, c.tick);
  }
  return out;
}

StrategyOutput leave_tail_follower(const StrategyContext& c, StrategyProgress& p) {
  if (c.id() != subject_of(c)) return passive_member(c, p);
  return leave_lane_change(c, p);
}

StrategyOutput leave_middle_follower(const StrategyContext& c, StrategyProgress& p) {
  const VehicleId leaver = subject_of(c);
  if (c.id() == leaver) {
    const VehicleId behind = successor_of(series_of(c), leaver);
    if (p.wait == WaitState::Start) p.enter(WaitState::WaitingEvadeFlag, c.tick);
    if (p.wait == WaitState::WaitingEvadeFlag) {
      if (behind.valid() && !c.received<EvadeFlag>(behind)) return follow(c);
    }
    return leave_lane_change(c, p);
  }

  if (c.id() != successor_of(series_of(c), leaver)) return passive_member(c, p);

  StrategyOutput out;
  if (p.wait == WaitState::Start) p.enter(WaitState::WaitingGap, c.tick);
  if (p.wait == WaitState::WaitingGap) {
    out.use(Longitudinal::ACC, speeds(c).evade);
    if (c.radar.valid && c.radar.gap >= speeds(c).join_gap) {
      out.send(EvadeFlag{});
      p.enter(WaitState::WaitingUpdateFlag, c.tick);
    }
    return out;
  }
  out.use(Longitudinal::ACC, speeds(c).platoon);
  if (c.received<UpdateFlag>(leader_of(c))) {
    out.use(Longitudinal::CACC);
    out.maneuver_done = true;
    p.enter(WaitState::Done, c.tick);
  }
  return out;
}

// --- AEB ------------------------------------------------------------------------

StrategyOutput aeb_head_leader(const StrategyContext& c, StrategyProgress& p) {
  StrategyOutput out;
  if (p.wait == WaitState::Start) p.enter(WaitState::Braking, c.tick);
  const VehicleId obstacle = c.instance ? c.instance->obstacle : kNoVehicle;
  if (c.radar.valid && c.radar.target == obstacle) {
    out.use(Longitudinal::AEB);
    return out;
  }
  out.use(Longitudinal::CC, speeds(c).platoon);
  out.send(SafeFlag{});
  out.platoon_update = PlatoonInfo::of({c.id()});
  out.send(UpdateFlag{});
  out.maneuver_done = true;
  p.enter(WaitState::Done, c.tick);
  return out;
}

StrategyOutput aeb_head_follower(const StrategyContext& c, StrategyProgress& p) {
  const int rank = rank_behind(c, leader_of(c)).value_or(1);
  return aeb_stop_and_restart(c, p, rank, leader_of(c), false);
}

StrategyOutput aeb_middle_leader(const StrategyContext& c, StrategyProgress& p) {
  StrategyOutput out = cruise(c, speeds(c).aeb_middle_wait);
  if (p.wait == WaitState::Start) p.enter(WaitState::WaitingSafeFlag, c.tick);
  const VehicleId origin = subject_of(c);
  if (c.received<SafeFlag>(origin)) {
    const PlatoonInfo& current = c.platoon ? *c.platoon : series_of(c);
    out = cruise(c, speeds(c).platoon);
    out.platoon_update = remove_members(current, members_from(series_of(c), origin));
    out.send(UpdateFlag{});
    out.maneuver_done = true;
    p.enter(WaitState::Done, c.tick);
  }
  return out;
}

StrategyOutput aeb_middle_follower(const StrategyContext& c, StrategyProgress& p) {
  const VehicleId origin = subject_of(c);
  const int behind = rank_behind(c, origin).value_or(0);

  if (c.id() == origin) {
    const VehicleId obstacle = c.instance->obstacle;
    bool now_safe = false;
    if (!p.flag_sent && !(c.radar.valid && c.radar.target == obstacle)) {
      p.flag_sent = true;
      now_safe = true;
    }
    StrategyOutput out = aeb_stop_and_restart(c, p, 1, origin, now_safe);
    if (now_safe) out.send(SafeFlag{});
    return out;
  }
  if (behind > 0) return aeb_stop_and_restart(c, p, behind + 1, origin, false);

  // Ahead of the stopped group: slow down until it is safe.
  if (c.received<SafeFlag>(origin)) p.safe_seen = true;
  if (p.wait == WaitState::Start) p.enter(WaitState::WaitingSafeFlag, c.tick);
  if (!p.safe_seen) return cruise(c, speeds(c).aeb_middle_wait);
  return passive_member(c, p);
}

// --- Cut in ---------------------------------------------------------------------

StrategyOutput cut_in_leader(const StrategyContext& c, StrategyProgress& p) {
  StrategyOutput out = cruise(c, speeds(c).platoon);
  if (p.wait == WaitState::Start) p.enter(WaitState::WaitingSafeFlag, c.tick);
  if (c.received<SafeFlag>(subject_of(c))) {
    out.maneuver_done = true;
    p.enter(WaitState::Done, c.tick);
  }
  return out;
}

StrategyOutput cut_in_follower(const StrategyContext& c, StrategyProgress& p) {
  const VehicleId origin = subject_of(c);
  const int behind = rank_behind(c, origin).value_or(0);
  StrategyOutput out;
  if (p.wait == WaitState::Start) p.enter(WaitState::WaitingSafeFlag, c.tick);

  if (c.id() == origin) {
    const VehicleId obstacle = c.instance->obstacle;
    if (c.radar.valid && c.radar.target == obstacle) {
      out.use(Longitudinal::ACC, speeds(c).platoon);
      return out;
    }
    out.use(Longitudinal::CACC);
    out.send(SafeFlag{});
    out.maneuver_done = true;
    p.enter(WaitState::Done, c.tick);
    return out;
  }

  const bool safe = c.received<SafeFlag>(origin) != nullptr;
  if (behind > 0 && !safe) {
    out.use(Longitudinal::ACC, speeds(c).platoon);
    return out;
  }
  out = follow(c);
  if (safe) {
    out.maneuver_done = true;
    p.enter(WaitState::Done, c.tick);
  }
  return out;
}

// --- Hardware failures ------------------------------------------------------

StrategyOutput hardware_failures_leader(const StrategyContext& c, StrategyProgress& p) {
  StrategyOutput out = cruise(c, speeds(c).platoon);
  if (p.wait == WaitState::Start) p.enter(WaitState::WaitingTakeover, c.tick);
  if (!c.platoon || !c.instance) return out;

  std::set<VehicleId> pruned;
  for (VehicleId f : c.instance->faulty) {
    if (f == c.id()) continue;
    pruned.merge(members_from(*c.platoon, f));
  }
  pruned.erase(c.id());

  const Tick timeout = c.ticks(c.params->timing.heartbeat_timeout);
  const bool delay_over = c.tick - c.instance->entered >= c.ticks(c.params->timing.takeover_delay);
  bool ready = true;
  for (VehicleId id : pruned) {
    const PeerView* pv = c.peer(id);
    const bool heard = pv && pv->age <= timeout;
    if (heard ? pv->role != Role::FreeVehicle : !delay_over) ready = false;
  }
  if (ready) {
    if (!pruned.empty()) {
      out.platoon_update = remove_members(*c.platoon, pruned);
      out.send(UpdateFlag{});
    }
    out.maneuver_done = true;
    p.enter(WaitState::Done, c.tick);
  }
  return out;
}

StrategyOutput hardware_failures_follower(const StrategyContext& c, StrategyProgress& p) {
  StrategyOutput out;
  if (p.wait == WaitState::Start) {
    p.value = c.ego->v;
    p.enter(WaitState::WaitingUpdateFlag, c.tick);
  }

  bool faulty_ahead = false;
  if (c.instance) {
    for (VehicleId f : c.instance->faulty) {
      if (f == c.id()) continue;
      if (rank_behind(c, f).value_or(0) > 0) faulty_ahead = true;
    }
  }

  if (c.own_faults.contains(FaultKind::RadarFail)) {
    double v_set = std::max(0.0, p.value - speeds(c).fault_cc_drop);
    if (!p.flag_sent) {
      // Hold speed for the tick the flag is in flight so the vehicle behind
      // is not surprised by the slowdown.
      p.flag_sent = true;
      out.send(FaultFlag{FaultKind::RadarFail});
      v_set = p.value;
    }
    out.use(Longitudinal::CC, v_set);
  } else if (c.own_faults.contains(FaultKind::V2VFail) || faulty_ahead) {
    out.use(Longitudinal::ACC, speeds(c).platoon);
  } else {
    if (p.takeover_requested) {
      // Already handing over; keep the fallback law.
      out.use(Longitudinal::ACC, speeds(c).platoon);
    } else {
      out = follow(c);
      if (c.received<UpdateFlag>(leader_of(c))) {
        out.maneuver_done = true;
        p.enter(WaitState::Done, c.tick);
      }
      return out;
    }
  }
  handle_takeover(c, p, out);
  return out;
}

void register_builtin_strategies(StrategyRegistry& r) {
  using MK = ManeuverKind;
  auto reg = [&](MK m, Role role, Strategy s) { r.register_strategy({Maneuver::of(m), role}, std::move(s)); };

  reg(MK::Platooning, Role::FreeVehicle, platooning_free);
  reg(MK::Platooning, Role::Leader, platooning_leader);
  reg(MK::Platooning, Role::Follower, platooning_follower);

  reg(MK::JoinTail, Role::FreeVehicle, join_tail_free);
  reg(MK::JoinTail, Role::Leader, join_leader);
  reg(MK::JoinTail, Role::Follower, join_tail_follower);
  reg(MK::JoinMiddle, Role::FreeVehicle, join_middle_free);
  reg(MK::JoinMiddle, Role::Leader, join_leader);
  reg(MK::JoinMiddle, Role::Follower, join_middle_follower);

  reg(MK::LeaveTail, Role::Leader, leave_leader);
  reg(MK::LeaveTail, Role::Follower, leave_tail_follower);
  reg(MK::LeaveMiddle, Role::Leader, leave_leader);
  reg(MK::LeaveMiddle, Role::Follower, leave_middle_follower);

  reg(MK::AEBHead, Role::Leader, aeb_head_leader);
  reg(MK::AEBHead, Role::Follower, aeb_head_follower);
  reg(MK::AEBMiddle, Role::Leader, aeb_middle_leader);
  reg(MK::AEBMiddle, Role::Follower, aeb_middle_follower);

  reg(MK::CutIn, Role::Leader, cut_in_leader);
  reg(MK::CutIn, Role::Follower, cut_in_follower);

  reg(MK::HardwareFailures, Role::Leader, hardware_failures_leader);
  reg(MK::HardwareFailures, Role::Follower, hardware_failures_follower);
}

}  // namespace platoon
