#include "platoon/cloud.hpp"

#include <algorithm>
#include <cmath>

#include "platoon/comms.hpp"
#include "platoon/controllers.hpp"

namespace platoon {

namespace {

const CloudVehicleView* find(std::span<const CloudVehicleView> fleet, VehicleId id) {
  for (const auto& v : fleet) {
    if (v.id == id) return &v;
  }
  return nullptr;
}

const CloudVehicleView* leader_of(std::span<const CloudVehicleView> fleet) {
  for (const auto& v : fleet) {
    if (v.role == Role::Leader) return &v;
  }
  return nullptr;
}

void note(CloudState& st, Tick tick, VehicleId v, std::string kind, std::string detail) {
  st.log.push_back({tick, v, std::move(kind), std::move(detail)});
}

enum class Verdict { Issue, Wait, Drop };

Verdict check(const CloudState::Pending& p, const CloudVehicleView* target, const CloudVehicleView& leader) {
  if (!target) return Verdict::Drop;
  if (p.kind == CloudInstruction::Kind::Join) {
    if (target->taken_over) return Verdict::Drop;
    if (leader.platoon.contains(p.target)) return Verdict::Drop;
    if (target->role != Role::FreeVehicle || !target->maneuver.is_platooning()) return Verdict::Wait;
    return Verdict::Issue;
  }
  if (!leader.platoon.contains(p.target) || p.target == leader.id) return Verdict::Drop;
  if (!target->maneuver.is_platooning()) return Verdict::Wait;
  return Verdict::Issue;
}

}  // namespace

std::vector<CloudInstruction> cloud_tick(CloudState& st, const ScenarioSpec& spec, std::span<const V2VMessage> uplink,
                                         Tick tick, std::span<const CloudVehicleView> fleet) {
  std::vector<CloudInstruction> out;

  while (st.next_event < spec.events.size() && spec.tick_of(spec.events[st.next_event].t) <= tick) {
    const auto& ev = spec.events[st.next_event++];
    if (const auto* j = std::get_if<JoinInstructionEvent>(&ev.kind)) {
      st.queue.push_back({CloudInstruction::Kind::Join, j->target, j->position, tick});
    } else if (const auto* l = std::get_if<LeaveInstructionEvent>(&ev.kind)) {
      st.queue.push_back({CloudInstruction::Kind::Leave, l->target, 0, tick});
    }
  }

  const Tick service = static_cast<Tick>(std::llround(spec.params.timing.join_service_delay / spec.run.dt));
  for (const auto& m : uplink) {
    if (!m.is<JoinRequest>()) continue;
    if (!st.answered.insert({m.sender, m.tick_sent}).second) continue;
    st.queue.push_back({CloudInstruction::Kind::Join, m.sender, 0, m.tick_sent + service});
    note(st, tick, m.sender, "JoinRequest", "answer due at tick " + std::to_string(m.tick_sent + service));
  }

  if (st.outstanding) {
    const auto* leader = find(fleet, st.outstanding->leader);
    const auto* target = find(fleet, st.outstanding->target);
    const bool leader_idle = !leader || leader->maneuver.is_platooning();
    const bool target_idle = !target || target->maneuver.is_platooning();
    if (tick > st.outstanding->issued && leader_idle && target_idle) st.outstanding.reset();
  }
  if (st.outstanding) return out;

  const auto* leader = leader_of(fleet);
  if (!leader || !leader->maneuver.is_platooning()) return out;

  for (auto it = st.queue.begin(); it != st.queue.end();) {
    if (it->ready > tick) {
      ++it;
      continue;
    }
    const auto* target = find(fleet, it->target);
    const Verdict verdict = check(*it, target, *leader);
    if (verdict == Verdict::Wait) break;
    if (verdict == Verdict::Drop) {
      note(st, tick, it->target, "InstructionDropped",
           it->kind == CloudInstruction::Kind::Join ? "join not applicable" : "leave not applicable");
      it = st.queue.erase(it);
      continue;
    }

    CloudInstruction ins;
    ins.kind = it->kind;
    ins.target = it->target;
    ins.leader = leader->id;
    ins.series = leader->platoon;
    ins.issued = tick;
    const int size = leader->platoon.size;
    if (it->kind == CloudInstruction::Kind::Join) {
      const bool middle = it->position >= 2 && it->position <= size;
      ins.position = middle ? it->position : 0;
      ins.maneuver = Maneuver::of(middle ? ManeuverKind::JoinMiddle : ManeuverKind::JoinTail);
    } else {
      const bool tail = leader->platoon.id_series.back() == it->target;
      ins.maneuver = Maneuver::of(tail ? ManeuverKind::LeaveTail : ManeuverKind::LeaveMiddle);
    }
    st.queue.erase(it);
    note(st, tick, ins.target, "Instruction", to_string(ins.maneuver) + " leader=v" + std::to_string(ins.leader.value));
    st.issued.push_back(ins);
    st.outstanding = ins;
    out.push_back(std::move(ins));
    break;
  }
  return out;
}

Intruder spawn_cut_in(const CutInEvent& event, const VehicleState& target, VehicleId id, const Parameters& params) {
  Intruder in;
  in.target = event.target;
  in.home_lane = event.lane;
  in.platoon_lane = target.lane;
  in.speed = std::max(0.0, target.v + event.delta());
  in.hold_ticks = static_cast<Tick>(std::llround(event.duration / params.dt));
  in.state.id = id;
  in.state.lane = event.lane;
  in.state.length = params.vehicle.length;
  in.state.s = target.s + event.s_offset + params.vehicle.length;
  in.state.v = in.speed;
  in.phase = Intruder::Phase::Merging;
  return in;
}

IntruderCommand drive_intruder(Intruder& in, std::span<const VehicleState> snapshot, const Parameters& params,
                               Tick tick) {
  IntruderCommand cmd;
  const auto& st = in.state;
  switch (in.phase) {
    case Intruder::Phase::Merging:
      if (st.lane == in.platoon_lane && st.lateral_offset == 0.0) {
        in.phase = Intruder::Phase::Holding;
        in.arrived = tick;
      }
      break;
    case Intruder::Phase::Holding:
      if (tick - in.arrived >= in.hold_ticks) in.phase = Intruder::Phase::CuttingOut;
      break;
    case Intruder::Phase::CuttingOut:
      if (st.lane == in.home_lane && st.lateral_offset == 0.0) in.phase = Intruder::Phase::Gone;
      break;
    case Intruder::Phase::Gone:
      break;
  }
  if (in.phase == Intruder::Phase::Merging && st.lane != in.platoon_lane) {
    cmd.lateral = Lateral::change_to(in.platoon_lane);
  } else if (in.phase == Intruder::Phase::CuttingOut && st.lane != in.home_lane) {
    cmd.lateral = Lateral::change_to(in.home_lane);
  }
  const RadarReading view = perceive_ahead(st, snapshot, params.lanes, params.vehicle.width, params.radar.max_range);
  cmd.a = driver_command(st.v, in.speed, view, params.intruder_driver);
  return cmd;
}

}  // namespace platoon
