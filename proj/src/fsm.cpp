#include "platoon/fsm.hpp"

namespace platoon {

std::string_view to_string(RoleCause c) {
  switch (c) {
    case RoleCause::Initialized: return "Initialized";
    case RoleCause::JoinCompleted: return "JoinCompleted";
    case RoleCause::LeaveCompleted: return "LeaveCompleted";
    case RoleCause::AebCompleted: return "AebCompleted";
    case RoleCause::TakeoverCompleted: return "TakeoverCompleted";
    case RoleCause::SplitCompleted: return "SplitCompleted";
    case RoleCause::JoinedOtherPlatoon: return "JoinedOtherPlatoon";
  }
  return "?";
}

std::string_view to_string(TriggerKind k) {
  switch (k) {
    case TriggerKind::CloudInstruction: return "CloudInstruction";
    case TriggerKind::ObstacleTTC: return "ObstacleTTC";
    case TriggerKind::ObstacleCutIn: return "ObstacleCutIn";
    case TriggerKind::HardwareFault: return "HardwareFault";
    case TriggerKind::PeerAnnounce: return "PeerAnnounce";
    case TriggerKind::Completed: return "Completed";
  }
  return "?";
}

std::optional<Role> next_role(Role current, RoleCause cause) noexcept {
  switch (current) {
    case Role::FreeVehicle:
      if (cause == RoleCause::Initialized) return Role::Leader;
      if (cause == RoleCause::JoinCompleted) return Role::Follower;
      return std::nullopt;
    case Role::Follower:
      switch (cause) {
        case RoleCause::LeaveCompleted:
        case RoleCause::AebCompleted:
        case RoleCause::TakeoverCompleted:
          return Role::FreeVehicle;
        default:
          // SplitCompleted (Follower -> Leader) is a dashed edge.
          return std::nullopt;
      }
    case Role::Leader:
      if (cause == RoleCause::LeaveCompleted) return Role::FreeVehicle;
      // JoinedOtherPlatoon (Leader -> Follower) is a dashed edge.
      return std::nullopt;
  }
  return std::nullopt;
}

Role role_transition(Role current, RoleCause cause) {
  if (auto r = next_role(current, cause)) return *r;
  throw IllegalTransition(std::string("illegal role transition: ") + std::string(to_string(current)) + " + " +
                          std::string(to_string(cause)));
}

namespace {

bool instructable(ManeuverKind k) {
  switch (k) {
    case ManeuverKind::JoinTail:
    case ManeuverKind::JoinMiddle:
    case ManeuverKind::LeaveTail:
    case ManeuverKind::LeaveMiddle:
    case ManeuverKind::Extension:
      return true;
    default:
      return false;
  }
}

}  // namespace

std::optional<Maneuver> next_maneuver(const Maneuver& current, const ManeuverTrigger& trigger) noexcept {
  const ManeuverKind want = trigger.payload.kind;

  if (trigger.kind == TriggerKind::Completed) {
    if (current.is_platooning()) return std::nullopt;
    return Maneuver::platooning();
  }
  if (trigger.kind == TriggerKind::HardwareFault) {
    // Safety preemption: accepted from every state, idempotent once active.
    return Maneuver::of(ManeuverKind::HardwareFailures);
  }
  if (!current.is_platooning()) return std::nullopt;

  switch (trigger.kind) {
    case TriggerKind::CloudInstruction:
      if (!instructable(want)) return std::nullopt;
      if (want == ManeuverKind::Extension && trigger.payload.name.empty()) return std::nullopt;
      return trigger.payload;
    case TriggerKind::ObstacleTTC:
      if (want != ManeuverKind::AEBHead && want != ManeuverKind::AEBMiddle) return std::nullopt;
      return trigger.payload;
    case TriggerKind::ObstacleCutIn:
      return Maneuver::of(ManeuverKind::CutIn);
    case TriggerKind::PeerAnnounce:
      if (want == ManeuverKind::Platooning) return std::nullopt;
      if (want == ManeuverKind::Extension && trigger.payload.name.empty()) return std::nullopt;
      return trigger.payload;
    default:
      return std::nullopt;
  }
}

Maneuver maneuver_transition(const Maneuver& current, const ManeuverTrigger& trigger) {
  if (auto m = next_maneuver(current, trigger)) return *m;
  throw IllegalTransition("illegal maneuver transition: " + to_string(current) + " + " +
                          std::string(to_string(trigger.kind)) + "(" + to_string(trigger.payload) + ")");
}

}  // namespace platoon
