#pragma once

#include <optional>
#include <stdexcept>
#include <string>

#include "platoon/types.hpp"

namespace platoon {

class IllegalTransition : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Completed-maneuver outcomes that move a vehicle along the role FSM.
enum class RoleCause {
  Initialized,
  JoinCompleted,
  LeaveCompleted,
  AebCompleted,
  TakeoverCompleted,
  SplitCompleted,
  JoinedOtherPlatoon,
};

inline constexpr RoleCause kAllRoleCauses[] = {
    RoleCause::Initialized,    RoleCause::JoinCompleted,     RoleCause::LeaveCompleted,
    RoleCause::AebCompleted,   RoleCause::TakeoverCompleted, RoleCause::SplitCompleted,
    RoleCause::JoinedOtherPlatoon,
};
inline constexpr Role kAllRoles[] = {Role::FreeVehicle, Role::Leader, Role::Follower};

std::string_view to_string(RoleCause c);

/// Role FSM. Only the solid edges are implemented; split and platoon-merge
/// edges have no strategy behind them and are rejected.
std::optional<Role> next_role(Role current, RoleCause cause) noexcept;
Role role_transition(Role current, RoleCause cause);

enum class TriggerKind { CloudInstruction, ObstacleTTC, ObstacleCutIn, HardwareFault, PeerAnnounce, Completed };

inline constexpr TriggerKind kAllTriggerKinds[] = {
    TriggerKind::CloudInstruction, TriggerKind::ObstacleTTC,  TriggerKind::ObstacleCutIn,
    TriggerKind::HardwareFault,    TriggerKind::PeerAnnounce, TriggerKind::Completed,
};

struct ManeuverTrigger {
  TriggerKind kind = TriggerKind::Completed;
  /// Requested maneuver for CloudInstruction / ObstacleTTC / PeerAnnounce.
  Maneuver payload;

  static ManeuverTrigger cloud(Maneuver m) { return {TriggerKind::CloudInstruction, std::move(m)}; }
  static ManeuverTrigger obstacle_ttc(Maneuver m) { return {TriggerKind::ObstacleTTC, std::move(m)}; }
  static ManeuverTrigger cut_in() { return {TriggerKind::ObstacleCutIn, Maneuver::of(ManeuverKind::CutIn)}; }
  static ManeuverTrigger hardware_fault() {
    return {TriggerKind::HardwareFault, Maneuver::of(ManeuverKind::HardwareFailures)};
  }
  static ManeuverTrigger peer(Maneuver m) { return {TriggerKind::PeerAnnounce, std::move(m)}; }
  static ManeuverTrigger completed() { return {}; }
};

std::string_view to_string(TriggerKind k);

/// Maneuver FSM. Platooning accepts every trigger with a legal payload; an
/// active maneuver only yields to HardwareFault or its own completion.
std::optional<Maneuver> next_maneuver(const Maneuver& current, const ManeuverTrigger& trigger) noexcept;
Maneuver maneuver_transition(const Maneuver& current, const ManeuverTrigger& trigger);

}  // namespace platoon
