#pragma once

#include <deque>
#include <optional>
#include <set>
#include <span>
#include <utility>
#include <vector>

#include "platoon/scenario.hpp"
#include "platoon/strategy.hpp"

namespace platoon {

/// What the cloud knows about one vehicle. The cloud is omniscient: it reads
/// the management state directly instead of over V2V.
struct CloudVehicleView {
  VehicleId id;
  Role role = Role::FreeVehicle;
  Maneuver maneuver;
  PlatoonInfo platoon;
  bool taken_over = false;
};

class CloudState {
 public:
  struct Pending {
    CloudInstruction::Kind kind = CloudInstruction::Kind::Join;
    VehicleId target;
    int position = 0;
    Tick ready = 0;
  };

  std::size_t next_event = 0;
  std::deque<Pending> queue;
  /// (sender, tick_sent) of every JoinRequest already taken in.
  std::set<std::pair<VehicleId, Tick>> answered;
  std::vector<CloudInstruction> issued;
  std::optional<CloudInstruction> outstanding;
  std::vector<SimEvent> log;
};

/// Queues scripted join/leave events that are due, takes in JoinRequests from
/// `uplink` (answered after the service delay), and issues at most one
/// instruction at a time per platoon.
std::vector<CloudInstruction> cloud_tick(CloudState& state, const ScenarioSpec& spec,
                                         std::span<const V2VMessage> uplink, Tick tick,
                                         std::span<const CloudVehicleView> fleet);

/// Scripted non-platoon vehicle used for cut-in and AEB scenarios.
struct Intruder {
  enum class Phase { Merging, Holding, CuttingOut, Gone };

  VehicleState state;
  VehicleId target;
  int home_lane = 0;
  int platoon_lane = 0;
  double speed = 0.0;
  Tick hold_ticks = 0;
  Tick arrived = 0;
  Phase phase = Phase::Merging;

  bool active() const { return phase != Phase::Gone; }
};

/// Places the intruder in the event lane with its rear bumper s_offset
/// ahead of the target's front bumper, driving at target speed + delta.
Intruder spawn_cut_in(const CutInEvent& event, const VehicleState& target, VehicleId id, const Parameters& params);

struct IntruderCommand {
  double a = 0.0;
  Lateral lateral;
};

/// Advances the script (merge, hold, cut out) and picks the intruder's
/// command from what its driver sees.
IntruderCommand drive_intruder(Intruder& intruder, std::span<const VehicleState> snapshot, const Parameters& params,
                               Tick tick);

}  // namespace platoon
