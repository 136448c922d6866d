#pragma once

#include <cmath>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "platoon/comms.hpp"
#include "platoon/controllers.hpp"
#include "platoon/fsm.hpp"
#include "platoon/params.hpp"
#include "platoon/types.hpp"

namespace platoon {

/// Something worth writing to events.log.
struct SimEvent {
  Tick tick = 0;
  VehicleId vehicle;
  std::string kind;
  std::string detail;
};

/// Instruction from the cloud layer. Delivered losslessly to the target and
/// every member of its platoon.
struct CloudInstruction {
  enum class Kind { Join, Leave, Custom };
  Kind kind = Kind::Join;
  VehicleId target;
  /// 1-based slot the joiner will occupy; 0 means tail.
  int position = 0;
  VehicleId leader;
  Maneuver maneuver;
  /// Leader's membership when the instruction was issued.
  PlatoonInfo series;
  Tick issued = 0;
};

/// Row x column key of the management table.
struct StrategyKey {
  Maneuver maneuver;
  Role role = Role::FreeVehicle;
  auto operator<=>(const StrategyKey&) const = default;
};

std::string to_string(const StrategyKey& key);

/// Parameters of one maneuver instance, fixed at entry.
struct ManeuverInstance {
  /// Joiner, leaver, triggering vehicle, or faulty vehicle.
  VehicleId subject;
  VehicleId leader;
  int position = 0;
  /// Radar object that triggered AEB or Cut In.
  VehicleId obstacle;
  std::set<VehicleId> faulty;
  PlatoonInfo series;
  Tick entered = 0;
  ManeuverTrigger trigger;
};

enum class WaitState {
  Start,
  WaitingGap,
  WaitingJoinFlag,
  WaitingEvadeFlag,
  Aligning,
  ChangingLane,
  WaitingUpdateFlag,
  Braking,
  Standstill,
  WaitingSafeFlag,
  WaitingRestart,
  WaitingTakeover,
  WaitingClear,
  Done,
};

std::string_view to_string(WaitState w);

/// Resumable position inside a strategy's "wait" loops. Reset on every
/// maneuver entry.
struct StrategyProgress {
  WaitState wait = WaitState::Start;
  int step = 0;
  Tick since = 0;
  /// Generic timer / remembered tick (restart time, takeover request, ...).
  Tick mark = 0;
  /// Remembered setpoint (speed at failure, ...).
  double value = 0.0;
  int lane = -1;
  bool flag_sent = false;
  bool safe_seen = false;
  Tick safe_tick = 0;
  bool update_seen = false;
  bool join_seen = false;
  bool evade_seen = false;
  bool takeover_requested = false;

  void enter(WaitState w, Tick now) {
    wait = w;
    since = now;
    ++step;
  }
};

/// Read-only snapshot handed to a strategy.
struct StrategyContext {
  const Parameters* params = nullptr;
  Tick tick = 0;
  const VehicleState* ego = nullptr;
  Role role = Role::FreeVehicle;
  Maneuver maneuver;
  const ManeuverInstance* instance = nullptr;
  RadarReading radar;
  RadarReading driver_view;
  bool left_clear = true;
  bool right_clear = true;
  const V2VPayload* v2v = nullptr;
  const Inbox* inbox = nullptr;
  /// Leader: authoritative. Follower: replica from the leader's heartbeat.
  const PlatoonInfo* platoon = nullptr;
  std::set<FaultKind> own_faults;
  /// Speed the simulated driver holds while the vehicle is free.
  double driver_speed = 20.0;

  VehicleId id() const { return ego->id; }
  Tick ticks(double seconds) const { return static_cast<Tick>(std::llround(seconds / params->dt)); }
  const PeerView* peer(VehicleId id) const;
  /// First message of type T in this tick's inbox, optionally from `from`.
  template <class T>
  const V2VMessage* received(VehicleId from = kNoVehicle) const {
    if (!inbox) return nullptr;
    for (const auto& m : *inbox) {
      if (m.is<T>() && (!from.valid() || m.sender == from)) return &m;
    }
    return nullptr;
  }
  bool lane_clear(int target_lane) const;
};

struct StrategyOutput {
  ControllerCommand controller;
  std::vector<MessageBody> messages_out;
  std::optional<PlatoonInfo> platoon_update;
  /// Role FSM cause; the manager applies it through role_transition.
  std::optional<RoleCause> role_change;
  bool maneuver_done = false;
  bool takeover_requested = false;
  std::optional<double> driver_speed;
  /// Log lines (kind, detail); errors such as UnknownJoiner land here.
  std::vector<std::pair<std::string, std::string>> notes;

  StrategyOutput& use(Longitudinal l, std::optional<double> v_set = std::nullopt) {
    controller.kind.longitudinal = l;
    controller.v_set = v_set;
    return *this;
  }
  StrategyOutput& send(MessageBody body) {
    messages_out.push_back(std::move(body));
    return *this;
  }
  StrategyOutput& note(std::string kind, std::string detail = {}) {
    notes.emplace_back(std::move(kind), std::move(detail));
    return *this;
  }
};

using Strategy = std::function<StrategyOutput(const StrategyContext&, StrategyProgress&)>;

class DuplicateKey : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// The two-dimensional (maneuver x role) strategy table.
class StrategyRegistry {
 public:
  /// Throws DuplicateKey when the key is already taken.
  void register_strategy(const StrategyKey& key, Strategy strategy);
  const Strategy* find(const StrategyKey& key) const;
  bool contains(const StrategyKey& key) const { return find(key) != nullptr; }
  bool remove(const StrategyKey& key);
  std::vector<StrategyKey> keys() const;
  std::size_t size() const { return table_.size(); }

 private:
  std::map<StrategyKey, Strategy> table_;
};

}  // namespace platoon
