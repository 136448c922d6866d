#pragma once

#include <deque>
#include <optional>
#include <set>
#include <vector>

#include "platoon/strategy.hpp"

namespace platoon {

/// Everything the management layer of one vehicle sees on one tick.
struct ManageInputs {
  Tick tick = 0;
  const VehicleState* ego = nullptr;
  RadarReading radar;
  RadarReading driver_view;
  bool left_clear = true;
  bool right_clear = true;
  const Inbox* inbox = nullptr;
  const V2VPayload* v2v = nullptr;
  /// Cloud instructions delivered this tick (already filtered to this vehicle).
  std::vector<CloudInstruction> instructions;
  std::set<FaultKind> own_faults;
};

struct ManageResult {
  ControllerCommand controller;
  std::vector<V2VMessage> outbox;
  std::vector<SimEvent> events;
};

/// Management layer of one vehicle: trigger arbitration, the two FSMs and
/// strategy dispatch through the registry.
class VehicleManager {
 public:
  VehicleManager(VehicleId id, Role role, PlatoonInfo platoon, double driver_speed, const StrategyRegistry& registry,
                 const Parameters& params);

  ManageResult tick(const ManageInputs& in);

  VehicleId id() const { return id_; }
  Role role() const { return role_; }
  const Maneuver& maneuver() const { return maneuver_; }
  const PlatoonInfo& platoon() const { return platoon_; }
  const StrategyProgress& progress() const { return progress_; }
  const ManeuverInstance& instance() const { return instance_; }
  bool taken_over() const { return taken_over_; }
  const ControllerCommand& last_command() const { return last_cmd_; }

 private:
  struct PendingObstacle {
    VehicleId target;
    Maneuver maneuver;
    TriggerKind kind;
  };
  struct QueuedAnnounce {
    VehicleId sender;
    Maneuver maneuver;
    Tick received;
  };

  void refresh_replica(const ManageInputs& in);
  void collect_faults(const ManageInputs& in, std::set<VehicleId>& fresh);
  std::optional<PendingObstacle> detect_obstacle(const ManageInputs& in) const;
  void enter(const ManeuverTrigger& trigger, ManeuverInstance inst, Tick tick, ManageResult& out, bool announce);
  void complete(Tick tick, ManageResult& out);
  void log(ManageResult& out, Tick tick, std::string kind, std::string detail = {}) const;
  void send(ManageResult& out, Tick tick, MessageBody body) const;

  VehicleId id_;
  Role role_;
  PlatoonInfo platoon_;
  Maneuver maneuver_;
  ManeuverInstance instance_;
  StrategyProgress progress_;
  double driver_speed_;
  const StrategyRegistry* registry_;
  const Parameters* params_;

  std::deque<CloudInstruction> queued_cloud_;
  std::deque<QueuedAnnounce> queued_announce_;
  std::optional<PendingObstacle> pending_obstacle_;
  std::set<VehicleId> known_faulty_;
  std::map<ManeuverKind, Tick> last_completed_;
  bool taken_over_ = false;
  bool missing_logged_ = false;
  ControllerCommand last_cmd_;
};

}  // namespace platoon
