#pragma once

#include <map>
#include <optional>
#include <set>
#include <span>
#include <vector>

#include "platoon/params.hpp"
#include "platoon/types.hpp"

namespace platoon {

/// Permanent per-vehicle hardware faults with their injection tick.
class FaultBoard {
 public:
  /// Re-injecting an active fault keeps the original tick.
  void inject(VehicleId id, FaultKind kind, Tick tick);
  bool has(VehicleId id, FaultKind kind) const;
  std::optional<Tick> injected_at(VehicleId id, FaultKind kind) const;
  std::set<FaultKind> faults_of(VehicleId id) const;
  bool empty() const { return faults_.empty(); }

 private:
  std::map<VehicleId, std::map<FaultKind, Tick>> faults_;
};

// --- V2V bus ------------------------------------------------------------------

using Inboxes = std::map<VehicleId, Inbox>;

struct Envelope {
  V2VMessage message;
  double sender_s = 0.0;
};

/// Routes messages that are due now. Messages from a V2V-failed sender and
/// to a V2V-failed receiver are dropped, a sender never hears itself, and
/// each inbox is ordered by (sender id, message kind).
Inboxes route(std::span<const Envelope> due, const FaultBoard& faults, std::span<const VehicleState> receivers,
              double range);

class Bus {
 public:
  explicit Bus(BusConfig cfg) : cfg_(cfg) {}

  /// Queue messages sent this tick. A V2V-failed sender cannot transmit.
  void post(const V2VMessage& msg, double sender_s, const FaultBoard& faults);
  /// Deliver everything with tick_sent + delay == tick.
  Inboxes deliver(Tick tick, const FaultBoard& faults, std::span<const VehicleState> receivers);

  std::size_t in_flight() const { return queue_.size(); }
  const BusConfig& config() const { return cfg_; }

 private:
  BusConfig cfg_;
  std::vector<Envelope> queue_;
};

// --- radar ----------------------------------------------------------------------

struct RadarReading {
  bool valid = false;
  /// Bumper-to-bumper distance to the nearest vehicle ahead in the ego
  /// corridor; max_range when nothing is in range.
  double gap = 200.0;
  /// Target speed minus ego speed.
  double rel_speed = 0.0;
  double max_range = 200.0;
  /// Tracked object id, matched to V2V ids by the fusion stage.
  VehicleId target = kNoVehicle;
  /// Target differs from the one tracked on the previous tick.
  bool new_target = false;

  bool has_target() const { return target.valid(); }
};

/// Ground-truth nearest vehicle ahead whose body overlaps the lane corridor
/// centred on the ego's current lateral position.
RadarReading perceive_ahead(const VehicleState& ego, std::span<const VehicleState> others, const LaneGeometry& geom,
                            double vehicle_width, double max_range);

/// Radar model. A failed radar reports valid=false and a "very far" gap.
RadarReading radar_sense(const VehicleState& ego, std::span<const VehicleState> others, const FaultBoard& faults,
                         const LaneGeometry& geom, double vehicle_width, double max_range);

/// Flags target changes between consecutive readings.
class RadarTracker {
 public:
  RadarReading track(RadarReading reading);

 private:
  VehicleId last_ = kNoVehicle;
};

/// True when no vehicle body overlaps the corridor of `target_lane` within
/// `margin` metres of the ego body, longitudinally.
bool lane_clear(const VehicleState& ego, std::span<const VehicleState> others, int target_lane,
                const LaneGeometry& geom, double vehicle_width, double margin);

// --- V2V payload ---------------------------------------------------------------

struct PeerView {
  VehicleId id;
  Tick age = 0;
  /// Fields replaced by zeros because the peer went silent (comparison mode
  /// without degradation).
  bool substituted = false;
  VehicleState state;
  Role role = Role::FreeVehicle;
  PlatoonInfo platoon;
};

struct V2VPayload {
  std::map<VehicleId, PeerView> peers;
  /// Peers of interest whose heartbeat age exceeds the timeout. Only
  /// reported when degradation is enabled.
  std::vector<VehicleId> silent;
};

/// Peers whose heartbeat age is strictly greater than the timeout.
std::vector<VehicleId> detect_peer_failure(const std::map<VehicleId, Tick>& heartbeat_ages, Tick timeout_ticks);

/// Latest-heartbeat table kept by every vehicle.
class PeerTable {
 public:
  /// Freshest heartbeat wins.
  void update(const Inbox& inbox);

  /// Age in ticks of the latest heartbeat; a never-heard peer counts from tick 0.
  Tick age(VehicleId peer, Tick now) const;
  const Heartbeat* latest(VehicleId peer) const;

  /// Builds the per-peer kinematic view for `watched` peers plus every peer
  /// heard within the timeout.
  V2VPayload payload(Tick now, Tick timeout_ticks, bool degradation_enabled,
                     std::span<const VehicleId> watched) const;

 private:
  struct Entry {
    Tick tick_sent = 0;
    Heartbeat hb;
  };
  std::map<VehicleId, Entry> entries_;
};

/// Heartbeats received by `ego` this tick, folded into `table`, then viewed.
V2VPayload v2v_payload(VehicleId ego, const Inbox& inbox, const FaultBoard& faults, PeerTable& table, Tick now,
                       Tick timeout_ticks, bool degradation_enabled, std::span<const VehicleId> watched);

}  // namespace platoon
