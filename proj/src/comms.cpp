#include "platoon/comms.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "platoon/dynamics.hpp"

namespace platoon {

void FaultBoard::inject(VehicleId id, FaultKind kind, Tick tick) { faults_[id].try_emplace(kind, tick); }

bool FaultBoard::has(VehicleId id, FaultKind kind) const { return injected_at(id, kind).has_value(); }

std::optional<Tick> FaultBoard::injected_at(VehicleId id, FaultKind kind) const {
  auto it = faults_.find(id);
  if (it == faults_.end()) return std::nullopt;
  auto k = it->second.find(kind);
  if (k == it->second.end()) return std::nullopt;
  return k->second;
}

std::set<FaultKind> FaultBoard::faults_of(VehicleId id) const {
  std::set<FaultKind> out;
  if (auto it = faults_.find(id); it != faults_.end()) {
    for (const auto& [k, _] : it->second) out.insert(k);
  }
  return out;
}

Inboxes route(std::span<const Envelope> due, const FaultBoard& faults, std::span<const VehicleState> receivers,
              double range) {
  std::vector<const Envelope*> ordered;
  ordered.reserve(due.size());
  for (const auto& e : due) ordered.push_back(&e);
  std::stable_sort(ordered.begin(), ordered.end(), [](const Envelope* a, const Envelope* b) {
    if (a->message.sender != b->message.sender) return a->message.sender < b->message.sender;
    return a->message.body.index() < b->message.body.index();
  });

  Inboxes out;
  for (const auto& rx : receivers) {
    auto& inbox = out[rx.id];
    if (faults.has(rx.id, FaultKind::V2VFail)) continue;
    for (const Envelope* e : ordered) {
      if (e->message.sender == rx.id) continue;
      if (faults.has(e->message.sender, FaultKind::V2VFail)) continue;
      if (std::isfinite(range) && std::abs(e->sender_s - rx.s) > range) continue;
      inbox.push_back(e->message);
    }
  }
  return out;
}

void Bus::post(const V2VMessage& msg, double sender_s, const FaultBoard& faults) {
  if (faults.has(msg.sender, FaultKind::V2VFail)) return;
  queue_.push_back({msg, sender_s});
}

Inboxes Bus::deliver(Tick tick, const FaultBoard& faults, std::span<const VehicleState> receivers) {
  std::vector<Envelope> due;
  std::vector<Envelope> later;
  for (auto& e : queue_) {
    if (e.message.tick_sent + cfg_.delivery_delay_ticks <= tick) {
      due.push_back(std::move(e));
    } else {
      later.push_back(std::move(e));
    }
  }
  queue_ = std::move(later);
  return route(due, faults, receivers, cfg_.range);
}

RadarReading perceive_ahead(const VehicleState& ego, std::span<const VehicleState> others, const LaneGeometry& geom,
                            double vehicle_width, double max_range) {
  RadarReading r;
  r.valid = true;
  r.max_range = max_range;
  r.gap = max_range;

  const double y_ego = lateral_position(ego, geom);
  const double reach = 0.5 * (geom.lane_width + vehicle_width);
  double best = std::numeric_limits<double>::infinity();
  const VehicleState* hit = nullptr;
  for (const auto& o : others) {
    if (o.id == ego.id) continue;
    if (o.s <= ego.s) continue;
    if (std::abs(lateral_position(o, geom) - y_ego) >= reach) continue;
    const double gap = std::max(0.0, o.rear() - ego.s);
    if (gap < best || (gap == best && hit && o.id < hit->id)) {
      best = gap;
      hit = &o;
    }
  }
  if (hit && best <= max_range) {
    r.gap = best;
    r.rel_speed = hit->v - ego.v;
    r.target = hit->id;
  }
  return r;
}

RadarReading radar_sense(const VehicleState& ego, std::span<const VehicleState> others, const FaultBoard& faults,
                         const LaneGeometry& geom, double vehicle_width, double max_range) {
  if (faults.has(ego.id, FaultKind::RadarFail)) {
    RadarReading r;
    r.valid = false;
    r.max_range = max_range;
    r.gap = max_range;
    return r;
  }
  return perceive_ahead(ego, others, geom, vehicle_width, max_range);
}

RadarReading RadarTracker::track(RadarReading reading) {
  reading.new_target = reading.valid && reading.has_target() && reading.target != last_;
  last_ = reading.valid ? reading.target : kNoVehicle;
  return reading;
}

bool lane_clear(const VehicleState& ego, std::span<const VehicleState> others, int target_lane,
                const LaneGeometry& geom, double vehicle_width, double margin) {
  const double y_target = target_lane * geom.lane_width;
  const double reach = 0.5 * (geom.lane_width + vehicle_width);
  for (const auto& o : others) {
    if (o.id == ego.id) continue;
    if (std::abs(lateral_position(o, geom) - y_target) >= reach) continue;
    if (o.rear() < ego.s + margin && o.s > ego.rear() - margin) return false;
  }
  return true;
}

std::vector<VehicleId> detect_peer_failure(const std::map<VehicleId, Tick>& heartbeat_ages, Tick timeout_ticks) {
  std::vector<VehicleId> out;
  for (const auto& [id, age] : heartbeat_ages) {
    if (age > timeout_ticks) out.push_back(id);
  }
  return out;
}

void PeerTable::update(const Inbox& inbox) {
  for (const auto& msg : inbox) {
    const auto* hb = msg.as<Heartbeat>();
    if (!hb) continue;
    auto [it, inserted] = entries_.try_emplace(msg.sender, Entry{msg.tick_sent, *hb});
    if (!inserted && msg.tick_sent >= it->second.tick_sent) it->second = Entry{msg.tick_sent, *hb};
  }
}

Tick PeerTable::age(VehicleId peer, Tick now) const {
  auto it = entries_.find(peer);
  if (it == entries_.end()) return now;
  return now - it->second.tick_sent;
}

const Heartbeat* PeerTable::latest(VehicleId peer) const {
  auto it = entries_.find(peer);
  return it == entries_.end() ? nullptr : &it->second.hb;
}

V2VPayload PeerTable::payload(Tick now, Tick timeout_ticks, bool degradation_enabled,
                              std::span<const VehicleId> watched) const {
  V2VPayload out;
  for (const auto& [id, e] : entries_) {
    PeerView pv;
    pv.id = id;
    pv.age = now - e.tick_sent;
    pv.state = e.hb.state;
    pv.role = e.hb.role;
    pv.platoon = e.hb.platoon;
    out.peers.emplace(id, std::move(pv));
  }

  std::map<VehicleId, Tick> ages;
  for (VehicleId id : watched) ages[id] = age(id, now);
  for (VehicleId id : detect_peer_failure(ages, timeout_ticks)) {
    if (degradation_enabled) {
      out.silent.push_back(id);
      continue;
    }
    // Comparison mode: a silent peer reads as all-zero data.
    PeerView pv;
    pv.id = id;
    pv.age = 0;
    pv.substituted = true;
    pv.state = VehicleState{};
    pv.state.id = id;
    pv.state.length = 0.0;
    if (auto it = out.peers.find(id); it != out.peers.end()) {
      pv.role = it->second.role;
      pv.platoon = it->second.platoon;
    }
    out.peers[id] = std::move(pv);
  }
  return out;
}

V2VPayload v2v_payload(VehicleId ego, const Inbox& inbox, const FaultBoard& faults, PeerTable& table, Tick now,
                       Tick timeout_ticks, bool degradation_enabled, std::span<const VehicleId> watched) {
  if (!faults.has(ego, FaultKind::V2VFail)) table.update(inbox);
  std::vector<VehicleId> others;
  for (VehicleId id : watched) {
    if (id != ego) others.push_back(id);
  }
  return table.payload(now, timeout_ticks, degradation_enabled, others);
}

}  // namespace platoon
