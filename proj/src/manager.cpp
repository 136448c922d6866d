#include "platoon/manager.hpp"

#include <cmath>

namespace platoon {

namespace {

std::string vid(VehicleId id) { return "v" + std::to_string(id.value); }

Tick to_ticks(double seconds, double dt) { return static_cast<Tick>(std::llround(seconds / dt)); }

bool is_join(const Maneuver& m) { return m.kind == ManeuverKind::JoinTail || m.kind == ManeuverKind::JoinMiddle; }

}  // namespace

VehicleManager::VehicleManager(VehicleId id, Role role, PlatoonInfo platoon, double driver_speed,
                               const StrategyRegistry& registry, const Parameters& params)
    : id_(id),
      role_(role),
      platoon_(std::move(platoon)),
      driver_speed_(driver_speed),
      registry_(&registry),
      params_(&params) {}

void VehicleManager::log(ManageResult& out, Tick tick, std::string kind, std::string detail) const {
  out.events.push_back({tick, id_, std::move(kind), std::move(detail)});
}

void VehicleManager::send(ManageResult& out, Tick tick, MessageBody body) const {
  if (!std::holds_alternative<Heartbeat>(body)) log(out, tick, "Send", std::string(message_name(body)));
  out.outbox.push_back({id_, tick, std::move(body)});
}

void VehicleManager::refresh_replica(const ManageInputs& in) {
  if (role_ == Role::Leader || !in.v2v) return;
  VehicleId leader = platoon_.leader();
  if (!leader.valid()) leader = instance_.leader;
  if (!leader.valid()) return;
  auto it = in.v2v->peers.find(leader);
  if (it == in.v2v->peers.end()) return;
  const PeerView& pv = it->second;
  if (pv.substituted || pv.role != Role::Leader) return;
  if (pv.age > to_ticks(params_->timing.heartbeat_timeout, params_->dt)) return;
  if (role_ == Role::Follower || pv.platoon.contains(id_)) platoon_ = pv.platoon;
}

void VehicleManager::collect_faults(const ManageInputs& in, std::set<VehicleId>& fresh) {
  if (!params_->degradation_enabled || role_ == Role::FreeVehicle) return;
  if (!in.own_faults.empty() && !known_faulty_.contains(id_)) fresh.insert(id_);
  if (in.inbox) {
    for (const auto& m : *in.inbox) {
      if (m.is<FaultFlag>() && platoon_.contains(m.sender) && !known_faulty_.contains(m.sender)) {
        fresh.insert(m.sender);
      }
    }
  }
  if (in.v2v) {
    for (VehicleId id : in.v2v->silent) {
      if (id != id_ && platoon_.contains(id) && !known_faulty_.contains(id)) fresh.insert(id);
    }
  }
  known_faulty_.insert(fresh.begin(), fresh.end());
}

std::optional<VehicleManager::PendingObstacle> VehicleManager::detect_obstacle(const ManageInputs& in) const {
  if (role_ == Role::FreeVehicle || !in.radar.valid || !in.radar.new_target) return std::nullopt;
  const VehicleId target = in.radar.target;
  if (platoon_.contains(target)) return std::nullopt;
  if (is_join(maneuver_) && target == instance_.subject) return std::nullopt;
  switch (ttc_trigger(in.radar, params_->ttc)) {
    case TtcOutcome::AebTrigger: {
      const auto kind = role_ == Role::Leader ? ManeuverKind::AEBHead : ManeuverKind::AEBMiddle;
      return PendingObstacle{target, Maneuver::of(kind), TriggerKind::ObstacleTTC};
    }
    case TtcOutcome::CutIn:
      if (role_ != Role::Follower) return std::nullopt;
      return PendingObstacle{target, Maneuver::of(ManeuverKind::CutIn), TriggerKind::ObstacleCutIn};
    case TtcOutcome::None:
      break;
  }
  return std::nullopt;
}

void VehicleManager::enter(const ManeuverTrigger& trigger, ManeuverInstance inst, Tick tick, ManageResult& out,
                           bool announce) {
  auto next = next_maneuver(maneuver_, trigger);
  if (!next) {
    log(out, tick, "IllegalTransition", to_string(maneuver_) + " on " + std::string(to_string(trigger.kind)));
    return;
  }
  inst.entered = tick;
  inst.trigger = trigger;
  maneuver_ = *next;
  instance_ = std::move(inst);
  progress_ = StrategyProgress{};
  progress_.since = tick;
  missing_logged_ = false;
  log(out, tick, "ManeuverStart",
      to_string(maneuver_) + " subject=" + vid(instance_.subject) + " trigger=" + std::string(to_string(trigger.kind)));
  if (announce) send(out, tick, ManeuverAnnounce{maneuver_});
}

void VehicleManager::complete(Tick tick, ManageResult& out) {
  log(out, tick, "ManeuverComplete", to_string(maneuver_) + " subject=" + vid(instance_.subject));
  last_completed_[maneuver_.kind] = tick;
  maneuver_ = maneuver_transition(maneuver_, ManeuverTrigger::completed());
  progress_ = StrategyProgress{};
}

ManageResult VehicleManager::tick(const ManageInputs& in) {
  ManageResult out;
  const Tick now = in.tick;
  refresh_replica(in);

  for (const auto& ins : in.instructions) {
    if (role_ == Role::FreeVehicle && ins.target != id_) continue;
    if (taken_over_ && ins.kind == CloudInstruction::Kind::Join) {
      log(out, now, "InstructionIgnored", "taken over");
      continue;
    }
    queued_cloud_.push_back(ins);
  }

  std::set<VehicleId> fresh;
  collect_faults(in, fresh);

  if (auto ob = detect_obstacle(in)) pending_obstacle_ = ob;
  if (pending_obstacle_) {
    const bool still = in.radar.valid && in.radar.target == pending_obstacle_->target &&
                       !platoon_.contains(pending_obstacle_->target);
    if (!still) pending_obstacle_.reset();
  }

  if (in.inbox && role_ != Role::FreeVehicle) {
    for (const auto& m : *in.inbox) {
      const auto* ann = m.as<ManeuverAnnounce>();
      if (!ann || !platoon_.contains(m.sender) || ann->maneuver == maneuver_) continue;
      queued_announce_.push_back({m.sender, ann->maneuver, now});
    }
  }

  // Arbitration: faults preempt anything; otherwise only a platooning
  // vehicle takes a new maneuver, cloud > sensor > peer announce.
  if (!fresh.empty()) {
    if (maneuver_.kind == ManeuverKind::HardwareFailures) {
      instance_.faulty.insert(fresh.begin(), fresh.end());
    } else {
      ManeuverInstance inst;
      inst.subject = *fresh.begin();
      inst.leader = platoon_.leader();
      inst.faulty = fresh;
      inst.series = platoon_;
      const bool own = fresh.contains(id_);
      if (own) inst.subject = id_;
      enter(ManeuverTrigger::hardware_fault(), inst, now, out, true);
    }
  } else if (maneuver_.is_platooning()) {
    if (!queued_cloud_.empty()) {
      CloudInstruction ins = queued_cloud_.front();
      queued_cloud_.pop_front();
      ManeuverInstance inst;
      inst.subject = ins.target;
      inst.leader = ins.leader;
      inst.position = ins.position;
      inst.series = ins.series;
      enter(ManeuverTrigger::cloud(ins.maneuver), inst, now, out, true);
    } else if (pending_obstacle_) {
      ManeuverInstance inst;
      inst.subject = id_;
      inst.leader = platoon_.leader();
      inst.obstacle = pending_obstacle_->target;
      inst.series = platoon_;
      ManeuverTrigger trig = pending_obstacle_->kind == TriggerKind::ObstacleTTC
                                 ? ManeuverTrigger::obstacle_ttc(pending_obstacle_->maneuver)
                                 : ManeuverTrigger::cut_in();
      pending_obstacle_.reset();
      enter(trig, inst, now, out, true);
    } else {
      while (!queued_announce_.empty()) {
        QueuedAnnounce a = queued_announce_.front();
        queued_announce_.pop_front();
        auto done = last_completed_.find(a.maneuver.kind);
        if (done != last_completed_.end() && done->second >= a.received) continue;
        if (!platoon_.contains(a.sender)) continue;
        ManeuverInstance inst;
        inst.subject = a.sender;
        inst.leader = platoon_.leader();
        inst.series = platoon_;
        if (a.maneuver.kind == ManeuverKind::HardwareFailures) {
          inst.faulty.insert(a.sender);
          known_faulty_.insert(a.sender);
        }
        enter(ManeuverTrigger::peer(a.maneuver), inst, now, out, false);
        break;
      }
    }
  }

  if (!maneuver_.is_platooning() &&
      now - instance_.entered > to_ticks(params_->timing.maneuver_timeout, params_->dt)) {
    log(out, now, "StrategyTimeout", to_string(maneuver_));
    maneuver_ = Maneuver::platooning();
    progress_ = StrategyProgress{};
  }

  const StrategyKey key{maneuver_, role_};
  const Strategy* strategy = registry_->find(key);
  if (!strategy) {
    if (!missing_logged_) log(out, now, "NoStrategy", to_string(key));
    missing_logged_ = true;
    out.controller = last_cmd_;
  } else {
    StrategyContext ctx;
    ctx.params = params_;
    ctx.tick = now;
    ctx.ego = in.ego;
    ctx.role = role_;
    ctx.maneuver = maneuver_;
    ctx.instance = &instance_;
    ctx.radar = in.radar;
    ctx.driver_view = in.driver_view;
    ctx.left_clear = in.left_clear;
    ctx.right_clear = in.right_clear;
    ctx.v2v = in.v2v;
    ctx.inbox = in.inbox;
    ctx.platoon = &platoon_;
    ctx.own_faults = in.own_faults;
    ctx.driver_speed = driver_speed_;

    StrategyOutput so = (*strategy)(ctx, progress_);
    out.controller = so.controller;
    for (auto& [kind, detail] : so.notes) log(out, now, kind, detail);
    for (auto& body : so.messages_out) send(out, now, std::move(body));
    if (so.platoon_update) {
      platoon_ = *so.platoon_update;
      log(out, now, "PlatoonUpdate", "size=" + std::to_string(platoon_.size));
    }
    if (so.driver_speed) driver_speed_ = *so.driver_speed;
    if (so.takeover_requested && !taken_over_) {
      taken_over_ = true;
      log(out, now, "TakeoverRequest");
    }
    if (so.role_change) {
      auto next = next_role(role_, *so.role_change);
      if (!next || (taken_over_ && *next == Role::Follower)) {
        log(out, now, "IllegalTransition", std::string(to_string(role_)) + " on " +
                                               std::string(to_string(*so.role_change)));
      } else {
        log(out, now, "RoleChange",
            std::string(to_string(role_)) + "->" + std::string(to_string(*next)) + " cause=" +
                std::string(to_string(*so.role_change)));
        role_ = *next;
        if (role_ == Role::FreeVehicle) {
          platoon_ = PlatoonInfo{};
          queued_cloud_.clear();
          queued_announce_.clear();
          pending_obstacle_.reset();
        }
        if (*so.role_change == RoleCause::TakeoverCompleted) log(out, now, "TakeoverComplete");
      }
    }
    if (so.maneuver_done) complete(now, out);
  }

  last_cmd_ = out.controller;
  send(out, now, Heartbeat{*in.ego, role_, platoon_});
  return out;
}

}  // namespace platoon
