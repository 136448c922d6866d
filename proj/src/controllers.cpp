#include "platoon/controllers.hpp"

#include <algorithm>
#include <cmath>

namespace platoon {

double PidState::step(double error, const GainSet& gains, double dt) {
  integral += std::clamp(error, -gains.integral_band, gains.integral_band) * dt;
  if (gains.ki > 0.0) {
    const double bound = gains.windup_clamp / gains.ki;
    integral = std::clamp(integral, -bound, bound);
  }
  const double derivative = primed ? (error - prev_error) / dt : 0.0;
  prev_error = error;
  primed = true;
  return gains.kp * error + gains.ki * integral + gains.kd * derivative;
}

double cc(double ego_v, double v_set, const GainSet& gains) { return gains.kc * (v_set - ego_v); }

namespace {

void retarget(PidState& pid, VehicleId target) {
  if (pid.target != target) {
    pid.reset();
    pid.target = target;
  }
}

}  // namespace

ControlOutput acc(const RadarReading& reading, double ego_v, const SpacingPolicy& policy, const GainSet& gains,
                  double dt, PidState& pid) {
  retarget(pid, reading.target);
  const double error = reading.gap - policy.desired_gap(ego_v, policy.h_max);
  ControlOutput out;
  out.a_cmd = pid.step(error, gains, dt) + gains.kv * reading.rel_speed;
  out.status = reading.valid ? ControlStatus::Ok : ControlStatus::InvalidReading;
  return out;
}

double variable_headway(double rel_speed, const SpacingPolicy& policy) {
  return std::clamp(policy.h_base - policy.k_h * rel_speed, policy.h_min, policy.h_max);
}

ControlOutput cacc(const RadarReading& reading, const PeerView* preceding, double ego_v, const SpacingPolicy& policy,
                   const GainSet& gains, double dt, Tick stale_after, PidState& pid) {
  retarget(pid, reading.target);
  const double rel = preceding ? preceding->state.v - ego_v : reading.rel_speed;
  const double peer_a = preceding ? preceding->state.a : 0.0;
  const double h = variable_headway(rel, policy);
  const double error = reading.gap - policy.desired_gap(ego_v, h);

  ControlOutput out;
  out.a_cmd = pid.step(error, gains, dt) + gains.kv * rel + gains.ka * peer_a;
  if (!reading.valid) {
    out.status = ControlStatus::InvalidReading;
  } else if (!preceding || preceding->age > stale_after) {
    out.status = ControlStatus::StaleData;
  }
  return out;
}

double aeb(double ego_v, const DynamicsLimits& limits) { return ego_v > 0.0 ? -limits.d_max : 0.0; }

TtcOutcome ttc_trigger(const RadarReading& reading, const TtcConfig& cfg) {
  if (!reading.valid || !reading.new_target) return TtcOutcome::None;
  const double closing = -reading.rel_speed;
  const bool ttc_met = closing > 0.0 && reading.gap / closing <= cfg.ttc_threshold;
  if (ttc_met || reading.gap <= cfg.min_gap_trigger) return TtcOutcome::AebTrigger;
  return TtcOutcome::CutIn;
}

double driver_command(double ego_v, double v_target, const RadarReading& view, const DriverModel& model) {
  double a = model.kc * (v_target - ego_v);
  if (view.valid && view.has_target()) {
    const double desired = model.standstill_gap + model.headway * ego_v;
    a = std::min(a, model.kp * (view.gap - desired) + model.kv * view.rel_speed);
  }
  return a;
}

ControlOutput ControlLayer::evaluate(const ControllerCommand& cmd, const ControlInputs& in, const Parameters& params) {
  const Longitudinal kind = cmd.kind.longitudinal;
  if (kind != last_ || cmd.virtual_gap != last_virtual_) {
    acc_pid_.reset();
    cacc_pid_.reset();
    last_ = kind;
    last_virtual_ = cmd.virtual_gap;
  }

  const VehicleState& ego = *in.ego;
  const Tick stale_after = static_cast<Tick>(std::llround(params.timing.heartbeat_timeout / params.dt));

  switch (kind) {
    case Longitudinal::CC:
      return {cc(ego.v, cmd.v_set.value_or(params.speeds.platoon), params.gains), ControlStatus::Ok};

    case Longitudinal::ACC: {
      ControlOutput out = acc(*in.radar, ego.v, params.spacing, params.gains, params.dt, acc_pid_);
      if (cmd.v_set) out.a_cmd = std::min(out.a_cmd, cc(ego.v, *cmd.v_set, params.gains));
      return out;
    }

    case Longitudinal::CACC: {
      VehicleId peer_id = cmd.peer.valid() ? cmd.peer : in.radar->target;
      const PeerView* peer = nullptr;
      if (in.v2v && peer_id.valid()) {
        if (auto it = in.v2v->peers.find(peer_id); it != in.v2v->peers.end()) peer = &it->second;
      }
      RadarReading reading = *in.radar;
      if (cmd.virtual_gap) {
        reading = RadarReading{};
        reading.target = peer_id;
        if (peer) {
          reading.valid = true;
          // Heartbeats are at least a tick old; project the peer forward.
          const double s_peer = peer->state.s + peer->state.v * static_cast<double>(peer->age) * params.dt;
          reading.gap = s_peer - peer->state.length - ego.s;
          reading.rel_speed = peer->state.v - ego.v;
        }
      }
      ControlOutput out = cacc(reading, peer, ego.v, params.spacing, params.gains, params.dt, stale_after, cacc_pid_);
      if (cmd.v_set) out.a_cmd = std::min(out.a_cmd, cc(ego.v, *cmd.v_set, params.gains));
      return out;
    }

    case Longitudinal::AEB:
      return {aeb(ego.v, params.limits), ControlStatus::Ok};

    case Longitudinal::Driver:
      return {driver_command(ego.v, cmd.v_set.value_or(ego.v), *in.driver_view, params.driver), ControlStatus::Ok};
  }
  return {};
}

}  // namespace platoon
