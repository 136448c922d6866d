#include "platoon/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace platoon {

VehicleState step_longitudinal(const VehicleState& state, double a_cmd, const DynamicsLimits& limits, double dt) {
  double a = std::clamp(a_cmd, -limits.d_max, limits.a_max);
  if (std::isfinite(limits.jerk_max)) {
    const double da = limits.jerk_max * dt;
    a = std::clamp(a, state.a - da, state.a + da);
  }

  VehicleState next = state;
  if (state.v <= 0.0 && a < 0.0) {
    // Holding at standstill.
    next.v = 0.0;
    next.a = 0.0;
    return next;
  }

  const double v_end = state.v + a * dt;
  if (v_end < 0.0) {
    next.s = state.s + state.v * state.v / (2.0 * -a);
    next.v = 0.0;
    next.a = a;
    return next;
  }
  next.s = state.s + state.v * dt + 0.5 * a * dt * dt;
  next.v = v_end;
  next.a = a;
  return next;
}

VehicleState step_lateral(const VehicleState& state, const Lateral& cmd, const LaneGeometry& geom, double dt) {
  VehicleState next = state;
  const double rate = geom.lane_width / geom.lane_change_duration;
  const double step = rate * dt;

  if (cmd.mode == Lateral::Mode::LaneCenter) {
    if (std::abs(state.lateral_offset) <= step) {
      next.lateral_offset = 0.0;
    } else {
      next.lateral_offset = state.lateral_offset - std::copysign(step, state.lateral_offset);
    }
    return next;
  }

  if (cmd.target_lane < 0 || cmd.target_lane >= geom.lane_count) {
    throw InvalidLane("target lane " + std::to_string(cmd.target_lane) + " out of range");
  }
  if (std::abs(cmd.target_lane - state.lane) != 1) {
    throw InvalidLane("target lane " + std::to_string(cmd.target_lane) + " not adjacent to lane " +
                      std::to_string(state.lane));
  }

  const double dir = cmd.target_lane > state.lane ? 1.0 : -1.0;
  const double offset = state.lateral_offset + dir * step;
  // Small tolerance so accumulated rounding never costs an extra tick.
  if (dir * offset >= geom.lane_width - 1e-9) {
    next.lane = cmd.target_lane;
    next.lateral_offset = 0.0;
  } else {
    next.lateral_offset = offset;
  }
  return next;
}

std::vector<std::pair<VehicleId, VehicleId>> detect_collisions(std::span<const VehicleState> states,
                                                               const LaneGeometry& geom, double vehicle_width) {
  std::vector<std::pair<VehicleId, VehicleId>> out;
  for (std::size_t i = 0; i < states.size(); ++i) {
    for (std::size_t j = i + 1; j < states.size(); ++j) {
      const auto& a = states[i];
      const auto& b = states[j];
      const bool longitudinal = a.rear() < b.s && b.rear() < a.s;
      if (!longitudinal) continue;
      const double dy = std::abs(lateral_position(a, geom) - lateral_position(b, geom));
      const double overlap = vehicle_width - dy;
      if (overlap <= 0.5 * vehicle_width) continue;
      out.emplace_back(std::min(a.id, b.id), std::max(a.id, b.id));
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

}  // namespace platoon
