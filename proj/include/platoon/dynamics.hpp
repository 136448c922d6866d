#pragma once

#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "platoon/params.hpp"
#include "platoon/types.hpp"

namespace platoon {

class InvalidLane : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// One Euler step of the point-mass model. Commands are clamped to the limits
/// and speed never goes negative; a vehicle that reaches zero mid-step stops
/// exactly where constant deceleration would put it.
VehicleState step_longitudinal(const VehicleState& state, double a_cmd, const DynamicsLimits& limits, double dt);

/// Kinematic lateral model. LaneChange moves the body at a constant lateral
/// rate so that one full lane width takes lane_change_duration; on arrival
/// the lane index switches and the offset resets to zero. Throws InvalidLane
/// when the target is out of range or not adjacent.
VehicleState step_lateral(const VehicleState& state, const Lateral& cmd, const LaneGeometry& geom, double dt);

/// Lateral position of the body centre measured from the centre of lane 0.
inline double lateral_position(const VehicleState& s, const LaneGeometry& g) {
  return s.lane * g.lane_width + s.lateral_offset;
}

/// Ordered, deduplicated list of colliding pairs (lower id first).
std::vector<std::pair<VehicleId, VehicleId>> detect_collisions(std::span<const VehicleState> states,
                                                               const LaneGeometry& geom, double vehicle_width);

}  // namespace platoon
