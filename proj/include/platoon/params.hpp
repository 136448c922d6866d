#pragma once

#include <limits>

namespace platoon {

inline constexpr double kGravity = 9.81;

struct DynamicsLimits {
  double a_max = 0.30 * kGravity;
  double d_max = 1.00 * kGravity;
  /// m/s^3; infinity disables the jerk limit.
  double jerk_max = std::numeric_limits<double>::infinity();
};

struct LaneGeometry {
  int lane_count = 3;
  double lane_width = 3.5;
  double lane_change_duration = 3.0;
};

struct VehicleGeometry {
  double length = 5.0;
  double width = 1.8;
};

struct BusConfig {
  int delivery_delay_ticks = 1;
  double range = std::numeric_limits<double>::infinity();
};

struct RadarConfig {
  double max_range = 200.0;
};

/// desired_gap(v) = d0 + h * v
struct SpacingPolicy {
  double d0 = 3.0;
  double h_base = 0.5;
  double h_min = 0.25;
  double h_max = 0.75;
  /// Variable-headway slope, s^2/m.
  double k_h = 0.05;

  double desired_gap(double v, double h) const { return d0 + h * v; }
};

struct GainSet {
  double kp = 0.45;
  double ki = 0.02;
  double kd = 0.1;
  double kv = 0.6;
  double ka = 0.3;
  /// Bound on the integral contribution ki * integral, m/s^2.
  double windup_clamp = 2.0;
  /// Error fed to the integrator is clipped to +/- this, m.
  double integral_band = 3.0;
  /// Cruise-control speed gain, 1/s.
  double kc = 0.5;
};

struct TtcConfig {
  double ttc_threshold = 2.0;
  double min_gap_trigger = 5.0;
};

/// Simulated human driver: speed keeping plus a damped gap law on what the
/// driver sees through the windscreen (not the radar).
struct DriverModel {
  double kc = 0.5;
  double kp = 0.3;
  double kv = 0.9;
  double standstill_gap = 3.0;
  double headway = 1.2;
};

struct ManagementTiming {
  double heartbeat_timeout = 0.5;
  double takeover_delay = 3.0;
  double restart_stagger = 1.0;
  double maneuver_timeout = 60.0;
  double join_service_delay = 1.0;
};

struct ManeuverSpeeds {
  double platoon = 20.0;
  double evade = 15.0;
  double aeb_middle_wait = 10.0;
  double fault_cc_drop = 2.0;
  double join_approach_cap = 25.0;
  double leave_exit = 16.0;
  double join_gap = 30.0;
  double join_gap_tolerance = 2.0;
  double join_speed_tolerance = 1.0;
  /// Free space required around the body before a lane change, m.
  double lane_clear_margin = 5.0;
};

struct Parameters {
  double dt = 0.05;
  DynamicsLimits limits;
  LaneGeometry lanes;
  VehicleGeometry vehicle;
  BusConfig bus;
  RadarConfig radar;
  SpacingPolicy spacing;
  GainSet gains;
  TtcConfig ttc;
  DriverModel driver;
  /// Cut-in vehicles drive with a much tighter following habit.
  DriverModel intruder_driver{0.5, 0.45, 0.6, 1.0, 0.3};
  ManagementTiming timing;
  ManeuverSpeeds speeds;
  bool degradation_enabled = true;
};

}  // namespace platoon
