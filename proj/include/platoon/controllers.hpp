#pragma once

#include <optional>

#include "platoon/comms.hpp"
#include "platoon/params.hpp"
#include "platoon/types.hpp"

namespace platoon {

enum class ControlStatus { Ok, InvalidReading, StaleData };

/// Every law produces a command even when its precondition is violated; the
/// status tells the caller whether the inputs were trustworthy.
struct ControlOutput {
  double a_cmd = 0.0;
  ControlStatus status = ControlStatus::Ok;
};

/// PID memory on the gap error. Anti-windup keeps |ki * integral| within
/// GainSet::windup_clamp; large errors are clipped before integration.
struct PidState {
  double integral = 0.0;
  double prev_error = 0.0;
  bool primed = false;
  VehicleId target = kNoVehicle;

  void reset() { *this = PidState{}; }
  double step(double error, const GainSet& gains, double dt);
};

double cc(double ego_v, double v_set, const GainSet& gains);

/// Radar-only gap regulation at the enlarged headway h_max.
ControlOutput acc(const RadarReading& reading, double ego_v, const SpacingPolicy& policy, const GainSet& gains,
                  double dt, PidState& pid);

/// h = clamp(h_base - k_h * rel_speed, h_min, h_max)
double variable_headway(double rel_speed, const SpacingPolicy& policy);

/// Radar gap plus V2V predecessor speed and acceleration. A null or
/// over-age peer gives StaleData.
ControlOutput cacc(const RadarReading& reading, const PeerView* preceding, double ego_v, const SpacingPolicy& policy,
                   const GainSet& gains, double dt, Tick stale_after, PidState& pid);

double aeb(double ego_v, const DynamicsLimits& limits);

enum class TtcOutcome { None, CutIn, AebTrigger };

/// Classifies a newly appeared in-lane target.
TtcOutcome ttc_trigger(const RadarReading& reading, const TtcConfig& cfg);

/// Human driver: holds v_target and backs off when the visible gap shrinks.
double driver_command(double ego_v, double v_target, const RadarReading& view, const DriverModel& model);

// --- control layer ------------------------------------------------------------------

/// Controller selection handed from management to control.
struct ControllerCommand {
  ControllerKind kind;
  /// CC setpoint, ACC speed cap, or driver target speed.
  std::optional<double> v_set;
  /// V2V source for CACC; defaults to the radar target.
  VehicleId peer = kNoVehicle;
  /// Regulate on the V2V-derived distance to `peer` instead of the radar
  /// (alignment in an adjacent lane).
  bool virtual_gap = false;

  static ControllerCommand make(Longitudinal l, std::optional<double> v = std::nullopt) {
    ControllerCommand c;
    c.kind.longitudinal = l;
    c.v_set = v;
    return c;
  }
};

struct ControlInputs {
  const VehicleState* ego = nullptr;
  const RadarReading* radar = nullptr;
  const RadarReading* driver_view = nullptr;
  const V2VPayload* v2v = nullptr;
};

/// Per-vehicle control layer: owns PID memory and resets it whenever the
/// selected law changes.
class ControlLayer {
 public:
  ControlOutput evaluate(const ControllerCommand& cmd, const ControlInputs& in, const Parameters& params);

 private:
  Longitudinal last_ = Longitudinal::Driver;
  bool last_virtual_ = false;
  PidState acc_pid_;
  PidState cacc_pid_;
};

}  // namespace platoon
