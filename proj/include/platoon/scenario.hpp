#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "platoon/params.hpp"
#include "platoon/types.hpp"

namespace platoon {

class SpecError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct VehicleSpec {
  VehicleId id;
  double s = 0.0;
  int lane = 0;
  double v = 0.0;
  Role role = Role::FreeVehicle;
};

struct JoinInstructionEvent {
  VehicleId target;
  /// 1-based slot; 0 = tail.
  int position = 0;
};

struct LeaveInstructionEvent {
  VehicleId target;
};

/// Scripted intruder. It appears in `lane` with its rear bumper `s_offset`
/// ahead of `target`'s front bumper, changes into the target's lane, stays
/// for `duration` seconds after arriving, then changes back and is removed.
struct CutInEvent {
  VehicleId target;
  int lane = 0;
  double s_offset = 10.0;
  double duration = 5.0;
  bool ttc_satisfying = false;
  /// Intruder speed relative to the target; default picked by ttc_satisfying.
  std::optional<double> speed_delta;

  double delta() const { return speed_delta.value_or(ttc_satisfying ? -8.0 : -1.0); }
};

struct FaultInjectionEvent {
  VehicleId target;
  FaultKind fault = FaultKind::RadarFail;
};

using EventKind = std::variant<JoinInstructionEvent, LeaveInstructionEvent, CutInEvent, FaultInjectionEvent>;

struct ScenarioEvent {
  double t = 0.0;
  EventKind kind;
};

struct RunSpec {
  double dt = 0.05;
  double duration = 60.0;
  std::uint64_t seed = 0;
  bool halt_on_collision = false;
};

struct ScenarioSpec {
  std::string name;
  RunSpec run;
  std::vector<VehicleSpec> vehicles;
  /// Initial membership, leader first. Empty when everybody starts free.
  std::vector<VehicleId> platoon;
  std::vector<ScenarioEvent> events;
  /// Defaults overridden by the file; dt and degradation mirror run/modes.
  Parameters params;

  Tick tick_count() const;
  Tick tick_of(double t) const;
  bool has_fault() const;
};

/// Parses and validates. Throws SpecError with a readable message.
ScenarioSpec load_scenario(const std::string& path);
ScenarioSpec parse_scenario(const std::string& text, const std::string& name = "scenario");

/// Invariant checks shared by the loader and programmatic construction.
void validate(const ScenarioSpec& spec);

/// Canonical text form of everything that affects a run.
std::string canonical_dump(const ScenarioSpec& spec);
/// FNV-1a 64 over canonical_dump.
std::uint64_t spec_hash(const ScenarioSpec& spec);
std::string hash_hex(std::uint64_t h);

}  // namespace platoon
