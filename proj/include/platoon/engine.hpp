#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "platoon/scenario.hpp"
#include "platoon/strategy.hpp"

namespace platoon {

/// One vehicle in one trace row. Absent vehicles (intruders before spawn or
/// after removal) have present == false.
struct VehicleSample {
  bool present = false;
  bool intruder = false;
  VehicleState state;
  Longitudinal controller = Longitudinal::Driver;
  std::optional<double> v_set;
  Maneuver maneuver;
  Role role = Role::FreeVehicle;
  bool radar_valid = false;
  double radar_gap = 0.0;
  VehicleId radar_target;
  int platoon_size = 0;
  /// Authoritative id series; filled for leaders only.
  std::vector<VehicleId> members;
};

/// State at the end of `tick` (time = tick * dt).
struct TraceRow {
  Tick tick = 0;
  double time = 0.0;
  /// Indexed by id - 1: platoon-capable vehicles first, then intruders.
  std::vector<VehicleSample> vehicles;

  const VehicleSample& at(VehicleId id) const { return vehicles.at(static_cast<std::size_t>(id.value - 1)); }
};

struct Trace {
  std::uint64_t spec_hash = 0;
  double dt = 0.05;
  int vehicle_count = 0;
  int intruder_count = 0;
  std::vector<TraceRow> rows;
};

struct CollisionRecord {
  Tick tick = 0;
  double time = 0.0;
  VehicleId a;
  VehicleId b;
};

struct RunReport {
  std::uint64_t spec_hash = 0;
  Tick ticks = 0;
  bool halted = false;
  /// First contact of every colliding pair.
  std::vector<CollisionRecord> collisions;
  /// Smallest bumper gap seen between each (ahead, behind) pair; negative
  /// means overlap.
  std::map<std::pair<VehicleId, VehicleId>, double> min_gap;
  /// ManeuverComplete events in tick order.
  std::vector<SimEvent> completions;
  std::vector<SimEvent> takeovers;
};

struct RunResult {
  Trace trace;
  RunReport report;
  std::vector<SimEvent> events;
};

/// Runs the scenario with the built-in strategy table, or with `registry`
/// when given.
RunResult run(const ScenarioSpec& spec, const StrategyRegistry* registry = nullptr);

/// Bumper gaps between every vehicle and the nearest vehicle ahead in its
/// corridor, not clamped at zero. Returns (ahead, behind, gap).
std::vector<std::tuple<VehicleId, VehicleId, double>> true_gaps(const std::vector<VehicleState>& states,
                                                                const Parameters& params);

class SpecHashMismatch : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ReplayVerdict {
  bool equal = true;
  std::optional<Tick> first_divergence;
  std::string detail;
};

/// Bit-exact row comparison. Throws SpecHashMismatch for traces of
/// different specs.
ReplayVerdict replay_check(const Trace& a, const Trace& b);

std::string trace_csv(const Trace& trace);
std::string report_text(const RunReport& report, double dt);
std::string events_text(const std::vector<SimEvent>& events, double dt);

/// Writes trace.csv, report.txt and events.log into `dir` (created if needed).
void write_outputs(const std::string& dir, const RunResult& result);

}  // namespace platoon
