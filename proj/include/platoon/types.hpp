#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace platoon {

using Tick = std::int64_t;

/// Scenario-unique vehicle identifier. Dense 1..N at start, never reused.
struct VehicleId {
  int value = 0;

  constexpr auto operator<=>(const VehicleId&) const = default;
  constexpr bool valid() const { return value > 0; }
};

inline constexpr VehicleId kNoVehicle{0};

/// Kinematic truth of one vehicle. `s` is the front-bumper road coordinate,
/// the body occupies [s - length, s].
struct VehicleState {
  VehicleId id;
  double s = 0.0;
  int lane = 0;
  double lateral_offset = 0.0;
  double v = 0.0;
  double a = 0.0;
  double length = 5.0;

  double rear() const { return s - length; }
};

enum class Role { FreeVehicle, Leader, Follower };

enum class ManeuverKind {
  Platooning,
  JoinTail,
  JoinMiddle,
  LeaveTail,
  LeaveMiddle,
  AEBHead,
  AEBMiddle,
  CutIn,
  HardwareFailures,
  Extension,
};

/// One row of the maneuver dimension. Extension maneuvers carry a name so
/// new rows can be registered without touching this enum.
struct Maneuver {
  ManeuverKind kind = ManeuverKind::Platooning;
  std::string name;

  static Maneuver platooning() { return {}; }
  static Maneuver of(ManeuverKind k) { return {k, {}}; }
  static Maneuver extension(std::string n) { return {ManeuverKind::Extension, std::move(n)}; }

  bool is_platooning() const { return kind == ManeuverKind::Platooning; }

  auto operator<=>(const Maneuver&) const = default;
};

enum class Longitudinal { CC, ACC, CACC, AEB, Driver };

struct Lateral {
  enum class Mode { LaneCenter, LaneChange } mode = Mode::LaneCenter;
  int target_lane = 0;

  static Lateral center() { return {}; }
  static Lateral change_to(int lane) { return {Mode::LaneChange, lane}; }
  bool operator==(const Lateral&) const = default;
};

struct ControllerKind {
  Longitudinal longitudinal = Longitudinal::Driver;
  Lateral lateral;
  bool operator==(const ControllerKind&) const = default;
};

/// Leader-maintained membership. id_series.front() is the leader.
struct PlatoonInfo {
  int size = 0;
  std::vector<VehicleId> id_series;

  static PlatoonInfo of(std::vector<VehicleId> ids) {
    PlatoonInfo p;
    p.size = static_cast<int>(ids.size());
    p.id_series = std::move(ids);
    return p;
  }

  bool contains(VehicleId id) const;
  /// Zero-based index of `id`, or nullopt when not a member.
  std::optional<std::size_t> index_of(VehicleId id) const;
  VehicleId leader() const { return id_series.empty() ? kNoVehicle : id_series.front(); }
  /// Member directly ahead of `id` in the series.
  VehicleId predecessor(VehicleId id) const;

  bool operator==(const PlatoonInfo&) const = default;
};

enum class FaultKind { RadarFail, V2VFail };

// --- V2V message vocabulary -------------------------------------------------

struct Heartbeat {
  VehicleState state;
  Role role = Role::FreeVehicle;
  PlatoonInfo platoon;
  bool operator==(const Heartbeat&) const = default;
};
struct JoinFlag {
  bool operator==(const JoinFlag&) const = default;
};
struct UpdateFlag {
  bool operator==(const UpdateFlag&) const = default;
};
struct EvadeFlag {
  bool operator==(const EvadeFlag&) const = default;
};
struct SafeFlag {
  bool operator==(const SafeFlag&) const = default;
};
struct FaultFlag {
  FaultKind fault = FaultKind::RadarFail;
  bool operator==(const FaultFlag&) const = default;
};
struct ManeuverAnnounce {
  Maneuver maneuver;
  bool operator==(const ManeuverAnnounce&) const = default;
};
struct JoinRequest {
  bool operator==(const JoinRequest&) const = default;
};
struct TakeoverRequest {
  bool operator==(const TakeoverRequest&) const = default;
};

/// Alternative order doubles as the intra-tick delivery order key.
using MessageBody = std::variant<Heartbeat, JoinFlag, UpdateFlag, EvadeFlag, SafeFlag, FaultFlag,
                                 ManeuverAnnounce, JoinRequest, TakeoverRequest>;

struct V2VMessage {
  VehicleId sender;
  Tick tick_sent = 0;
  MessageBody body;

  template <class T>
  bool is() const {
    return std::holds_alternative<T>(body);
  }
  template <class T>
  const T* as() const {
    return std::get_if<T>(&body);
  }
  bool operator==(const V2VMessage&) const = default;
};

using Inbox = std::vector<V2VMessage>;

// --- names ------------------------------------------------------------------

std::string_view to_string(Role r);
std::string_view to_string(ManeuverKind k);
std::string to_string(const Maneuver& m);
std::string_view to_string(Longitudinal c);
std::string_view to_string(FaultKind f);
std::string_view message_name(const MessageBody& body);

std::optional<Role> parse_role(std::string_view s);
std::optional<FaultKind> parse_fault(std::string_view s);

}  // namespace platoon
