#include "platoon/types.hpp"

#include <algorithm>

namespace platoon {

bool PlatoonInfo::contains(VehicleId id) const {
  return std::find(id_series.begin(), id_series.end(), id) != id_series.end();
}

std::optional<std::size_t> PlatoonInfo::index_of(VehicleId id) const {
  auto it = std::find(id_series.begin(), id_series.end(), id);
  if (it == id_series.end()) return std::nullopt;
  return static_cast<std::size_t>(it - id_series.begin());
}

VehicleId PlatoonInfo::predecessor(VehicleId id) const {
  auto idx = index_of(id);
  if (!idx || *idx == 0) return kNoVehicle;
  return id_series[*idx - 1];
}

std::string_view to_string(Role r) {
  switch (r) {
    case Role::FreeVehicle: return "FreeVehicle";
    case Role::Leader: return "Leader";
    case Role::Follower: return "Follower";
  }
  return "?";
}

std::string_view to_string(ManeuverKind k) {
  switch (k) {
    case ManeuverKind::Platooning: return "Platooning";
    case ManeuverKind::JoinTail: return "JoinTail";
    case ManeuverKind::JoinMiddle: return "JoinMiddle";
    case ManeuverKind::LeaveTail: return "LeaveTail";
    case ManeuverKind::LeaveMiddle: return "LeaveMiddle";
    case ManeuverKind::AEBHead: return "AEBHead";
    case ManeuverKind::AEBMiddle: return "AEBMiddle";
    case ManeuverKind::CutIn: return "CutIn";
    case ManeuverKind::HardwareFailures: return "HardwareFailures";
    case ManeuverKind::Extension: return "Extension";
  }
  return "?";
}

std::string to_string(const Maneuver& m) {
  if (m.kind == ManeuverKind::Extension) return "Extension(" + m.name + ")";
  return std::string(to_string(m.kind));
}

std::string_view to_string(Longitudinal c) {
  switch (c) {
    case Longitudinal::CC: return "CC";
    case Longitudinal::ACC: return "ACC";
    case Longitudinal::CACC: return "CACC";
    case Longitudinal::AEB: return "AEB";
    case Longitudinal::Driver: return "Driver";
  }
  return "?";
}

std::string_view to_string(FaultKind f) {
  switch (f) {
    case FaultKind::RadarFail: return "RadarFail";
    case FaultKind::V2VFail: return "V2VFail";
  }
  return "?";
}

std::string_view message_name(const MessageBody& body) {
  static constexpr std::string_view kNames[] = {"Heartbeat", "JoinFlag",         "UpdateFlag",
                                                "EvadeFlag", "SafeFlag",         "FaultFlag",
                                                "ManeuverAnnounce", "JoinRequest", "TakeoverRequest"};
  return kNames[body.index()];
}

std::optional<Role> parse_role(std::string_view s) {
  if (s == "free" || s == "FreeVehicle") return Role::FreeVehicle;
  if (s == "leader" || s == "Leader") return Role::Leader;
  if (s == "follower" || s == "Follower") return Role::Follower;
  return std::nullopt;
}

std::optional<FaultKind> parse_fault(std::string_view s) {
  if (s == "radar" || s == "RadarFail") return FaultKind::RadarFail;
  if (s == "v2v" || s == "V2VFail") return FaultKind::V2VFail;
  return std::nullopt;
}

}  // namespace platoon
