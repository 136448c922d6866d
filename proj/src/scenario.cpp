#include "platoon/scenario.hpp"

#include <yaml-cpp/yaml.h>

#include <cmath>
#include <fstream>
#include <functional>
#include <iomanip>
#include <map>
#include <set>
#include <sstream>

namespace platoon {

Tick ScenarioSpec::tick_count() const { return static_cast<Tick>(std::llround(run.duration / run.dt)); }

Tick ScenarioSpec::tick_of(double t) const { return static_cast<Tick>(std::llround(t / run.dt)); }

bool ScenarioSpec::has_fault() const {
  for (const auto& e : events) {
    if (std::holds_alternative<FaultInjectionEvent>(e.kind)) return true;
  }
  return false;
}

namespace {

using Fields = std::map<std::string, std::function<void(const YAML::Node&)>>;

std::string where(const YAML::Node& n) {
  const auto m = n.Mark();
  if (m.line < 0) return "";
  return " (line " + std::to_string(m.line + 1) + ")";
}

template <class T>
T as(const YAML::Node& n, const std::string& key) {
  try {
    return n.as<T>();
  } catch (const YAML::Exception&) {
    throw SpecError("bad value for '" + key + "'" + where(n));
  }
}

/// Applies `fields` to every key of map `node`; unknown keys are errors.
void read_map(const YAML::Node& node, const std::string& section, const Fields& fields) {
  if (!node.IsMap()) throw SpecError("'" + section + "' must be a mapping" + where(node));
  for (const auto& kv : node) {
    const auto key = kv.first.as<std::string>();
    auto it = fields.find(key);
    if (it == fields.end()) throw SpecError("unknown key '" + key + "' in " + section + where(kv.first));
    it->second(kv.second);
  }
}

auto num(double& target, std::string key) {
  return [&target, key](const YAML::Node& n) { target = as<double>(n, key); };
}
auto integer(int& target, std::string key) {
  return [&target, key](const YAML::Node& n) { target = as<int>(n, key); };
}
auto flag(bool& target, std::string key) {
  return [&target, key](const YAML::Node& n) { target = as<bool>(n, key); };
}
auto id(VehicleId& target, std::string key) {
  return [&target, key](const YAML::Node& n) { target = VehicleId{as<int>(n, key)}; };
}

void read_driver(const YAML::Node& n, DriverModel& d, const std::string& section) {
  read_map(n, section,
           {{"kc", num(d.kc, "kc")},
            {"kp", num(d.kp, "kp")},
            {"kv", num(d.kv, "kv")},
            {"standstill_gap", num(d.standstill_gap, "standstill_gap")},
            {"headway", num(d.headway, "headway")}});
}

void read_parameters(const YAML::Node& n, Parameters& p) {
  read_map(
      n, "parameters",
      {{"gains",
        [&](const YAML::Node& g) {
          read_map(g, "gains",
                   {{"kp", num(p.gains.kp, "kp")},
                    {"ki", num(p.gains.ki, "ki")},
                    {"kd", num(p.gains.kd, "kd")},
                    {"kv", num(p.gains.kv, "kv")},
                    {"ka", num(p.gains.ka, "ka")},
                    {"kc", num(p.gains.kc, "kc")},
                    {"windup_clamp", num(p.gains.windup_clamp, "windup_clamp")},
                    {"integral_band", num(p.gains.integral_band, "integral_band")}});
        }},
       {"spacing",
        [&](const YAML::Node& g) {
          read_map(g, "spacing",
                   {{"d0", num(p.spacing.d0, "d0")},
                    {"h_base", num(p.spacing.h_base, "h_base")},
                    {"h_min", num(p.spacing.h_min, "h_min")},
                    {"h_max", num(p.spacing.h_max, "h_max")},
                    {"k_h", num(p.spacing.k_h, "k_h")}});
        }},
       {"limits",
        [&](const YAML::Node& g) {
          read_map(g, "limits",
                   {{"a_max", num(p.limits.a_max, "a_max")},
                    {"d_max", num(p.limits.d_max, "d_max")},
                    {"jerk_max", num(p.limits.jerk_max, "jerk_max")}});
        }},
       {"lanes",
        [&](const YAML::Node& g) {
          read_map(g, "lanes",
                   {{"count", integer(p.lanes.lane_count, "count")},
                    {"width", num(p.lanes.lane_width, "width")},
                    {"change_duration", num(p.lanes.lane_change_duration, "change_duration")}});
        }},
       {"vehicle",
        [&](const YAML::Node& g) {
          read_map(g, "vehicle",
                   {{"length", num(p.vehicle.length, "length")}, {"width", num(p.vehicle.width, "width")}});
        }},
       {"bus",
        [&](const YAML::Node& g) {
          read_map(g, "bus",
                   {{"delivery_delay_ticks", integer(p.bus.delivery_delay_ticks, "delivery_delay_ticks")},
                    {"range", num(p.bus.range, "range")}});
        }},
       {"radar", [&](const YAML::Node& g) { read_map(g, "radar", {{"max_range", num(p.radar.max_range, "max_range")}}); }},
       {"ttc",
        [&](const YAML::Node& g) {
          read_map(g, "ttc",
                   {{"threshold", num(p.ttc.ttc_threshold, "threshold")},
                    {"min_gap", num(p.ttc.min_gap_trigger, "min_gap")}});
        }},
       {"driver", [&](const YAML::Node& g) { read_driver(g, p.driver, "driver"); }},
       {"intruder_driver", [&](const YAML::Node& g) { read_driver(g, p.intruder_driver, "intruder_driver"); }},
       {"timing",
        [&](const YAML::Node& g) {
          auto& t = p.timing;
          read_map(g, "timing",
                   {{"heartbeat_timeout", num(t.heartbeat_timeout, "heartbeat_timeout")},
                    {"takeover_delay", num(t.takeover_delay, "takeover_delay")},
                    {"restart_stagger", num(t.restart_stagger, "restart_stagger")},
                    {"maneuver_timeout", num(t.maneuver_timeout, "maneuver_timeout")},
                    {"join_service_delay", num(t.join_service_delay, "join_service_delay")}});
        }},
       {"speeds", [&](const YAML::Node& g) {
          auto& s = p.speeds;
          read_map(g, "speeds",
                   {{"platoon", num(s.platoon, "platoon")},
                    {"evade", num(s.evade, "evade")},
                    {"aeb_middle_wait", num(s.aeb_middle_wait, "aeb_middle_wait")},
                    {"fault_cc_drop", num(s.fault_cc_drop, "fault_cc_drop")},
                    {"join_approach_cap", num(s.join_approach_cap, "join_approach_cap")},
                    {"leave_exit", num(s.leave_exit, "leave_exit")},
                    {"join_gap", num(s.join_gap, "join_gap")},
                    {"join_gap_tolerance", num(s.join_gap_tolerance, "join_gap_tolerance")},
                    {"join_speed_tolerance", num(s.join_speed_tolerance, "join_speed_tolerance")},
                    {"lane_clear_margin", num(s.lane_clear_margin, "lane_clear_margin")}});
        }}});
}

ScenarioEvent read_event(const YAML::Node& n) {
  if (!n.IsMap()) throw SpecError("event must be a mapping" + where(n));
  if (!n["kind"]) throw SpecError("event without 'kind'" + where(n));
  if (!n["t"]) throw SpecError("event without 't'" + where(n));
  const auto kind = as<std::string>(n["kind"], "kind");
  ScenarioEvent ev;
  std::string kind_str;
  Fields common{{"t", num(ev.t, "t")}, {"kind", [&](const YAML::Node& k) { kind_str = k.as<std::string>(); }}};

  if (kind == "join") {
    JoinInstructionEvent e;
    common.emplace("target", id(e.target, "target"));
    common.emplace("position", integer(e.position, "position"));
    read_map(n, "join event", common);
    ev.kind = e;
  } else if (kind == "leave") {
    LeaveInstructionEvent e;
    common.emplace("target", id(e.target, "target"));
    read_map(n, "leave event", common);
    ev.kind = e;
  } else if (kind == "cut_in") {
    CutInEvent e;
    common.emplace("target", id(e.target, "target"));
    common.emplace("lane", integer(e.lane, "lane"));
    common.emplace("s_offset", num(e.s_offset, "s_offset"));
    common.emplace("duration", num(e.duration, "duration"));
    common.emplace("ttc_satisfying", flag(e.ttc_satisfying, "ttc_satisfying"));
    common.emplace("speed_delta", [&](const YAML::Node& k) { e.speed_delta = as<double>(k, "speed_delta"); });
    read_map(n, "cut_in event", common);
    ev.kind = e;
  } else if (kind == "fault") {
    FaultInjectionEvent e;
    common.emplace("target", id(e.target, "target"));
    common.emplace("fault", [&](const YAML::Node& k) {
      auto f = parse_fault(as<std::string>(k, "fault"));
      if (!f) throw SpecError("unknown fault '" + k.as<std::string>() + "'" + where(k));
      e.fault = *f;
    });
    read_map(n, "fault event", common);
    ev.kind = e;
  } else {
    throw SpecError("unknown event kind '" + kind + "'" + where(n));
  }
  return ev;
}

VehicleSpec read_vehicle(const YAML::Node& n) {
  VehicleSpec v;
  bool has_id = false;
  read_map(n, "vehicle",
           {{"id",
             [&](const YAML::Node& k) {
               v.id = VehicleId{as<int>(k, "id")};
               has_id = true;
             }},
            {"s", num(v.s, "s")},
            {"lane", integer(v.lane, "lane")},
            {"v", num(v.v, "v")},
            {"role", [&](const YAML::Node& k) {
               auto r = parse_role(as<std::string>(k, "role"));
               if (!r) throw SpecError("unknown role '" + k.as<std::string>() + "'" + where(k));
               v.role = *r;
             }}});
  if (!has_id) throw SpecError("vehicle without id" + where(n));
  return v;
}

VehicleId event_target(const EventKind& k) {
  return std::visit([](const auto& e) { return e.target; }, k);
}

}  // namespace

ScenarioSpec parse_scenario(const std::string& text, const std::string& name) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::Exception& e) {
    throw SpecError(std::string("parse error: ") + e.what());
  }
  if (!root.IsMap()) throw SpecError("scenario must be a mapping");

  ScenarioSpec spec;
  spec.name = name;
  bool explicit_roles = false;
  read_map(root, "scenario",
           {{"name", [&](const YAML::Node& n) { spec.name = as<std::string>(n, "name"); }},
            {"run",
             [&](const YAML::Node& n) {
               read_map(n, "run",
                        {{"dt", num(spec.run.dt, "dt")},
                         {"duration", num(spec.run.duration, "duration")},
                         {"seed", [&](const YAML::Node& k) { spec.run.seed = as<std::uint64_t>(k, "seed"); }},
                         {"halt_on_collision", flag(spec.run.halt_on_collision, "halt_on_collision")}});
             }},
            {"modes",
             [&](const YAML::Node& n) {
               read_map(n, "modes", {{"degradation_enabled", flag(spec.params.degradation_enabled, "degradation_enabled")}});
             }},
            {"vehicles",
             [&](const YAML::Node& n) {
               if (!n.IsSequence()) throw SpecError("'vehicles' must be a list" + where(n));
               for (const auto& v : n) {
                 spec.vehicles.push_back(read_vehicle(v));
                 if (v["role"]) explicit_roles = true;
               }
             }},
            {"platoon",
             [&](const YAML::Node& n) {
               if (!n.IsSequence()) throw SpecError("'platoon' must be a list" + where(n));
               for (const auto& v : n) spec.platoon.push_back(VehicleId{as<int>(v, "platoon")});
             }},
            {"events",
             [&](const YAML::Node& n) {
               if (!n.IsSequence()) throw SpecError("'events' must be a list" + where(n));
               for (const auto& e : n) spec.events.push_back(read_event(e));
             }},
            {"parameters", [&](const YAML::Node& n) { read_parameters(n, spec.params); }}});

  // Roles follow from the platoon list; explicit roles must agree with it.
  for (auto& v : spec.vehicles) {
    Role derived = Role::FreeVehicle;
    for (std::size_t i = 0; i < spec.platoon.size(); ++i) {
      if (spec.platoon[i] == v.id) derived = i == 0 ? Role::Leader : Role::Follower;
    }
    if (explicit_roles && v.role != derived) {
      throw SpecError("vehicle " + std::to_string(v.id.value) + " role '" + std::string(to_string(v.role)) +
                      "' disagrees with the platoon list");
    }
    v.role = derived;
  }
  spec.params.dt = spec.run.dt;
  validate(spec);
  return spec;
}

ScenarioSpec load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SpecError("cannot read scenario file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  std::string name = path;
  if (auto slash = name.find_last_of('/'); slash != std::string::npos) name = name.substr(slash + 1);
  if (auto dot = name.rfind('.'); dot != std::string::npos) name = name.substr(0, dot);
  return parse_scenario(buf.str(), name);
}

void validate(const ScenarioSpec& spec) {
  const auto& p = spec.params;
  if (!(spec.run.dt > 0.0)) throw SpecError("dt must be positive");
  if (!(spec.run.duration > 0.0)) throw SpecError("duration must be positive");
  const double ticks = spec.run.duration / spec.run.dt;
  if (std::abs(ticks - std::round(ticks)) > 1e-6) throw SpecError("duration is not a whole number of ticks");
  if (p.lanes.lane_count < 1) throw SpecError("lane count must be at least 1");
  if (p.bus.delivery_delay_ticks < 0) throw SpecError("delivery delay must be >= 0");
  if (!(p.limits.a_max > 0.0) || !(p.limits.d_max > 0.0)) throw SpecError("acceleration limits must be positive");
  if (spec.vehicles.empty()) throw SpecError("no vehicles declared");

  std::set<VehicleId> ids;
  for (std::size_t i = 0; i < spec.vehicles.size(); ++i) {
    const auto& v = spec.vehicles[i];
    if (v.id.value != static_cast<int>(i) + 1) throw SpecError("vehicle ids must be 1..N in order");
    if (v.lane < 0 || v.lane >= p.lanes.lane_count) {
      throw SpecError("vehicle " + std::to_string(v.id.value) + " lane out of range");
    }
    if (v.v < 0.0) throw SpecError("vehicle " + std::to_string(v.id.value) + " has negative speed");
    ids.insert(v.id);
  }

  std::set<VehicleId> members;
  for (VehicleId m : spec.platoon) {
    if (!ids.contains(m)) throw SpecError("UnknownTarget: platoon member v" + std::to_string(m.value));
    if (!members.insert(m).second) throw SpecError("duplicate platoon member v" + std::to_string(m.value));
  }

  double last_t = 0.0;
  for (const auto& e : spec.events) {
    if (e.t < last_t) throw SpecError("events must be sorted by t");
    if (e.t < 0.0) throw SpecError("event time must be >= 0");
    last_t = e.t;
    const VehicleId target = event_target(e.kind);
    if (!ids.contains(target)) throw SpecError("UnknownTarget: v" + std::to_string(target.value));
    if (const auto* c = std::get_if<CutInEvent>(&e.kind)) {
      if (c->lane < 0 || c->lane >= p.lanes.lane_count) throw SpecError("cut_in lane out of range");
      if (!(c->duration >= 0.0)) throw SpecError("cut_in duration must be >= 0");
    }
    if (const auto* j = std::get_if<JoinInstructionEvent>(&e.kind)) {
      if (j->position < 0 || j->position == 1) throw SpecError("join position must be 0 (tail) or >= 2");
    }
  }
}

std::string canonical_dump(const ScenarioSpec& spec) {
  std::ostringstream o;
  o << std::setprecision(17);
  const auto& p = spec.params;
  o << "run " << spec.run.dt << ' ' << spec.run.duration << ' ' << spec.run.seed << ' ' << spec.run.halt_on_collision
    << '\n';
  o << "degradation " << p.degradation_enabled << '\n';
  for (const auto& v : spec.vehicles) {
    o << "vehicle " << v.id.value << ' ' << v.s << ' ' << v.lane << ' ' << v.v << ' ' << to_string(v.role) << '\n';
  }
  o << "platoon";
  for (VehicleId m : spec.platoon) o << ' ' << m.value;
  o << '\n';
  for (const auto& e : spec.events) {
    o << "event " << e.t << ' ';
    std::visit(
        [&](const auto& ev) {
          using T = std::decay_t<decltype(ev)>;
          if constexpr (std::is_same_v<T, JoinInstructionEvent>) {
            o << "join " << ev.target.value << ' ' << ev.position;
          } else if constexpr (std::is_same_v<T, LeaveInstructionEvent>) {
            o << "leave " << ev.target.value;
          } else if constexpr (std::is_same_v<T, CutInEvent>) {
            o << "cut_in " << ev.target.value << ' ' << ev.lane << ' ' << ev.s_offset << ' ' << ev.duration << ' '
              << ev.ttc_satisfying << ' ' << ev.delta();
          } else {
            o << "fault " << ev.target.value << ' ' << to_string(ev.fault);
          }
        },
        e.kind);
    o << '\n';
  }
  o << "limits " << p.limits.a_max << ' ' << p.limits.d_max << ' ' << p.limits.jerk_max << '\n';
  o << "lanes " << p.lanes.lane_count << ' ' << p.lanes.lane_width << ' ' << p.lanes.lane_change_duration << '\n';
  o << "vehicle " << p.vehicle.length << ' ' << p.vehicle.width << '\n';
  o << "bus " << p.bus.delivery_delay_ticks << ' ' << p.bus.range << '\n';
  o << "radar " << p.radar.max_range << '\n';
  o << "spacing " << p.spacing.d0 << ' ' << p.spacing.h_base << ' ' << p.spacing.h_min << ' ' << p.spacing.h_max << ' '
    << p.spacing.k_h << '\n';
  o << "gains " << p.gains.kp << ' ' << p.gains.ki << ' ' << p.gains.kd << ' ' << p.gains.kv << ' ' << p.gains.ka << ' '
    << p.gains.windup_clamp << ' ' << p.gains.integral_band << ' ' << p.gains.kc << '\n';
  o << "ttc " << p.ttc.ttc_threshold << ' ' << p.ttc.min_gap_trigger << '\n';
  for (const auto* d : {&p.driver, &p.intruder_driver}) {
    o << "driver " << d->kc << ' ' << d->kp << ' ' << d->kv << ' ' << d->standstill_gap << ' ' << d->headway << '\n';
  }
  const auto& t = p.timing;
  o << "timing " << t.heartbeat_timeout << ' ' << t.takeover_delay << ' ' << t.restart_stagger << ' '
    << t.maneuver_timeout << ' ' << t.join_service_delay << '\n';
  const auto& s = p.speeds;
  o << "speeds " << s.platoon << ' ' << s.evade << ' ' << s.aeb_middle_wait << ' ' << s.fault_cc_drop << ' '
    << s.join_approach_cap << ' ' << s.leave_exit << ' ' << s.join_gap << ' ' << s.join_gap_tolerance << ' '
    << s.join_speed_tolerance << ' ' << s.lane_clear_margin << '\n';
  return o.str();
}

std::uint64_t spec_hash(const ScenarioSpec& spec) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : canonical_dump(spec)) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string hash_hex(std::uint64_t h) {
  std::ostringstream o;
  o << std::hex << std::setw(16) << std::setfill('0') << h;
  return o.str();
}

}  // namespace platoon
