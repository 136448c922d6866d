#include "platoon/engine.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

#include "platoon/cloud.hpp"
#include "platoon/comms.hpp"
#include "platoon/controllers.hpp"
#include "platoon/dynamics.hpp"
#include "platoon/manager.hpp"
#include "platoon/strategies.hpp"

namespace platoon {

namespace {

struct SimVehicle {
  VehicleState state;
  VehicleManager manager;
  ControlLayer control;
  RadarTracker tracker;
  PeerTable peers;
  RadarReading radar;
  RadarReading view;
  V2VPayload v2v;
};

Tick to_ticks(double seconds, double dt) { return static_cast<Tick>(std::llround(seconds / dt)); }

std::string vid(VehicleId id) { return "v" + std::to_string(id.value); }

}  // namespace

std::vector<std::tuple<VehicleId, VehicleId, double>> true_gaps(const std::vector<VehicleState>& states,
                                                                const Parameters& params) {
  std::vector<std::tuple<VehicleId, VehicleId, double>> out;
  const double reach = 0.5 * (params.lanes.lane_width + params.vehicle.width);
  for (const auto& ego : states) {
    const double y = lateral_position(ego, params.lanes);
    const VehicleState* best = nullptr;
    for (const auto& o : states) {
      if (o.id == ego.id || o.s < ego.s || (o.s == ego.s && o.id < ego.id)) continue;
      if (std::abs(lateral_position(o, params.lanes) - y) >= reach) continue;
      if (!best || o.rear() < best->rear()) best = &o;
    }
    if (best) out.emplace_back(best->id, ego.id, best->rear() - ego.s);
  }
  return out;
}

RunResult run(const ScenarioSpec& spec, const StrategyRegistry* registry) {
  StrategyRegistry builtin;
  if (!registry) {
    register_builtin_strategies(builtin);
    registry = &builtin;
  }
  const Parameters& params = spec.params;
  const double dt = spec.run.dt;

  RunResult result;
  Trace& trace = result.trace;
  trace.spec_hash = spec_hash(spec);
  trace.dt = dt;
  trace.vehicle_count = static_cast<int>(spec.vehicles.size());
  for (const auto& e : spec.events) {
    if (std::holds_alternative<CutInEvent>(e.kind)) ++trace.intruder_count;
  }

  const PlatoonInfo initial = PlatoonInfo::of(spec.platoon);
  std::vector<SimVehicle> fleet;
  fleet.reserve(spec.vehicles.size());
  std::vector<VehicleId> watched;
  for (const auto& v : spec.vehicles) {
    VehicleState st;
    st.id = v.id;
    st.s = v.s;
    st.lane = v.lane;
    st.v = v.v;
    st.length = params.vehicle.length;
    const PlatoonInfo p = v.role == Role::FreeVehicle ? PlatoonInfo{} : initial;
    fleet.push_back(SimVehicle{st, VehicleManager(v.id, v.role, p, v.v, *registry, params), {}, {}, {}, {}, {}, {}});
    watched.push_back(v.id);
  }

  std::vector<Intruder> intruders;
  std::vector<CutInEvent> intruder_events;
  FaultBoard faults;
  Bus bus(params.bus);
  CloudState cloud;
  std::vector<V2VMessage> uplink;
  std::size_t next_physical = 0;
  std::set<std::pair<VehicleId, VehicleId>> colliding;
  const Tick timeout_ticks = to_ticks(params.timing.heartbeat_timeout, dt);
  const Tick n_ticks = spec.tick_count();

  auto log = [&](SimEvent e) { result.events.push_back(std::move(e)); };

  for (Tick t = 0; t < n_ticks; ++t) {
    // (1) cloud and scripted physical events.
    std::vector<CloudVehicleView> views;
    for (const auto& v : fleet) {
      views.push_back({v.state.id, v.manager.role(), v.manager.maneuver(), v.manager.platoon(), v.manager.taken_over()});
    }
    const auto instructions = cloud_tick(cloud, spec, uplink, t, views);
    for (auto& e : cloud.log) log(std::move(e));
    cloud.log.clear();
    uplink.clear();

    while (next_physical < spec.events.size() && spec.tick_of(spec.events[next_physical].t) <= t) {
      const auto& ev = spec.events[next_physical++];
      if (const auto* f = std::get_if<FaultInjectionEvent>(&ev.kind)) {
        faults.inject(f->target, f->fault, t);
        log({t, f->target, "FaultInjected", std::string(to_string(f->fault))});
      } else if (const auto* c = std::get_if<CutInEvent>(&ev.kind)) {
        const VehicleId id{trace.vehicle_count + static_cast<int>(intruders.size()) + 1};
        intruders.push_back(spawn_cut_in(*c, fleet[c->target.value - 1].state, id, params));
        intruder_events.push_back(*c);
        log({t, id, "CutInSpawn", "ahead of " + vid(c->target)});
      }
    }

    // (2) sensing snapshot.
    std::vector<VehicleState> snapshot;
    std::vector<VehicleState> platoon_states;
    for (const auto& v : fleet) {
      snapshot.push_back(v.state);
      platoon_states.push_back(v.state);
    }
    for (const auto& in : intruders) {
      if (in.active()) snapshot.push_back(in.state);
    }
    std::vector<std::pair<bool, bool>> clear(fleet.size());
    for (std::size_t i = 0; i < fleet.size(); ++i) {
      auto& v = fleet[i];
      v.radar = v.tracker.track(radar_sense(v.state, snapshot, faults, params.lanes, params.vehicle.width,
                                            params.radar.max_range));
      v.view = perceive_ahead(v.state, snapshot, params.lanes, params.vehicle.width, params.radar.max_range);
      auto side = [&](int lane) {
        if (lane < 0 || lane >= params.lanes.lane_count) return false;
        return lane_clear(v.state, snapshot, lane, params.lanes, params.vehicle.width, params.speeds.lane_clear_margin);
      };
      clear[i] = {side(v.state.lane + 1), side(v.state.lane - 1)};
    }

    // (3) V2V delivery.
    Inboxes inboxes = bus.deliver(t, faults, platoon_states);

    // (4) management, ascending id.
    std::vector<ControllerCommand> commands(fleet.size());
    for (std::size_t i = 0; i < fleet.size(); ++i) {
      auto& v = fleet[i];
      const VehicleId id = v.state.id;
      const Inbox& inbox = inboxes[id];
      v.v2v = v2v_payload(id, inbox, faults, v.peers, t, timeout_ticks, params.degradation_enabled, watched);

      ManageInputs in;
      in.tick = t;
      in.ego = &v.state;
      in.radar = v.radar;
      in.driver_view = v.view;
      in.left_clear = clear[i].first;
      in.right_clear = clear[i].second;
      in.inbox = &inbox;
      in.v2v = &v.v2v;
      in.own_faults = faults.faults_of(id);
      for (const auto& ins : instructions) {
        if (ins.target == id || ins.series.contains(id)) in.instructions.push_back(ins);
      }
      ManageResult res = v.manager.tick(in);
      for (const auto& m : res.outbox) {
        bus.post(m, v.state.s, faults);
        if (m.is<JoinRequest>()) uplink.push_back(m);
      }
      for (auto& e : res.events) log(std::move(e));
      commands[i] = res.controller;
    }

    // (5) control, (6) dynamics.
    TraceRow row;
    row.tick = t + 1;
    row.time = static_cast<double>(t + 1) * dt;
    row.vehicles.resize(static_cast<std::size_t>(trace.vehicle_count + trace.intruder_count));
    for (std::size_t i = 0; i < fleet.size(); ++i) {
      auto& v = fleet[i];
      ControlInputs ci{&v.state, &v.radar, &v.view, &v.v2v};
      const ControlOutput co = v.control.evaluate(commands[i], ci, params);
      VehicleState next = step_lateral(v.state, commands[i].kind.lateral, params.lanes, dt);
      next = step_longitudinal(next, co.a_cmd, params.limits, dt);

      VehicleSample& smp = row.vehicles[i];
      smp.present = true;
      smp.controller = commands[i].kind.longitudinal;
      smp.v_set = commands[i].v_set;
      smp.maneuver = v.manager.maneuver();
      smp.role = v.manager.role();
      smp.radar_valid = v.radar.valid;
      smp.radar_gap = v.radar.gap;
      smp.radar_target = v.radar.target;
      smp.platoon_size = v.manager.role() == Role::FreeVehicle ? 0 : v.manager.platoon().size;
      if (v.manager.role() == Role::Leader) smp.members = v.manager.platoon().id_series;
      v.state = next;
      smp.state = next;
    }
    for (std::size_t k = 0; k < intruders.size(); ++k) {
      auto& in = intruders[k];
      if (!in.active()) continue;
      const IntruderCommand cmd = drive_intruder(in, snapshot, params, t);
      if (!in.active()) {
        log({t, in.state.id, "CutInRemoved", {}});
        continue;
      }
      VehicleState next = step_lateral(in.state, cmd.lateral, params.lanes, dt);
      next = step_longitudinal(next, cmd.a, params.limits, dt);
      in.state = next;
      VehicleSample& smp = row.vehicles[fleet.size() + k];
      smp.present = true;
      smp.intruder = true;
      smp.state = next;
      smp.controller = Longitudinal::Driver;
      smp.v_set = in.speed;
    }

    // (7) collisions and trace.
    std::vector<VehicleState> after;
    for (const auto& s : row.vehicles) {
      if (s.present) after.push_back(s.state);
    }
    const auto hits = detect_collisions(after, params.lanes, params.vehicle.width);
    for (const auto& [a, b] : hits) {
      if (!colliding.insert({a, b}).second) continue;
      result.report.collisions.push_back({row.tick, row.time, a, b});
      log({t, a, "Collision", vid(a) + "-" + vid(b)});
    }
    trace.rows.push_back(std::move(row));
    if (!hits.empty() && spec.run.halt_on_collision) {
      result.report.halted = true;
      break;
    }
  }

  // Report.
  RunReport& rep = result.report;
  rep.spec_hash = trace.spec_hash;
  rep.ticks = static_cast<Tick>(trace.rows.size());
  for (const auto& row : trace.rows) {
    std::vector<VehicleState> present;
    for (const auto& s : row.vehicles) {
      if (s.present) present.push_back(s.state);
    }
    for (const auto& [ahead, behind, gap] : true_gaps(present, params)) {
      auto [it, inserted] = rep.min_gap.try_emplace({ahead, behind}, gap);
      if (!inserted) it->second = std::min(it->second, gap);
    }
  }
  for (const auto& e : result.events) {
    if (e.kind == "ManeuverComplete") rep.completions.push_back(e);
    if (e.kind == "TakeoverRequest" || e.kind == "TakeoverComplete") rep.takeovers.push_back(e);
  }
  return result;
}

ReplayVerdict replay_check(const Trace& a, const Trace& b) {
  if (a.spec_hash != b.spec_hash) {
    throw SpecHashMismatch("spec hash " + hash_hex(a.spec_hash) + " != " + hash_hex(b.spec_hash));
  }
  ReplayVerdict v;
  const std::size_t n = std::min(a.rows.size(), b.rows.size());
  for (std::size_t i = 0; i < n; ++i) {
    const auto& ra = a.rows[i];
    const auto& rb = b.rows[i];
    bool same = ra.tick == rb.tick && ra.vehicles.size() == rb.vehicles.size();
    for (std::size_t k = 0; same && k < ra.vehicles.size(); ++k) {
      const auto& x = ra.vehicles[k];
      const auto& y = rb.vehicles[k];
      same = x.present == y.present && x.state.s == y.state.s && x.state.v == y.state.v && x.state.a == y.state.a &&
             x.state.lane == y.state.lane && x.state.lateral_offset == y.state.lateral_offset &&
             x.controller == y.controller && x.v_set == y.v_set && x.maneuver == y.maneuver && x.role == y.role &&
             x.radar_gap == y.radar_gap && x.platoon_size == y.platoon_size && x.members == y.members;
      if (!same) v.detail = "vehicle index " + std::to_string(k);
    }
    if (!same) {
      v.equal = false;
      v.first_divergence = ra.tick;
      return v;
    }
  }
  if (a.rows.size() != b.rows.size()) {
    v.equal = false;
    v.first_divergence = static_cast<Tick>(n + 1);
    v.detail = "row count differs";
  }
  return v;
}

std::string trace_csv(const Trace& trace) {
  std::ostringstream o;
  o << std::fixed << std::setprecision(6);
  o << "tick,time";
  const int total = trace.vehicle_count + trace.intruder_count;
  for (int id = 1; id <= total; ++id) {
    const std::string p = ",v" + std::to_string(id) + "_";
    o << p << "s" << p << "lane" << p << "offset" << p << "v" << p << "a" << p << "controller" << p << "v_set" << p
      << "maneuver" << p << "role" << p << "radar_gap" << p << "platoon_size";
  }
  o << '\n';
  for (const auto& row : trace.rows) {
    o << row.tick << ',' << row.time;
    for (const auto& s : row.vehicles) {
      if (!s.present) {
        o << ",,,,,,,,,,,";
        continue;
      }
      o << ',' << s.state.s << ',' << s.state.lane << ',' << s.state.lateral_offset << ',' << s.state.v << ','
        << s.state.a << ',' << to_string(s.controller) << ',';
      if (s.v_set) o << *s.v_set;
      if (s.intruder) {
        o << ",-,-,,";
      } else {
        o << ',' << to_string(s.maneuver) << ',' << to_string(s.role) << ',' << s.radar_gap << ',' << s.platoon_size;
      }
    }
    o << '\n';
  }
  return o.str();
}

std::string report_text(const RunReport& r, double dt) {
  std::ostringstream o;
  o << std::fixed << std::setprecision(6);
  o << "spec_hash: " << hash_hex(r.spec_hash) << '\n';
  o << "ticks: " << r.ticks << '\n';
  o << "duration: " << static_cast<double>(r.ticks) * dt << '\n';
  o << "halted_on_collision: " << (r.halted ? "true" : "false") << '\n';
  o << "collisions: " << r.collisions.size() << '\n';
  for (const auto& c : r.collisions) o << "  - time: " << c.time << " pair: " << vid(c.a) << "-" << vid(c.b) << '\n';
  o << "min_gap:\n";
  for (const auto& [pair, gap] : r.min_gap) o << "  " << vid(pair.first) << "-" << vid(pair.second) << ": " << gap << '\n';
  o << "maneuver_completions: " << r.completions.size() << '\n';
  for (const auto& e : r.completions) {
    o << "  - time: " << static_cast<double>(e.tick) * dt << " vehicle: " << vid(e.vehicle) << " " << e.detail << '\n';
  }
  o << "takeovers: " << r.takeovers.size() << '\n';
  for (const auto& e : r.takeovers) {
    o << "  - time: " << static_cast<double>(e.tick) * dt << " vehicle: " << vid(e.vehicle) << " " << e.kind << '\n';
  }
  return o.str();
}

std::string events_text(const std::vector<SimEvent>& events, double dt) {
  std::ostringstream o;
  o << std::fixed << std::setprecision(2);
  for (const auto& e : events) {
    o << static_cast<double>(e.tick) * dt << ' ' << vid(e.vehicle) << ' ' << e.kind;
    if (!e.detail.empty()) o << ' ' << e.detail;
    o << '\n';
  }
  return o.str();
}

void write_outputs(const std::string& dir, const RunResult& result) {
  std::filesystem::create_directories(dir);
  const auto path = std::filesystem::path(dir);
  std::ofstream(path / "trace.csv") << trace_csv(result.trace);
  std::ofstream(path / "report.txt") << report_text(result.report, result.trace.dt);
  std::ofstream(path / "events.log") << events_text(result.events, result.trace.dt);
}

}  // namespace platoon
